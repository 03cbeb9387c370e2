#include "causalqa/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <unordered_set>

#include "causalqa/error.hpp"
#include "causalqa/text.hpp"

namespace causalqa {

namespace {

// ---------------------------------------------------------------------------
// Tokens

enum class Kind { Word, Number, Punct, Dataset };

struct Token {
    std::string text;
    std::string lower;
    std::size_t begin = 0;
    std::size_t end = 0;
    Kind kind = Kind::Word;
};

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool is_dataset_token(std::string_view t) {
    if (t.size() <= 4) return false;
    const std::string lower = to_lower(t.substr(t.size() - 4));
    if (lower != ".csv") return false;
    const auto stem = t.substr(0, t.size() - 4);
    return std::all_of(stem.begin(), stem.end(), word_char);
}

bool is_number(std::string_view t) {
    const Scalar s = make_scalar(t);
    return std::holds_alternative<double>(s);
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.begin = i;
        if (word_char(c)) {
            std::size_t j = i;
            while (j < s.size()) {
                if (word_char(s[j])) {
                    ++j;
                } else if ((s[j] == '.' || s[j] == '\'') && j + 1 < s.size() && j > i &&
                           std::isalnum(static_cast<unsigned char>(s[j + 1])) &&
                           std::isalnum(static_cast<unsigned char>(s[j - 1]))) {
                    ++j;
                } else {
                    break;
                }
            }
            t.text = std::string(s.substr(i, j - i));
            i = j;
            if (t.text.find_first_not_of('-') == std::string::npos) {
                t.kind = Kind::Punct;
            } else if (is_dataset_token(t.text)) {
                t.kind = Kind::Dataset;
            } else if (is_number(t.text)) {
                t.kind = Kind::Number;
            } else {
                t.kind = Kind::Word;
            }
        } else {
            t.text = std::string(1, c);
            t.kind = Kind::Punct;
            ++i;
        }
        t.end = i;
        t.lower = to_lower(t.text);
        out.push_back(std::move(t));
    }
    return out;
}

bool is_snake(const Token& t) { return t.kind == Kind::Word && t.text.find('_') != std::string::npos; }

// ---------------------------------------------------------------------------
// Lexicons

// Words that never belong to a variable mention.
const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> words = {
        // determiners, pronouns, auxiliaries
        "a", "an", "the", "this", "that", "these", "those", "there", "their", "its", "it", "his", "her", "our",
        "your", "my", "some", "any", "each", "every", "all", "both", "either", "neither", "such", "what", "which",
        "who", "whom", "whose", "how", "why", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did",
        "done", "doing", "have", "has", "had", "having", "can", "could", "would", "should", "will", "shall", "may",
        "might", "must", "i", "we", "you", "they", "he", "she", "me", "us", "them", "one's", "there's", "what's",
        "it's", "let", "let's", "please", "not", "no", "yes", "also", "just", "only", "really", "truly", "actually",
        "indeed", "ever", "even", "still", "very", "much", "many", "more", "most", "less", "least", "so", "too",
        "here", "own", "other", "another", "same", "overall", "whole", "total", "s",
        // prepositions and conjunctions
        "of", "on", "in", "to", "for", "from", "by", "with", "within", "without", "into", "onto", "about", "among",
        "amongst", "between", "through", "via", "across", "under", "over", "at", "as", "upon", "toward", "towards",
        "regarding", "per", "during", "after", "before", "against", "along", "around", "behind", "beyond", "near",
        "and", "or", "but", "nor", "yet", "if", "whether", "when", "where", "while", "whereas", "than", "then",
        "because", "although", "though", "unless", "until", "once", "whenever", "wherever", "like",
        // causal vocabulary and common verbs
        "effect", "effects", "impact", "impacts", "impacted", "impacting", "affect", "affects", "affected",
        "affecting", "influence", "influences", "influenced", "influencing", "cause", "causes", "caused", "causing",
        "causally", "drive", "drives", "driven", "driving", "change", "changes", "changed", "changing", "contribute",
        "contributes", "contributed", "contributing", "contribution", "lead", "leads", "led", "leading", "result",
        "results", "resulting", "outcome", "mediate", "mediates", "mediated", "mediating", "mediator",
        "mediation", "recommend", "recommends", "recommended", "recommendation", "recommendations", "adjust",
        "adjusts", "adjusting", "adjusted", "adjustment", "set", "sets", "setting", "raise", "raises", "raising",
        "raised", "increase", "increases", "increasing", "increased", "decrease", "decreases", "decreasing",
        "decreased", "alter", "alters", "altering", "altered", "vary", "varies", "varying", "varied", "maximize",
        "maximizes", "maximizing", "maximise", "maximising", "minimize", "minimizes", "minimizing", "minimise",
        "optimize", "optimizes", "optimizing", "optimise", "optimising", "improve", "improves", "improving",
        "boost", "boosting", "positively", "negatively", "shape", "shapes", "shaping", "determine", "determines",
        "determining", "estimate", "estimates", "estimated", "estimating", "evaluate", "evaluating", "analyze",
        "analyse", "analyzing", "analysing", "assess", "assessing", "examine", "examining", "measure",
        "measuring", "identify", "identified", "identifying", "discover", "discovered", "discovering", "learn",
        "learning", "find", "finding", "found", "reveal", "reveals", "revealed", "provide", "provides", "provided",
        "indicate", "indicates", "indicating", "show", "shows", "shown", "suggest", "suggests", "derive",
        "derived", "obtain", "obtained", "observe", "observed", "exist", "exists", "existing", "use", "used",
        "using", "based", "according", "considering", "consider", "given", "apply", "applying", "act", "acts",
        "serve", "serves", "conduct", "go", "goes", "make", "makes", "made", "help", "helps", "take", "taken",
        "taking", "choose", "chosen", "choosing", "pick", "select", "see", "seen", "expect", "expected", "know",
        "tell", "explain", "quantify", "compute", "calculate", "carry", "present", "play", "plays", "stand",
        "stands", "equal", "equals", "fixed", "hold", "holds", "held", "remain", "remains", "get", "gets", "give",
        "gives", "yield", "yields", "produce", "produces", "operate", "operates", "transmit", "transmitted",
        "pass", "passes", "passing", "flow", "flows", "run", "runs", "connect", "connected", "link", "linked",
        "relate", "related", "depend", "depends", "emerge", "emerges", "arise", "arises", "uncover", "map",
        "recover", "infer", "tied", "considered", "attributable", "attributed", "explained", "driven",
        // analysis nouns and adjectives
        "evidence", "method", "methods", "approach", "way", "ways", "extent", "degree", "pathway", "pathways",
        "path", "paths", "links", "relationship", "relationships", "connection", "connections", "structure",
        "graph", "network", "role", "action", "actions", "choice", "choices", "option", "options", "strategy",
        "policy", "decision", "causal", "direct", "directly", "indirect", "indirectly", "heterogeneous",
        "average", "significant", "substantial", "discernible", "possible", "best", "optimal", "ideal",
        "beneficial", "good", "better", "worse", "favorable", "favourable", "appropriate", "right", "suitable",
        "most", "top", "key", "main", "specific", "particular", "certain", "likely", "meaningful", "notable",
        "difference", "differences", "treatment", "response", "magnitude", "size", "strength", "nature", "kind",
        "type", "instances", "instance", "number", "count", "part", "portion", "share", "fraction", "channel",
        "mechanism", "dependencies", "dependency", "interplay", "ties", "influence", "lever",
        "answer", "insight", "insights", "different", "recorded", "connecting", "judging", "terms", "respect", "order", "purpose", "goal", "aim", "task",
    };
    return words;
}

// Content words that do not name a variable on their own.
const std::unordered_set<std::string>& weak_words() {
    static const std::unordered_set<std::string> words = {
        "data",        "dataset",     "datasets",   "file",       "files",       "table",       "group",
        "groups",      "subgroup",    "subgroups",  "condition",  "conditions",  "variable",    "variables",
        "factor",      "factors",     "findings",   "presence",   "effectiveness", "amount",    "level",
        "levels",      "members",     "individuals", "people",    "population",  "cases",       "case",
        "information", "column",      "columns",    "question",   "analysis",    "study",       "scenario",
        "circumstances", "context",   "rows",       "records",    "observations", "units",      "samples",
        "entries",     "values",      "value",      "features",   "feature",     "attributes",  "attribute",
        "elements",    "items",       "quantities", "metrics",    "metric",      "measures",    "indicators",
        "those",       "ones",        "others",     "everything", "anything",    "something",   "things",
        "thing",       "situation",   "setting",    "settings",   "state",       "states",      "status",
        "someone",     "units",       "figures",    "numbers",    "statistics",  "collection",  "records",
    };
    return words;
}

// Words that may open a condition clause.
const std::unordered_set<std::string>& condition_openers() {
    static const std::unordered_set<std::string> words = {"if",   "where", "when", "given", "with",
                                                          "whose", "for",   "under", "assuming", "while"};
    return words;
}

struct Phrase {
    std::vector<std::string> words;
};

std::vector<Phrase> phrases(std::initializer_list<const char*> list) {
    std::vector<Phrase> out;
    for (const char* p : list) {
        Phrase ph;
        std::string cur;
        for (const char* c = p; *c; ++c) {
            if (*c == ' ') {
                ph.words.push_back(cur);
                cur.clear();
            } else {
                cur += *c;
            }
        }
        ph.words.push_back(cur);
        out.push_back(std::move(ph));
    }
    return out;
}

// Condition verbs; "is" alone only takes numeric values.
const std::vector<Phrase>& condition_verbs() {
    static const std::vector<Phrase> list =
        phrases({"is set at", "is set to", "is fixed at", "is held at", "is equal to", "is at", "stands at",
                 "set at", "set to", "fixed at", "held at", "equal to", "equals", "equaling", "of value",
                 "at level", "at the level of", "at a level of", "at a value of", "is"});
    return list;
}

enum class Role { None, Source, Target, Mediator };

const std::vector<std::pair<Phrase, Role>>& role_cues() {
    static const std::vector<std::pair<Phrase, Role>> list = [] {
        std::vector<std::pair<Phrase, Role>> out;
        for (auto& p : phrases({"of", "does", "do", "did", "adjusting", "adjust", "setting", "set", "changing",
                                "from", "by", "if", "whether", "increasing", "raising", "altering", "varying",
                                "assigning", "intervening on", "intervention on", "treating", "manipulating",
                                "choosing", "level of"}))
            out.emplace_back(p, Role::Source);
        for (auto& p : phrases({"on", "in", "to", "affect", "affects", "influence", "influences", "impact",
                                "impacts", "drive", "drives", "change", "shape", "shapes", "maximize",
                                "maximizing", "maximise", "minimize", "minimizing", "optimize", "optimizing",
                                "improve", "improving", "raise", "boost", "toward", "towards", "cause", "causes",
                                "outcome of", "outcomes of", "changes in", "differences in", "difference in",
                                "alter", "determine", "determines"}))
            out.emplace_back(p, Role::Target);
        for (auto& p : phrases({"mediated by", "through", "via", "by way of", "channelled through",
                                "channeled through", "transmitted through", "passing through", "mediator",
                                "by means of", "mediating"}))
            out.emplace_back(p, Role::Mediator);
        return out;
    }();
    return list;
}

const std::unordered_set<std::string>& determiner_left() {
    static const std::unordered_set<std::string> words = {"of", "does", "do", "did", "from", "between", "and",
                                                          "by", "adjusting", "setting", "changing", "on", "in",
                                                          "to", "through", "via", "among", "whether", "if"};
    return words;
}

const std::unordered_set<std::string>& determiner_right() {
    static const std::unordered_set<std::string> words = {
        "on", "in", "to", "and", "or", "affect", "affects", "influence", "influences", "impact", "impacts",
        "cause", "causes", "have", "has", "given", "with", "mediate", "mediates", "is", "through", "via", "for",
        "at", "drive", "drives", "change", "changes"};
    return words;
}

bool is_stop(const Token& t) { return stop_words().count(t.lower) > 0; }

// ---------------------------------------------------------------------------
// Analysis shared by the public operations

struct Span {
    std::size_t first = 0;  // token index, inclusive
    std::size_t last = 0;   // inclusive
};

struct FoundCondition {
    ConditionClause clause;
    Span span;
    bool natural = false;
};

bool phrase_at(const std::vector<Token>& toks, std::size_t i, const Phrase& p) {
    if (i + p.words.size() > toks.size()) return false;
    for (std::size_t k = 0; k < p.words.size(); ++k)
        if (toks[i + k].kind != Kind::Word || toks[i + k].lower != p.words[k]) return false;
    return true;
}

bool value_token(const Token& t, bool numeric_only) {
    if (t.kind == Kind::Number) return true;
    if (numeric_only) return false;
    return t.kind == Kind::Word && !is_stop(t);
}

// Variable named just before token `end` (exclusive): a parenthesized alias,
// a snake_case token, or the run of content words.
std::optional<std::pair<std::string, std::size_t>> variable_before(const std::vector<Token>& toks, std::size_t end) {
    if (end == 0) return std::nullopt;
    std::size_t i = end - 1;
    if (toks[i].text == ")" && i >= 2 && toks[i - 2].text == "(" && toks[i - 1].kind == Kind::Word &&
        is_identifier(toks[i - 1].text))
        return std::make_pair(toks[i - 1].text, i - 2);
    if (toks[i].kind != Kind::Word || is_stop(toks[i])) return std::nullopt;
    if (is_snake(toks[i])) return std::make_pair(toks[i].text, i);
    std::size_t first = i;
    while (first > 0 && toks[first - 1].kind == Kind::Word && !is_stop(toks[first - 1]) && !is_snake(toks[first - 1]))
        --first;
    std::string name;
    for (std::size_t k = first; k <= i; ++k) name += (name.empty() ? "" : "_") + toks[k].lower;
    return std::make_pair(name, first);
}

std::vector<FoundCondition> find_conditions(const std::vector<Token>& toks) {
    std::vector<FoundCondition> out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        // name = value
        if (toks[i].text == "=" && i + 1 < toks.size() && value_token(toks[i + 1], false)) {
            if (auto var = variable_before(toks, i)) {
                FoundCondition fc;
                fc.clause = {var->first, make_scalar(toks[i + 1].text)};
                fc.span = {var->second, i + 1};
                if (fc.span.first > 0 && toks[fc.span.first - 1].text == "(" && i + 2 < toks.size() &&
                    toks[i + 2].text == ")") {
                    fc.span = {fc.span.first - 1, i + 2};
                }
                out.push_back(fc);
            }
            continue;
        }
        // name <verb> value; longest verb phrase wins
        const Phrase* verb = nullptr;
        for (const auto& p : condition_verbs())
            if (phrase_at(toks, i, p) && (!verb || p.words.size() > verb->words.size())) verb = &p;
        if (!verb) continue;
        const std::size_t v = i + verb->words.size();
        const bool bare_is = verb->words.size() == 1 && verb->words[0] == "is";
        if (v >= toks.size() || !value_token(toks[v], bare_is)) continue;
        auto var = variable_before(toks, i);
        if (!var) continue;
        FoundCondition fc;
        fc.clause = {var->first, make_scalar(toks[v].text)};
        fc.span = {var->second, v};
        fc.natural = true;
        out.push_back(fc);
        i = v;
    }

    // Drop a natural clause that is immediately restated as "(alias = value)".
    std::vector<FoundCondition> kept;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& fc = out[k];
        if (fc.natural && k + 1 < out.size() && !out[k + 1].natural &&
            out[k + 1].span.first == fc.span.last + 1 && toks[out[k + 1].span.first].text == "(") {
            FoundCondition merged = out[k + 1];
            merged.span.first = fc.span.first;
            kept.push_back(merged);
            ++k;
            continue;
        }
        kept.push_back(fc);
    }

    // Extend each clause back to its opener word within the same comma-free stretch.
    constexpr std::size_t kMaxOpenerDistance = 8;
    for (auto& fc : kept) {
        std::size_t i = fc.span.first, steps = 0;
        while (i > 0 && steps < kMaxOpenerDistance) {
            const Token& t = toks[i - 1];
            if (t.kind == Kind::Punct && t.text != "(" && t.text != ")") break;
            if (t.kind == Kind::Dataset) break;
            --i;
            ++steps;
            if (t.kind == Kind::Word && condition_openers().count(t.lower)) {
                fc.span.first = i;
                break;
            }
        }
    }

    std::vector<FoundCondition> unique;
    for (const auto& fc : kept) {
        bool dup = std::any_of(unique.begin(), unique.end(),
                               [&](const FoundCondition& u) { return u.clause.variable == fc.clause.variable; });
        if (!dup) unique.push_back(fc);
    }
    return unique;
}

struct Chunk {
    std::string name;
    std::size_t first = 0;  // first token of the source span (long form included)
    std::size_t last = 0;
    std::vector<std::string> words;  // lowercased words, empty for snake/alias mentions
    bool alias = false;
};

std::vector<Chunk> chunk(const std::vector<Token>& toks, const std::vector<bool>& masked) {
    std::vector<Chunk> out;
    auto content = [&](std::size_t i) {
        const Token& t = toks[i];
        if (masked[i] || t.kind != Kind::Word || is_snake(t)) return false;
        if (!is_stop(t)) return true;
        // A lone "a" used as a variable name: "effect of a on b".
        if (t.lower == "a" && i > 0 && determiner_left().count(toks[i - 1].lower))
            return i + 1 == toks.size() || (toks[i + 1].kind == Kind::Punct && toks[i + 1].text != "(") ||
                   determiner_right().count(toks[i + 1].lower) > 0;
        return false;
    };

    std::size_t i = 0;
    while (i < toks.size()) {
        if (masked[i]) {
            ++i;
            continue;
        }
        const Token& t = toks[i];
        // "long form (alias)"
        if (t.text == "(" && i + 2 < toks.size() && !masked[i + 1] && toks[i + 1].kind == Kind::Word &&
            is_identifier(toks[i + 1].text) && toks[i + 2].text == ")") {
            Chunk c;
            c.name = toks[i + 1].text;
            c.alias = true;
            c.first = i;
            c.last = i + 2;
            std::set<std::string> parts;
            {
                std::string cur;
                for (char ch : to_lower(c.name)) {
                    if (ch == '_' || ch == '-') {
                        if (!cur.empty()) parts.insert(cur);
                        cur.clear();
                    } else {
                        cur += ch;
                    }
                }
                if (!cur.empty()) parts.insert(cur);
            }
            std::size_t from = i;
            if (!out.empty() && out.back().last + 1 == i && !out.back().alias) {
                from = out.back().first;
                out.pop_back();
            }
            // Words of the alias just before the long form belong to it too ("number of doctors (number_of_doctors)").
            while (from > 0 && !masked[from - 1] && toks[from - 1].kind == Kind::Word &&
                   parts.count(toks[from - 1].lower))
                --from;
            while (!out.empty() && !out.back().alias && out.back().first >= from) out.pop_back();
            c.first = from;
            out.push_back(c);
            i += 3;
            continue;
        }
        if (is_snake(t)) {
            out.push_back({t.text, i, i, {}, false});
            ++i;
            continue;
        }
        if (!content(i)) {
            ++i;
            continue;
        }
        Chunk c;
        c.first = i;
        while (i < toks.size() && content(i)) {
            c.words.push_back(toks[i].lower);
            ++i;
        }
        c.last = i - 1;
        std::string name;
        for (const auto& w : c.words) name += (name.empty() ? "" : "_") + w;
        c.name = name;
        out.push_back(c);
    }

    // Drop chunks made only of weak words.
    std::vector<Chunk> kept;
    for (auto& c : out) {
        if (!c.words.empty() && std::all_of(c.words.begin(), c.words.end(),
                                            [](const std::string& w) { return weak_words().count(w) > 0; }))
            continue;
        kept.push_back(std::move(c));
    }
    return kept;
}

std::optional<std::string> best_column(std::string_view candidate, const std::vector<std::string>& columns,
                                       double threshold) {
    const std::string lower = to_lower(candidate);
    for (const auto& c : columns)
        if (to_lower(c) == lower) return c;
    std::optional<std::string> best;
    double best_d = threshold + 1e-12;
    bool unique = false;
    for (const auto& c : columns) {
        const double d = normalized_levenshtein(lower, to_lower(c));
        if (d < best_d - 1e-12) {
            best_d = d;
            best = c;
            unique = true;
        } else if (best && std::abs(d - best_d) <= 1e-12) {
            unique = false;
        }
    }
    if (best && unique && best_d <= threshold) return best;
    return std::nullopt;
}

// Applies known_columns: whole chunk first, then its sub-spans longest first.
void match_columns(std::vector<Chunk>& chunks, const std::vector<std::string>& columns, double threshold) {
    for (auto& c : chunks) {
        if (auto hit = best_column(c.name, columns, threshold)) {
            c.name = *hit;
            continue;
        }
        if (c.words.size() < 2) continue;
        bool done = false;
        for (std::size_t len = c.words.size() - 1; len >= 1 && !done; --len) {
            for (std::size_t s = 0; s + len <= c.words.size() && !done; ++s) {
                std::string sub;
                for (std::size_t k = s; k < s + len; ++k) sub += (sub.empty() ? "" : "_") + c.words[k];
                if (auto hit = best_column(sub, columns, threshold)) {
                    c.name = *hit;
                    done = true;
                }
            }
        }
    }
}

struct Analysis {
    std::vector<Token> toks;
    std::vector<FoundCondition> conditions;
    std::vector<Chunk> chunks;
};

Analysis analyze(std::string_view question, const ParseContext* ctx) {
    Analysis a;
    a.toks = tokenize(question);
    a.conditions = find_conditions(a.toks);
    std::vector<bool> masked(a.toks.size(), false);
    for (const auto& fc : a.conditions)
        for (std::size_t k = fc.span.first; k <= fc.span.last; ++k) masked[k] = true;
    a.chunks = chunk(a.toks, masked);
    if (ctx && ctx->known_columns) match_columns(a.chunks, *ctx->known_columns, ctx->fuzzy_threshold);

    std::vector<Chunk> unique;
    std::set<std::string> seen;
    for (auto& c : a.chunks)
        if (seen.insert(c.name).second) unique.push_back(std::move(c));
    a.chunks = std::move(unique);
    return a;
}

// ---------------------------------------------------------------------------
// Classification

bool contains_cue(const std::string& lower_text, const std::string& pattern) {
    std::size_t pos = 0;
    while ((pos = lower_text.find(pattern, pos)) != std::string::npos) {
        const bool start_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower_text[pos - 1]));
        if (start_ok) return true;
        ++pos;
    }
    return false;
}

// Lowercased tokens joined by single spaces. Snake-case identifiers and
// dataset names become an opaque placeholder so that a variable such as
// policy_lapse_rate cannot fire the "policy" cue.
std::string cue_text(const std::vector<Token>& toks) {
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out += ' ';
        const bool opaque = t.kind == Kind::Dataset || (t.kind == Kind::Word && t.text.find('_') != std::string::npos);
        out += opaque ? "#" : t.lower;
    }
    return out;
}

constexpr std::array<Task, 5> kPriority = {Task::MA, Task::OPO, Task::HTE, Task::CGL, Task::ATE};

}  // namespace

const CueTable& CueTable::defaults() {
    static const CueTable table = [] {
        CueTable t;
        t.cues[Task::MA] = {{"mediat", 3},           {"pathway", 2},      {"indirect", 2},   {"decompos", 3},
                            {"direct and indirect", 3}, {"through", 1},   {"via", 1},        {"by way of", 2},
                            {"intermediary", 3},     {"channel", 2}};
        t.cues[Task::OPO] = {{"recommend", 3},       {"best action", 3},    {"optimal", 3},     {"should", 2},
                             {"adjusting", 2},       {"maximiz", 3},        {"minimiz", 3},     {"optimiz", 3},
                             {"maximis", 3},         {"positively impact", 2}, {"which level", 2}, {"what action", 3},
                             {"most beneficial", 3}, {"choice", 2},         {"best", 1},        {"ideal", 2},
                             {"policy", 2},          {"which value", 2}};
        t.cues[Task::HTE] = {{"under a group condition", 3}, {"for those", 3},     {"subgroup", 3},
                             {"heterogeneous", 3},           {"conditional", 2},   {"among those", 3}};
        t.cues[Task::CGL] = {{"causal link", 3},         {"causal relationship", 3}, {"direct link", 3},
                             {"causal graph", 3},        {"causal structure", 3},    {"connections among", 3},
                             {"causal connection", 3},   {"direct influence", 3},    {"directly caus", 3},
                             {"relationships", 2},       {"direct relationship", 3}, {"causal network", 3},
                             {"causal discovery", 3},    {"causal dependenc", 3}};
        t.cues[Task::ATE] = {{"effect of", 2},    {"impact of", 2},    {"contribute to", 2}, {"influence on", 2},
                             {"effect on", 2},    {"lead to", 2},      {"affect", 1},        {"impact", 1},
                             {"effect", 1},       {"influence", 1},    {"cause", 1},         {"difference in", 1},
                             {"to what extent", 1}, {"drive", 1},      {"contribut", 1}};
        return t;
    }();
    return table;
}

Classification classify_task(std::string_view question, const ParseContext& ctx) {
    if (trim(question).empty()) throw Error(ErrorCode::EmptyQuestion, "the question is empty");
    const auto toks = tokenize(question);
    const std::string text = cue_text(toks);

    Classification out;
    for (Task t : kAllTasks) out.raw[t] = 0.0;
    for (const auto& [task, cues] : ctx.cues.cues)
        for (const auto& cue : cues)
            if (contains_cue(text, cue.pattern)) out.raw[task] += cue.weight;

    const bool has_condition = !find_conditions(toks).empty();
    if (has_condition && out.raw[Task::ATE] > 0.0) out.raw[Task::HTE] += ctx.cues.condition_bonus;

    double sum = 0.0, best = 0.0;
    Task winner = Task::ATE;
    for (Task t : kPriority) {
        sum += out.raw[t];
        if (out.raw[t] > best) {
            best = out.raw[t];
            winner = t;
        }
    }
    out.task = winner;
    out.score = sum > 0.0 ? best / sum : 0.0;
    return out;
}

std::string extract_dataset(std::string_view question) {
    for (const auto& t : tokenize(question))
        if (t.kind == Kind::Dataset) return t.text;
    throw Error(ErrorCode::DatasetNotFound, "the question names no .csv dataset");
}

std::vector<Mention> extract_variables(std::string_view question, const ParseContext& ctx) {
    const Analysis a = analyze(question, &ctx);
    std::vector<Mention> out;
    for (const auto& c : a.chunks) out.push_back({c.name, a.toks[c.first].begin, a.toks[c.last].end});
    return out;
}

std::vector<ConditionClause> extract_conditions(std::string_view question) {
    std::vector<ConditionClause> out;
    for (const auto& fc : find_conditions(tokenize(question))) out.push_back(fc.clause);
    return out;
}

namespace {

// Role of the cue closest to (and ending right before) token `end`, scanning
// back no further than `begin`. The longest phrase ending at a position wins.
// Scans leftwards from `end`, never past a dataset name or clause punctuation.
Role nearest_cue(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
    for (std::size_t i = end; i > begin; --i) {
        const Token& t = toks[i - 1];
        if (t.kind == Kind::Dataset || (t.kind == Kind::Punct && t.text != "(" && t.text != ")")) {
            begin = i;
            break;
        }
    }
    for (std::size_t stop = end; stop > begin; --stop) {
        const Phrase* best = nullptr;
        Role role = Role::None;
        for (const auto& [p, r] : role_cues()) {
            const std::size_t n = p.words.size();
            if (stop < begin + n) continue;
            if (!phrase_at(toks, stop - n, p)) continue;
            if (!best || n > best->words.size()) {
                best = &p;
                role = r;
            }
        }
        if (best) return role;
    }
    return Role::None;
}

bool mediator_on_right(const std::vector<Token>& toks, std::size_t from, std::size_t to) {
    static const std::vector<Phrase> cues =
        phrases({"mediate", "mediates", "mediated", "mediating", "act as a mediator", "acts as a mediator",
                 "act as the mediator", "acts as the mediator", "serve as a mediator", "serves as a mediator",
                 "serve as the mediator", "serves as the mediator", "play a mediating role", "plays a mediating role",
                 "act as an intermediary", "acts as an intermediary"});
    static const std::unordered_set<std::string> fillers = {"really", "truly", "actually", "significantly",
                                                            "substantially", "partly", "partially", "fully",
                                                            "indeed", "in", "fact", "also"};
    std::size_t i = from;
    while (i < to && toks[i].kind == Kind::Word && fillers.count(toks[i].lower)) ++i;
    for (const auto& p : cues)
        if (i < to && phrase_at(toks, i, p)) return true;
    return false;
}

std::size_t token_at(const std::vector<Token>& toks, std::size_t byte) {
    for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i].begin >= byte) return i;
    return toks.size();
}

std::size_t token_ending_at(const std::vector<Token>& toks, std::size_t byte) {
    for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i].end >= byte) return i;
    return toks.empty() ? 0 : toks.size() - 1;
}

}  // namespace

CausalQuery assign_roles(Task task, const std::vector<Mention>& mentions, std::string_view question) {
    const auto toks = tokenize(question);
    const auto conds = find_conditions(toks);

    CausalQuery q;
    q.task = task;
    for (const auto& fc : conds) q.conditions.push_back(fc.clause);

    auto is_condition_var = [&](const std::string& name) {
        return std::any_of(q.conditions.begin(), q.conditions.end(),
                           [&](const ConditionClause& c) { return to_lower(c.variable) == to_lower(name); });
    };
    std::vector<const Mention*> usable;
    for (const auto& m : mentions)
        if (!is_condition_var(m.name)) usable.push_back(&m);

    if (task == Task::CGL) {
        q.conditions.clear();
        for (const auto* m : usable) q.nodes.push_back(m->name);
        if (q.nodes.empty()) q.nodes.emplace_back(kAllVariables);
        return q;
    }

    std::vector<Role> left(usable.size(), Role::None);
    std::vector<bool> right_mediator(usable.size(), false);
    std::size_t prev_end = 0;
    for (std::size_t k = 0; k < usable.size(); ++k) {
        const std::size_t first = token_at(toks, usable[k]->begin);
        const std::size_t last = token_ending_at(toks, usable[k]->end);
        left[k] = nearest_cue(toks, prev_end, first);
        const std::size_t next =
            k + 1 < usable.size() ? token_at(toks, usable[k + 1]->begin) : toks.size();
        right_mediator[k] = mediator_on_right(toks, last + 1, next);
        prev_end = last + 1;
    }

    std::vector<bool> used(usable.size(), false);
    auto take = [&](auto pred) -> std::optional<std::string> {
        for (std::size_t k = 0; k < usable.size(); ++k)
            if (!used[k] && pred(k)) {
                used[k] = true;
                return usable[k]->name;
            }
        return std::nullopt;
    };
    auto any = [](std::size_t) { return true; };

    if (task == Task::MA) {
        q.mediator = take([&](std::size_t k) { return right_mediator[k]; });
        if (!q.mediator) q.mediator = take([&](std::size_t k) { return left[k] == Role::Mediator; });
    }
    q.treatment = take([&](std::size_t k) { return left[k] == Role::Source; });
    q.response = take([&](std::size_t k) { return left[k] == Role::Target; });
    if (!q.treatment) q.treatment = take(any);
    if (!q.response) q.response = take(any);
    if (task == Task::MA && !q.mediator) q.mediator = take(any);

    if (!q.treatment) throw Error(ErrorCode::RoleAmbiguity, "could not identify the treatment variable");
    if (!q.response) throw Error(ErrorCode::RoleAmbiguity, "could not identify the response variable");
    if (task == Task::MA && !q.mediator) throw Error(ErrorCode::RoleAmbiguity, "could not identify the mediator");
    if (task == Task::ATE || task == Task::MA) q.conditions.clear();
    if ((task == Task::HTE || task == Task::OPO) && q.conditions.empty())
        throw Error(ErrorCode::RoleAmbiguity, "a conditional question needs a stated condition");
    return q;
}

CausalQuery interpret(std::string_view question, const ParseContext& ctx) {
    const Classification cls = classify_task(question, ctx);
    if (cls.score <= 0.0)
        throw Error(ErrorCode::InterpretationFailed, "the question does not look like a supported causal question");
    std::string dataset = extract_dataset(question);
    const auto mentions = extract_variables(question, ctx);
    CausalQuery q;
    try {
        q = assign_roles(cls.task, mentions, question);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::RoleAmbiguity) throw;
        throw Error(ErrorCode::InterpretationFailed, e.what());
    }
    q.dataset = std::move(dataset);
    const auto violations = validate_query(q);
    if (!violations.empty())
        throw Error(ErrorCode::InterpretationFailed,
                    "interpreted query is invalid at '" + violations.front().slot + "': " + violations.front().rule);
    return q;
}

}  // namespace causalqa
