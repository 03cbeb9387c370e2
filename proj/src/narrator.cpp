#include "causalqa/narrator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "causalqa/text.hpp"

namespace causalqa {
namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// `word` occurs in `text` without identifier characters on either side.
bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    for (std::size_t pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        const bool left = pos == 0 || !ident_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right = end >= text.size() || !ident_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
        out += items[i];
    }
    return out;
}

std::string condition_text(const std::vector<ConditionClause>& conditions) {
    std::vector<std::string> parts;
    for (const auto& c : conditions) parts.push_back(c.variable + " = " + format_scalar(c.value));
    return join_list(parts);
}

std::vector<GraphResult::Edge> reported_edges(const GraphResult& g) {
    auto edges = g.edges();
    if (edges.size() > kMaxReportedEdges) edges.resize(kMaxReportedEdges);
    return edges;
}

[[noreturn]] void mismatch(Task task) {
    throw Error(ErrorCode::FormatMismatch, "result does not have the output format of " + std::string(to_string(task)));
}

const std::string& require(const std::optional<std::string>& slot, const char* name) {
    if (!slot) throw Error(ErrorCode::InvalidQuery, std::string("query has no ") + name);
    return *slot;
}

// Numbers written as standalone tokens (not inside identifiers).
std::vector<double> numbers_in(std::string_view text) {
    static const std::regex number(R"(-?\d+(?:\.\d+)?)");
    std::vector<double> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
        const auto pos = static_cast<std::size_t>(it->position());
        const auto end = pos + static_cast<std::size_t>(it->length());
        if (pos > 0 && (ident_char(s[pos - 1]) || s[pos - 1] == '.')) continue;
        if (end < s.size() && ident_char(s[end])) continue;
        out.push_back(std::stod(it->str()));
    }
    return out;
}

// Two decimals is the coarsest formatting the narrator produces.
bool near_any(double x, const std::vector<double>& values) {
    return std::any_of(values.begin(), values.end(), [&](double v) { return std::abs(x - v) <= 0.005 + 1e-9; });
}

std::vector<double> result_numbers(const ToolResult& result) {
    std::vector<double> out;
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, EffectResult>) {
                out.push_back(r.value);
            } else if constexpr (std::is_same_v<T, MediationResult>) {
                out.insert(out.end(), {r.total, r.direct, r.indirect});
            } else if constexpr (std::is_same_v<T, ActionResult>) {
                if (auto* d = std::get_if<double>(&r.level)) out.push_back(*d);
            } else {
                out.push_back(static_cast<double>(reported_edges(r).size()));
            }
        },
        result);
    return out;
}

std::string task_description(Task task) {
    switch (task) {
        case Task::CGL: return "causal graph learning (CGL)";
        case Task::ATE: return "average treatment effect estimation (ATE)";
        case Task::HTE: return "heterogeneous treatment effect estimation (HTE)";
        case Task::MA: return "mediation analysis (MA)";
        case Task::OPO: return "off-policy optimization (OPO)";
    }
    return std::string(to_string(task));
}

std::string strip_article(std::string_view s) {
    if (s.substr(0, 4) == "the ") s.remove_prefix(4);
    return std::string(s);
}

std::string normalize_ws(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

}  // namespace

std::string template_summary(Task task, const ToolResult& result, const CausalQuery& q) {
    if (!result_matches_task(task, result)) mismatch(task);
    std::ostringstream out;
    switch (task) {
        case Task::CGL: {
            const auto& g = std::get<GraphResult>(result);
            const auto edges = reported_edges(g);
            out << "There are " << edges.size() << " pairs of significant causal relationships.";
            for (const auto& e : edges)
                out << " The " << g.nodes.at(e.from) << " would causally influence the " << g.nodes.at(e.to) << ".";
            break;
        }
        case Task::ATE:
            out << "The average treatment effect of setting " << require(q.treatment, "treatment") << " as 1 on the "
                << require(q.response, "response") << " is " << format_fixed2(std::get<EffectResult>(result).value)
                << ".";
            break;
        case Task::HTE:
            out << "The heterogeneous treatment effect of setting " << require(q.treatment, "treatment")
                << " as 1 on the " << require(q.response, "response") << " is "
                << format_fixed2(std::get<EffectResult>(result).value) << " for those having "
                << condition_text(q.conditions) << ".";
            break;
        case Task::MA: {
            const auto& m = std::get<MediationResult>(result);
            const auto& a = require(q.treatment, "treatment");
            const auto& y = require(q.response, "response");
            out << "The overall impact of the " << a << " on the " << y << " is " << format_fixed2(m.total) << ". "
                << "This comprises a direct effect of " << format_fixed2(m.direct) << " from the " << a << " to the "
                << y << ", and an indirect effect of " << format_fixed2(m.indirect) << ", mediated by the "
                << require(q.mediator, "mediator") << ".";
            break;
        }
        case Task::OPO: {
            const auto& a = require(q.treatment, "treatment");
            out << "The best action of the " << a << " is " << a << " = "
                << format_scalar(std::get<ActionResult>(result).level) << ".";
            break;
        }
    }
    return out.str();
}

std::string completeness_sentence(const CausalQuery& q, MethodId method, std::string_view summary) {
    std::vector<std::string> missing;
    std::set<std::string> conditioned;
    for (const auto& c : q.conditions) conditioned.insert(c.variable);
    for (const auto& v : q.variables())
        if (!conditioned.count(v) && !contains_word(summary, v)) missing.push_back(v);
    std::vector<ConditionClause> missing_conditions;
    for (const auto& c : q.conditions)
        if (!contains_word(summary, c.variable)) missing_conditions.push_back(c);
    if (!missing_conditions.empty()) missing.push_back(condition_text(missing_conditions));

    std::string s = "This result was obtained by applying " + std::string(method_name(method)) + " to " + q.dataset;
    if (!missing.empty()) s += ", considering " + join_list(missing);
    return s + ".";
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
        auto s = normalize_ws(text.substr(start, i + 1 - start));
        if (!s.empty()) out.push_back(std::move(s));
        start = i + 1;
    }
    auto tail = normalize_ws(text.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
    return out;
}

RubricReport lint(std::string_view text, const NarrationContext& ctx) {
    RubricReport report;
    const std::string lower = to_lower(text);

    static const std::regex banned(R"(\b(correlat|associat)\w*)", std::regex::icase);
    std::smatch m;
    const std::string owned(text);
    if (std::regex_search(owned, m, banned)) report.hallucination_flags.push_back("non-causal term '" + m.str() + "'");

    std::vector<double> allowed = result_numbers(ctx.result);
    for (const auto& c : ctx.query.conditions)
        if (auto* d = std::get_if<double>(&c.value)) allowed.push_back(*d);
    for (double v : numbers_in(ctx.question)) allowed.push_back(v);
    if (ctx.query.task == Task::ATE || ctx.query.task == Task::HTE) allowed.push_back(1.0);
    for (double v : numbers_in(text))
        if (!near_any(v, allowed)) report.hallucination_flags.push_back("number " + format_scalar(v) + " is not in the result");

    if (!contains_word(text, ctx.query.dataset)) report.incompleteness_flags.push_back("dataset " + ctx.query.dataset);
    const std::string method = strip_article(method_name(ctx.method));
    if (lower.find(to_lower(method)) == std::string::npos) report.incompleteness_flags.push_back("method " + method);
    const auto present = numbers_in(text);
    for (double v : result_numbers(ctx.result))
        if (!near_any(v, present)) report.incompleteness_flags.push_back("result value " + format_fixed2(v));
    if (auto* a = std::get_if<ActionResult>(&ctx.result); a && std::holds_alternative<std::string>(a->level))
        if (!contains_word(text, std::get<std::string>(a->level)))
            report.incompleteness_flags.push_back("action " + std::get<std::string>(a->level));
    for (const auto& v : ctx.query.variables())
        if (!contains_word(text, v)) report.incompleteness_flags.push_back("variable " + v);

    const auto sentences = split_sentences(text);
    if (sentences.size() > kMaxSentences)
        report.fluency_flags.push_back(std::to_string(sentences.size()) + " sentences");
    std::set<std::string> seen;
    for (const auto& s : sentences)
        if (!seen.insert(s).second) report.fluency_flags.push_back("repeated sentence '" + s + "'");
    return report;
}

std::string build_interpretation_prompt(std::string_view question, Task task, MethodId method,
                                        const ToolResult& result, const CausalQuery& q) {
    std::ostringstream p;
    p << "(A) is a list of information that includes i) the original causal problem, ii) the class "
         "identification of the causal problem, iii) the used method, and iv) the outcomes.\n"
         "Interpret the results in (A) in response to the original causal problem, using neutral language to "
         "paraphrase it more fluently and engagingly.\n"
         "The output summary is (I)\n"
         "Guidelines:\n"
         "1: (I) must concentrate on interpreting the result provided in (A) in response to the problem.\n"
         "2: (I) must include all the results, methods, and dataset name in (A).\n"
         "3: (I) may include jargon from (A), but it should not include any other technical terms not mentioned "
         "in (A).\n"
         "4: The problem in (A) is a causal problem, thus (I) should not interpret the results as correlation or "
         "association.\n"
         "5: (I) should use a diversified sentence structure that is also reader-friendly and concise, rather "
         "than listing information one by one.\n"
         "6: Instead of including the problems, (I) should use the original problem to develop a more "
         "informative interpretation of the result.\n"
         "7: (I) has to avoid using strong qualifiers such as 'significant'.\n"
      << "8: (I) has to be " << kPromptSentences << " sentences or less long, with no repetition of contents.\n"
      << "9: (I) must not comment on the results.\n"
         "(A):\n"
      << "i) original causal problem: " << question << "\n"
      << "ii) class identification of the causal problem: " << task_description(task) << "\n"
      << "iii) used method: " << method_name(method) << "\n"
      << "iv) outcomes: " << template_summary(task, result, q) << "\n"
      << "(I):";
    return p.str();
}

HttpEndpoint parse_http_endpoint(std::string_view url) {
    static const std::regex re(R"(^http://([^/:]+)(?::(\d+))?(/.*)?$)");
    std::cmatch m;
    if (!std::regex_match(url.begin(), url.end(), m, re))
        throw Error(ErrorCode::BackendUnreachable, "unsupported endpoint '" + std::string(url) + "'");
    HttpEndpoint e;
    e.host = m[1].str();
    if (m[2].matched) e.port = std::stoi(m[2].str());
    if (m[3].matched) e.path = m[3].str();
    return e;
}

std::string post_json(const LlmBackendConfig& cfg, const std::string& body) {
    const HttpEndpoint ep = parse_http_endpoint(cfg.endpoint);
    httplib::Client client(ep.host, ep.port);
    const auto secs = static_cast<time_t>(cfg.timeout.count());
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (const char* token = std::getenv(cfg.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);
    const auto res = client.Post(ep.path, headers, body, "application/json");
    if (!res) throw Error(ErrorCode::BackendUnreachable, cfg.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCode::BackendUnreachable, cfg.endpoint + " answered HTTP " + std::to_string(res->status));
    return res->body;
}

std::string reply_text(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return body;
    for (const char* key : {"text", "completion", "response", "output"})
        if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
        if (c.contains("message") && c["message"].contains("content")) return c["message"]["content"].get<std::string>();
    }
    return body;
}

Interpretation narrate(const NarrationContext& ctx, const NarrateBackend& backend) {
    Interpretation out;
    out.context = ctx;
    const std::string summary = template_summary(ctx.query.task, ctx.result, ctx.query);
    const std::string fallback = summary + " " + completeness_sentence(ctx.query, ctx.method, summary);
    out.text = fallback;
    if (!backend.use_llm) return out;

    const nlohmann::json body = {
        {"prompt", build_interpretation_prompt(ctx.question, ctx.query.task, ctx.method, ctx.result, ctx.query)}};
    const std::string reply = std::string(trim(reply_text(post_json(backend.llm, body.dump()))));
    RubricReport report = lint(reply, ctx);
    if (!reply.empty() && report.empty()) {
        out.text = reply;
        out.source = Interpretation::Source::Llm;
    } else {
        if (reply.empty()) report.fluency_flags.push_back("empty reply");
        out.rejected = std::move(report);
    }
    return out;
}

}  // namespace causalqa
