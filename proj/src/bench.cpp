#include "causalqa/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "causalqa/narrator.hpp"
#include "causalqa/text.hpp"

namespace causalqa {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedHierarchy, why); }

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

template <class T>
const T& pick_from(Rng& rng, const std::vector<T>& items) {
    return items[pick(rng, items.size())];
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string join_names(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? " and " : ", ";
        out += items[i];
    }
    return out;
}

// Templates use {A} treatment, {Y} response, {M} mediator, {C} condition,
// {N} node list, {D} dataset and {V} an effect verb in base form.
struct TemplateSet {
    std::vector<std::string> main;
    std::vector<std::string> all;  // graph queries over every column
};

const TemplateSet& templates(Task task) {
    static const std::map<Task, TemplateSet> sets = {
        {Task::ATE,
         {{
              "How does {A} in {D} contribute to changes in {Y}?",
              "What is the effect of {A} on {Y} in the {D} dataset?",
              "Using {D}, does {A} {V} {Y}?",
              "To what extent does {A} {V} {Y} according to {D}?",
              "In {D}, what is the impact of {A} on {Y}?",
              "Would changing {A} lead to a different {Y}, judging from {D}?",
          },
          {}}},
        {Task::HTE,
         {{
              "Based on the findings in the {D} dataset, what impact does {A} have on {Y} under a group condition "
              "where {C}?",
              "For those with {C}, what is the effect of {A} on {Y} in {D}?",
              "In {D}, how does {A} {V} {Y} among those whose {C}?",
              "What is the conditional effect of {A} on {Y} given {C}, using {D}?",
              "Within the subgroup where {C}, does {A} {V} {Y} according to {D}?",
          },
          {}}},
        {Task::MA,
         {{
              "Is there substantial evidence in {D} indicating that the pathway from {A} to {Y} is mediated by {M}?",
              "In {D}, how much of the effect of {A} on {Y} is mediated by {M}?",
              "Using {D}, decompose the effect of {A} on {Y} into direct and indirect effects through {M}.",
              "What is the indirect effect of {A} on {Y} via {M} in the {D} dataset?",
              "Does {A} {V} {Y} by way of {M}, according to {D}?",
          },
          {}}},
        {Task::OPO,
         {{
              "If {C}, what recommendations can be derived from the {D} dataset on adjusting {A} to positively "
              "impact {Y}?",
              "Given {C}, what level of {A} should be chosen to maximize {Y} according to {D}?",
              "When {C}, which value of {A} is optimal for improving {Y} in {D}?",
              "Using {D}, what is the best action for {A} to improve {Y} when {C}?",
              "According to {D}, how should {A} be set to maximize {Y} if {C}?",
          },
          {}}},
        {Task::CGL,
         {{
              "Is there a method to discover every direct influence among {N} in the {D} dataset?",
              "What are the causal relationships among {N} in {D}?",
              "Can you learn the causal graph connecting {N} from {D}?",
              "Which causal links exist between {N} in {D}?",
              "Using {D}, uncover the causal structure among {N}.",
          },
          {
              "Is there a method to discover every direct influence present in the {D} dataset?",
              "What are the causal relationships among all variables in {D}?",
              "Can you learn the causal graph of {D}?",
              "Which causal links exist between the variables recorded in {D}?",
              "Using {D}, uncover the causal structure connecting all of its variables.",
          }}},
    };
    return sets.at(task);
}

const std::vector<std::string>& effect_verbs() {
    static const std::vector<std::string> v = {"affect", "influence", "impact", "drive"};
    return v;
}

std::string render_condition(const ConditionClause& c, Rng& rng) {
    static const std::vector<std::string> links = {" = ", " is set at ", " stands at ", " equals ", " is "};
    return c.variable + pick_from(rng, links) + format_scalar(c.value);
}

// "number_of_staff" -> "number of staff (number_of_staff)" now and then.
std::string render_variable(const std::string& name, Rng& rng) {
    if (std::bernoulli_distribution(0.15)(rng) && name.find('_') != std::string::npos) {
        std::string words = name;
        std::replace(words.begin(), words.end(), '_', ' ');
        return words + " (" + name + ")";
    }
    return name;
}

void replace_all(std::string& s, std::string_view key, std::string_view value) {
    for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size()))
        s.replace(pos, key.size(), value);
}

std::string capitalize_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

}  // namespace

std::string_view to_string(VarType t) { return t == VarType::Discrete ? "discrete" : "continuous"; }

const TopicNode* TopicHierarchy::find(std::string_view topic) const {
    for (const auto& t : topics)
        if (t.name == topic) return &t;
    return nullptr;
}

TopicHierarchy parse_hierarchy(std::string_view text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) malformed("hierarchy is not valid JSON");
    if (!j.is_object() || !j.contains("topics") || !j["topics"].is_array() || j["topics"].empty())
        malformed("hierarchy needs a non-empty 'topics' list");

    TopicHierarchy h;
    std::set<std::string> topic_names;
    for (const auto& t : j["topics"]) {
        if (!t.is_object() || !t.contains("name") || !t["name"].is_string() || !t.contains("variables") ||
            !t["variables"].is_array())
            malformed("every topic needs a name and a variables list");
        TopicNode node;
        node.name = t["name"].get<std::string>();
        if (!is_identifier(node.name)) malformed("topic name '" + node.name + "' is not an identifier");
        if (!topic_names.insert(node.name).second) malformed("duplicate topic '" + node.name + "'");
        std::set<std::string> var_names;
        for (const auto& v : t["variables"]) {
            if (!v.is_object() || !v.contains("name") || !v["name"].is_string() || !v.contains("vtype") ||
                !v["vtype"].is_string())
                malformed("topic '" + node.name + "': every variable needs a name and a vtype");
            VariableSpec spec;
            spec.name = v["name"].get<std::string>();
            const auto vtype = v["vtype"].get<std::string>();
            if (vtype == "discrete")
                spec.vtype = VarType::Discrete;
            else if (vtype == "continuous")
                spec.vtype = VarType::Continuous;
            else
                malformed("variable '" + spec.name + "' has unknown vtype '" + vtype + "'");
            if (!is_identifier(spec.name)) malformed("variable name '" + spec.name + "' is not an identifier");
            if (!var_names.insert(spec.name).second)
                malformed("topic '" + node.name + "' repeats variable '" + spec.name + "'");
            node.variables.push_back(std::move(spec));
        }
        if (node.variables.size() < kMinTopicVariables)
            malformed("topic '" + node.name + "' has fewer than " + std::to_string(kMinTopicVariables) +
                      " variables");
        h.topics.push_back(std::move(node));
    }
    return h;
}

TopicHierarchy load_hierarchy(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        malformed(e.what());
    }
    return parse_hierarchy(text);
}

CausalQuery sample_query(Task task, const TopicHierarchy& h, Rng& rng) {
    const TopicNode& topic = pick_from(rng, h.topics);
    std::vector<std::size_t> order(topic.variables.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t next = 0;
    auto draw = [&]() -> const VariableSpec& { return topic.variables[order[next++]]; };

    CausalQuery q;
    q.task = task;
    q.dataset = topic.name + ".csv";
    switch (task) {
        case Task::CGL: {
            if (std::bernoulli_distribution(kAllVariablesProbability)(rng)) {
                q.nodes = {std::string(kAllVariables)};
            } else {
                const std::size_t hi = std::min<std::size_t>(5, topic.variables.size());
                const std::size_t k = std::uniform_int_distribution<std::size_t>(2, hi)(rng);
                for (std::size_t i = 0; i < k; ++i) q.nodes.push_back(draw().name);
            }
            break;
        }
        case Task::ATE:
        case Task::MA:
            q.treatment = draw().name;
            q.response = draw().name;
            if (task == Task::MA) q.mediator = draw().name;
            break;
        case Task::HTE:
        case Task::OPO: {
            q.treatment = draw().name;
            q.response = draw().name;
            const VariableSpec& c = draw();
            const double value = c.vtype == VarType::Discrete
                                     ? static_cast<double>(std::uniform_int_distribution<int>(0, 4)(rng))
                                     : round2(uniform(rng, 0.0, 1.0));
            q.conditions.push_back({c.name, value});
            break;
        }
    }
    return q;
}

std::size_t template_count(Task task) { return templates(task).main.size(); }

std::string render_question(const CausalQuery& q, std::size_t template_id, Rng& rng) {
    const TemplateSet& set = templates(q.task);
    const bool all = q.task == Task::CGL && q.nodes.size() == 1 && q.nodes.front() == kAllVariables;
    const auto& pool = all ? set.all : set.main;
    if (template_id >= pool.size())
        throw Error(ErrorCode::UnknownTemplate, "template " + std::to_string(template_id) + " does not exist for " +
                                                    std::string(to_string(q.task)));
    std::string text = pool[template_id];
    // Slots are filled in a fixed order so the rng stream is reproducible.
    if (text.find("{V}") != std::string::npos) replace_all(text, "{V}", pick_from(rng, effect_verbs()));
    if (q.treatment) replace_all(text, "{A}", render_variable(*q.treatment, rng));
    if (q.response) replace_all(text, "{Y}", render_variable(*q.response, rng));
    if (q.mediator) replace_all(text, "{M}", render_variable(*q.mediator, rng));
    if (!q.conditions.empty()) {
        std::vector<std::string> parts;
        for (const auto& c : q.conditions) parts.push_back(render_condition(c, rng));
        replace_all(text, "{C}", join_names(parts));
    }
    if (!all) replace_all(text, "{N}", join_names(q.nodes));
    replace_all(text, "{D}", q.dataset);
    return capitalize_first(text);
}

std::vector<QueryBenchRecord> generate_retrieval_bench(std::size_t n_per_task, const TopicHierarchy& h,
                                                       std::uint64_t seed) {
    std::vector<QueryBenchRecord> out;
    std::unordered_set<std::string> seen;
    for (Task task : kAllTasks) {
        const std::string tag = "bench/" + std::string(to_string(task));
        // Bounded so a tiny hierarchy cannot spin forever on duplicates.
        const std::size_t max_attempts = 1000 * n_per_task + 1000;
        std::size_t made = 0;
        for (std::uint64_t attempt = 0; made < n_per_task && attempt < max_attempts; ++attempt) {
            QueryBenchRecord r;
            r.seed = derive_seed(seed, tag, attempt);
            Rng rng(r.seed);
            r.golden = sample_query(task, h, rng);
            r.template_id = pick(rng, template_count(task));
            r.question = render_question(r.golden, r.template_id, rng);
            if (!seen.insert(r.question).second) continue;
            out.push_back(std::move(r));
            ++made;
        }
    }
    return out;
}

ToolResult sample_tool_result(const CausalQuery& q, const TopicHierarchy& h, Rng& rng) {
    switch (q.task) {
        case Task::ATE:
        case Task::HTE:
            return EffectResult{round2(uniform(rng, -2.0, 2.0))};
        case Task::MA: {
            MediationResult m;
            m.direct = round2(uniform(rng, -20.0, 20.0));
            m.indirect = round2(uniform(rng, -20.0, 20.0));
            m.total = m.direct + m.indirect;
            return m;
        }
        case Task::OPO: {
            static const std::vector<std::string> letters = {"A", "B", "C", "D"};
            if (std::bernoulli_distribution(0.5)(rng))
                return ActionResult{static_cast<double>(std::uniform_int_distribution<int>(0, 1)(rng))};
            return ActionResult{pick_from(rng, letters)};
        }
        case Task::CGL: {
            GraphResult g;
            if (q.nodes.size() == 1 && q.nodes.front() == kAllVariables) {
                const std::string stem = q.dataset.substr(0, q.dataset.rfind('.'));
                const TopicNode* topic = h.find(stem);
                if (!topic) throw Error(ErrorCode::MalformedHierarchy, "no topic for dataset " + q.dataset);
                for (const auto& v : topic->variables) g.nodes.push_back(v.name);
            } else {
                g.nodes = q.nodes;
            }
            const std::size_t p = g.nodes.size();
            g.adjacency.assign(p, std::vector<int>(p, 0));
            g.strength.assign(p, std::vector<double>(p, 0.0));
            std::vector<std::pair<std::size_t, std::size_t>> pairs;
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
            std::shuffle(pairs.begin(), pairs.end(), rng);
            const std::size_t k = std::min<std::size_t>(pairs.size(), 1 + pick(rng, 3));
            for (std::size_t e = 0; e < k; ++e) {
                auto [i, j] = pairs[e];
                if (std::bernoulli_distribution(0.5)(rng)) std::swap(i, j);
                const double s = round2(uniform(rng, 1.0, 10.0));
                g.adjacency[i][j] = 1;
                g.strength[i][j] = g.strength[j][i] = s;
            }
            return g;
        }
    }
    throw Error(ErrorCode::InvalidQuery, "unknown task");
}

std::vector<InterpretBenchRecord> generate_interpret_bench(const std::vector<QueryBenchRecord>& records,
                                                           const TopicHierarchy& h, std::uint64_t seed) {
    std::vector<InterpretBenchRecord> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        Rng rng = make_rng(seed, "interpret", i);
        InterpretBenchRecord ir;
        ir.question = r.question;
        ir.golden = r.golden;
        ir.task = r.golden.task;
        ir.method = pick_from(rng, methods_for(ir.task));
        ir.function_output = sample_tool_result(r.golden, h, rng);
        ir.template_summary = template_summary(ir.task, ir.function_output, r.golden);
        out.push_back(std::move(ir));
    }
    return out;
}

std::string to_jsonl(const std::vector<QueryBenchRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["question"] = r.question;
        j["golden"] = ordered_json::parse(serialize_query(r.golden));
        j["template_id"] = r.template_id;
        j["seed"] = r.seed;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<QueryBenchRecord> parse_bench_jsonl(std::string_view text) {
    std::vector<QueryBenchRecord> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("question") || !j.contains("golden"))
            throw Error(ErrorCode::MalformedJson, "bench line " + std::to_string(line_no) + " is not a record");
        QueryBenchRecord r;
        r.question = j["question"].get<std::string>();
        r.golden = parse_query_json(j["golden"].dump());
        r.template_id = j.value("template_id", std::size_t{0});
        r.seed = j.value("seed", std::uint64_t{0});
        out.push_back(std::move(r));
    }
    return out;
}

std::string to_jsonl(const std::vector<InterpretBenchRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["question"] = r.question;
        j["task"] = std::string(to_string(r.task));
        j["method"] = std::string(to_string(r.method));
        j["function_output"] = ordered_json::parse(tool_result_to_json(r.function_output));
        j["template_summary"] = r.template_summary;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace causalqa
