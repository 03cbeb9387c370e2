#include "causalqa/intent.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "causalqa/text.hpp"

namespace causalqa {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

Category category_of(Task task) {
    switch (task) {
    case Task::CGL: return Category::CSL;
    case Task::OPO: return Category::CPL;
    default: return Category::CEL;
    }
}

std::string_view to_string(Task task) {
    switch (task) {
    case Task::CGL: return "CGL";
    case Task::ATE: return "ATE";
    case Task::HTE: return "HTE";
    case Task::MA: return "MA";
    case Task::OPO: return "OPO";
    }
    return "?";
}

std::string_view to_string(Category category) {
    switch (category) {
    case Category::CSL: return "CSL";
    case Category::CEL: return "CEL";
    case Category::CPL: return "CPL";
    }
    return "?";
}

std::optional<Task> task_from_string(std::string_view name) {
    for (Task t : kAllTasks)
        if (to_string(t) == name) return t;
    return std::nullopt;
}

Scalar make_scalar(std::string_view text) {
    std::string_view t = trim(text);
    if (!t.empty()) {
        std::string_view digits = t.front() == '+' ? t.substr(1) : t;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && std::isfinite(v)) return v;
    }
    return std::string(text);
}

std::string format_scalar(const Scalar& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    double v = std::get<double>(value);
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool scalar_equal(const Scalar& a, const Scalar& b, double tol) {
    if (a.index() != b.index()) return false;
    if (const auto* x = std::get_if<double>(&a)) return std::abs(*x - std::get<double>(b)) <= tol;
    return std::get<std::string>(a) == std::get<std::string>(b);
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

namespace {

bool is_filename(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

struct SlotRule {
    bool nodes = false;
    bool treatment = false;
    bool response = false;
    bool mediator = false;
    bool condition = false;
};

SlotRule required_slots(Task task) {
    switch (task) {
    case Task::CGL: return {true, false, false, false, false};
    case Task::ATE: return {false, true, true, false, false};
    case Task::HTE: return {false, true, true, false, true};
    case Task::MA: return {false, true, true, true, false};
    case Task::OPO: return {false, true, true, false, true};
    }
    return {};
}

}  // namespace

std::vector<std::string> CausalQuery::variables() const {
    std::vector<std::string> out;
    for (const auto& n : nodes)
        if (n != kAllVariables) out.push_back(n);
    for (const auto* slot : {&treatment, &response, &mediator})
        if (*slot) out.push_back(**slot);
    for (const auto& c : conditions) out.push_back(c.variable);
    return out;
}

std::vector<Violation> validate_query(const CausalQuery& q) {
    std::vector<Violation> out;
    const std::string task(to_string(q.task));
    auto missing = [&](const std::string& slot) {
        out.push_back({ViolationKind::MissingRequiredKey, slot, task + " requires " + slot});
    };
    auto unexpected = [&](const std::string& slot) {
        out.push_back({ViolationKind::UnexpectedKey, slot, task + " does not take " + slot});
    };
    auto check_ident = [&](const std::string& slot, const std::string& value) {
        if (!is_identifier(value))
            out.push_back({ViolationKind::InvalidIdentifier, slot, "'" + value + "' is not an identifier"});
    };

    if (q.dataset.empty())
        missing("dataset");
    else if (!is_filename(q.dataset))
        out.push_back({ViolationKind::InvalidIdentifier, "dataset", "'" + q.dataset + "' is not a file name"});

    const SlotRule rule = required_slots(q.task);
    if (rule.nodes) {
        if (q.nodes.empty())
            out.push_back({ViolationKind::EmptyNodes, "nodes", "CGL needs at least one node or all_variables"});
        for (const auto& n : q.nodes) check_ident("nodes", n);
    } else if (!q.nodes.empty()) {
        unexpected("nodes");
    }

    auto check_role = [&](bool required, const std::optional<std::string>& value, const std::string& slot) {
        if (required && !value) missing(slot);
        if (!required && value) unexpected(slot);
        if (value) check_ident(slot, *value);
    };
    check_role(rule.treatment, q.treatment, "treatment");
    check_role(rule.response, q.response, "response");
    check_role(rule.mediator, q.mediator, "mediator");

    if (rule.condition && q.conditions.empty()) missing("condition");
    if (!rule.condition && !q.conditions.empty()) unexpected("condition");
    for (const auto& c : q.conditions) check_ident("condition", c.variable);
    return out;
}

std::string serialize_query(const CausalQuery& q) {
    if (auto v = validate_query(q); !v.empty())
        throw Error(ErrorCode::InvalidQuery, v.front().rule);

    ordered_json j;
    j["causal_problem"] = {std::string(to_string(category_of(q.task))), std::string(to_string(q.task))};
    j["dataset"] = {q.dataset};
    if (q.task == Task::CGL) {
        j["nodes"] = q.nodes;
    } else {
        j["treatment"] = {*q.treatment};
        j["response"] = {*q.response};
        if (q.mediator) j["mediator"] = {*q.mediator};
        if (!q.conditions.empty()) {
            ordered_json conds = ordered_json::array();
            for (const auto& c : q.conditions) {
                ordered_json value;
                if (const auto* d = std::get_if<double>(&c.value))
                    value = *d;
                else
                    value = std::get<std::string>(c.value);
                conds.push_back(ordered_json::array({c.variable, value}));
            }
            j["condition"] = conds;
        }
    }
    return j.dump();
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedJson, what); }

// Accepts "x" or ["x"].
std::string single_string(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array() && v.size() == 1 && v[0].is_string()) return v[0].get<std::string>();
    malformed("'" + key + "' must be a string or a one-element list of strings");
}

std::vector<std::string> string_list(const json& v) {
    std::vector<std::string> out;
    auto split = [&](const std::string& s) {
        std::size_t start = 0;
        while (start <= s.size()) {
            std::size_t comma = s.find(',', start);
            if (comma == std::string::npos) comma = s.size();
            std::string_view part = trim(std::string_view(s).substr(start, comma - start));
            if (!part.empty()) out.emplace_back(part);
            start = comma + 1;
        }
    };
    if (v.is_string()) {
        split(v.get<std::string>());
    } else if (v.is_array()) {
        for (const auto& e : v) {
            if (!e.is_string()) malformed("'nodes' entries must be strings");
            out.push_back(e.get<std::string>());
        }
    } else {
        malformed("'nodes' must be a list of strings");
    }
    return out;
}

Scalar json_scalar(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return make_scalar(v.get<std::string>());
    malformed("condition values must be numbers or strings");
}

std::vector<ConditionClause> condition_list(const json& v) {
    std::vector<ConditionClause> out;
    if (v.is_object()) {
        for (auto it = v.begin(); it != v.end(); ++it) out.push_back({it.key(), json_scalar(it.value())});
        return out;
    }
    if (!v.is_array()) malformed("'condition' must be a list of [name, value] pairs");
    for (const auto& e : v) {
        if (e.is_array() && e.size() == 2 && e[0].is_string())
            out.push_back({e[0].get<std::string>(), json_scalar(e[1])});
        else if (e.is_object() && e.contains("variable") && e.contains("value") && e["variable"].is_string())
            out.push_back({e["variable"].get<std::string>(), json_scalar(e["value"])});
        else
            malformed("'condition' entries must be [name, value] pairs");
    }
    return out;
}

}  // namespace

CausalQuery parse_query_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(e.what());
    }
    if (!j.is_object()) malformed("query must be a JSON object");

    static const std::set<std::string> known = {"causal_problem", "dataset",  "nodes",    "treatment",
                                                "response",       "mediator", "condition"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) malformed("unknown key '" + it.key() + "'");

    if (!j.contains("causal_problem"))
        throw Error(ErrorCode::MissingRequiredKey, "query is missing 'causal_problem'");
    const json& cp = j["causal_problem"];
    std::string task_name;
    std::optional<std::string> category_name;
    if (cp.is_string()) {
        task_name = cp.get<std::string>();
    } else if (cp.is_array() && !cp.empty() && cp.size() <= 2 && cp.back().is_string()) {
        task_name = cp.back().get<std::string>();
        if (cp.size() == 2) {
            if (!cp[0].is_string()) malformed("causal_problem entries must be strings");
            category_name = cp[0].get<std::string>();
        }
    } else {
        malformed("'causal_problem' must be [category, task]");
    }
    auto task = task_from_string(task_name);
    if (!task) throw Error(ErrorCode::UnknownTask, "unknown causal task '" + task_name + "'");
    if (category_name && *category_name != to_string(category_of(*task)))
        throw Error(ErrorCode::InvalidQuery, "category " + *category_name + " does not match task " + task_name);

    CausalQuery q;
    q.task = *task;
    const SlotRule rule = required_slots(q.task);
    auto require = [&](bool needed, const char* key) {
        if (needed && !j.contains(key))
            throw Error(ErrorCode::MissingRequiredKey, task_name + " query is missing '" + key + "'");
    };
    require(true, "dataset");
    require(rule.nodes, "nodes");
    require(rule.treatment, "treatment");
    require(rule.response, "response");
    require(rule.mediator, "mediator");
    require(rule.condition, "condition");

    q.dataset = single_string(j["dataset"], "dataset");
    if (j.contains("nodes")) q.nodes = string_list(j["nodes"]);
    if (j.contains("treatment")) q.treatment = single_string(j["treatment"], "treatment");
    if (j.contains("response")) q.response = single_string(j["response"], "response");
    if (j.contains("mediator")) q.mediator = single_string(j["mediator"], "mediator");
    if (j.contains("condition")) q.conditions = condition_list(j["condition"]);

    if (auto v = validate_query(q); !v.empty()) throw Error(ErrorCode::InvalidQuery, v.front().rule);
    return q;
}

// ---------------------------------------------------------------------------

std::vector<GraphResult::Edge> GraphResult::edges() const {
    std::vector<Edge> out;
    const std::size_t n = adjacency.size();
    auto strength_of = [&](std::size_t i, std::size_t j) {
        if (strength.size() != n || strength[i].size() != n) return 0.0;
        return std::max(strength[i][j], strength[j][i]);
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ij = adjacency[i][j] != 0;
            const bool ji = adjacency[j][i] != 0;
            if (ij && ji)
                out.push_back({i, j, false, strength_of(i, j)});
            else if (ij)
                out.push_back({i, j, true, strength_of(i, j)});
            else if (ji)
                out.push_back({j, i, true, strength_of(i, j)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        if (a.from != b.from) return a.from < b.from;
        return a.to < b.to;
    });
    return out;
}

bool result_matches_task(Task task, const ToolResult& result) {
    switch (task) {
    case Task::CGL: return std::holds_alternative<GraphResult>(result);
    case Task::ATE:
    case Task::HTE: return std::holds_alternative<EffectResult>(result);
    case Task::MA: return std::holds_alternative<MediationResult>(result);
    case Task::OPO: return std::holds_alternative<ActionResult>(result);
    }
    return false;
}

std::string tool_result_to_json(const ToolResult& result) {
    ordered_json j;
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, GraphResult>) {
                j["type"] = "graph";
                j["nodes"] = r.nodes;
                j["adjacency"] = r.adjacency;
                if (!r.strength.empty()) j["strength"] = r.strength;
            } else if constexpr (std::is_same_v<T, EffectResult>) {
                j["type"] = "effect";
                j["value"] = r.value;
            } else if constexpr (std::is_same_v<T, MediationResult>) {
                j["type"] = "mediation";
                j["total"] = r.total;
                j["direct"] = r.direct;
                j["indirect"] = r.indirect;
            } else {
                j["type"] = "action";
                if (const auto* d = std::get_if<double>(&r.level))
                    j["level"] = *d;
                else
                    j["level"] = std::get<std::string>(r.level);
            }
        },
        result);
    return j.dump();
}

ToolResult tool_result_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
        const std::string type = j.at("type").get<std::string>();
        if (type == "graph") {
            GraphResult g;
            g.nodes = j.at("nodes").get<std::vector<std::string>>();
            g.adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
            if (j.contains("strength")) g.strength = j["strength"].get<std::vector<std::vector<double>>>();
            if (g.adjacency.size() != g.nodes.size()) malformed("adjacency size does not match nodes");
            return g;
        }
        if (type == "effect") return EffectResult{j.at("value").get<double>()};
        if (type == "mediation")
            return MediationResult{j.at("total").get<double>(), j.at("direct").get<double>(),
                                   j.at("indirect").get<double>()};
        if (type == "action") return ActionResult{json_scalar(j.at("level"))};
        malformed("unknown result type '" + type + "'");
    } catch (const json::exception& e) {
        malformed(e.what());
    }
}

}  // namespace causalqa
