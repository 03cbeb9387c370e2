#include "causalqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "causalqa/text.hpp"

namespace causalqa {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string normalize_identifier(std::string_view s) {
    std::string out = to_lower(s);
    std::replace(out.begin(), out.end(), '_', ' ');
    return std::string(trim(out));
}

bool boundary_substring(const std::string& needle, const std::string& hay) {
    for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
        const std::size_t end = pos + needle.size();
        if ((pos == 0 || hay[pos - 1] == ' ') && (end == hay.size() || hay[end] == ' ')) return true;
    }
    return false;
}

bool slot_match(const std::optional<std::string>& p, const std::optional<std::string>& g) {
    return p && g && soft_match(*p, *g);
}

bool nodes_match(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    return std::all_of(gold.begin(), gold.end(), [&](const std::string& g) {
        return std::any_of(pred.begin(), pred.end(), [&](const std::string& p) { return soft_match(p, g); });
    });
}

bool conditions_match(const std::vector<ConditionClause>& pred, const std::vector<ConditionClause>& gold) {
    return std::all_of(gold.begin(), gold.end(), [&](const ConditionClause& g) {
        return std::any_of(pred.begin(), pred.end(), [&](const ConditionClause& p) {
            return soft_match(p.variable, g.variable) && scalar_equal(p.value, g.value, 1e-9);
        });
    });
}

bool is_all_variables(const std::vector<std::string>& nodes) {
    return nodes.size() == 1 && nodes.front() == kAllVariables;
}

// Covariate names: queried condition variables first, then other topic
// variables, then s1, s2, ... for whatever is still missing.
std::vector<std::string> covariate_names(const CausalQuery& q, const TopicHierarchy* h, std::size_t count) {
    std::vector<std::string> names;
    std::set<std::string> used;
    for (const auto& v : q.variables()) used.insert(v);
    for (const auto& c : q.conditions) names.push_back(c.variable);
    if (h) {
        const std::string stem = q.dataset.substr(0, q.dataset.rfind('.'));
        if (const TopicNode* topic = h->find(stem))
            for (const auto& v : topic->variables)
                if (names.size() < count && !used.count(v.name)) names.push_back(v.name);
    }
    for (int k = 1; names.size() < count; ++k) {
        const std::string s = "s" + std::to_string(k);
        if (!used.count(s)) names.push_back(s);
    }
    return names;
}

// Moves each pinned covariate's mean to within one standard deviation of its
// queried value.
void centre_on_conditions(EffectParams& params, const std::vector<ConditionClause>& conditions, Rng& rng) {
    for (const auto& c : conditions) {
        const auto it = std::find(params.names.begin(), params.names.end(), c.variable);
        const auto* value = std::get_if<double>(&c.value);
        if (it == params.names.end() || !value) continue;
        const auto j = static_cast<std::size_t>(it - params.names.begin());
        params.mu[j] = *value + params.sigma[j] * uniform(rng, -1.0, 1.0);
    }
}

// Named nodes as given; all_variables becomes the topic's variables, or
// x1..x5 for an unknown topic.
std::vector<std::string> graph_nodes_for(const CausalQuery& q, const TopicHierarchy* h) {
    if (!is_all_variables(q.nodes)) return q.nodes;
    std::vector<std::string> out;
    if (h) {
        const std::string stem = q.dataset.substr(0, q.dataset.rfind('.'));
        if (const TopicNode* topic = h->find(stem)) {
            for (const auto& v : topic->variables) out.push_back(v.name);
            return out;
        }
    }
    for (int k = 1; k <= 5; ++k) out.push_back("x" + std::to_string(k));
    return out;
}

ordered_json rates_json(const TaskRates& r) {
    ordered_json j;
    j["cases"] = r.cases;
    j["pass"] = r.pass();
    j["relevance"] = r.relevance();
    j["win"] = r.win();
    return j;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

bool soft_match(std::string_view predicted, std::string_view gold) {
    const std::string p = normalize_identifier(predicted);
    const std::string g = normalize_identifier(gold);
    if (p.empty() || g.empty()) return p == g;
    return boundary_substring(p, g) || boundary_substring(g, p);
}

KeyAccuracy key_accuracy(const std::vector<std::optional<CausalQuery>>& predictions,
                         const std::vector<CausalQuery>& golds) {
    if (predictions.size() != golds.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                                   std::to_string(golds.size()) + " golds");
    KeyAccuracy acc;
    for (auto key : kQueryKeys) acc[std::string(key)];
    auto score = [&](std::string_view key, bool ok) {
        auto& s = acc.find(key)->second;
        ++s.total;
        if (ok) ++s.correct;
    };
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const CausalQuery& g = golds[i];
        const auto& p = predictions[i];
        score("causal_task", p && p->task == g.task);
        score("dataset", p && p->dataset == g.dataset);
        if (!g.nodes.empty()) score("nodes", p && nodes_match(p->nodes, g.nodes));
        if (g.treatment) score("treatment", p && slot_match(p->treatment, g.treatment));
        if (g.response) score("response", p && slot_match(p->response, g.response));
        if (g.mediator) score("mediator", p && slot_match(p->mediator, g.mediator));
        if (!g.conditions.empty()) score("condition", p && conditions_match(p->conditions, g.conditions));
    }
    return acc;
}

KeyAccuracy key_accuracy(const std::vector<CausalQuery>& predictions, const std::vector<CausalQuery>& golds) {
    return key_accuracy(std::vector<std::optional<CausalQuery>>(predictions.begin(), predictions.end()), golds);
}

double effect_tolerance(double truth) { return std::max(0.1, 0.05 * std::abs(truth)); }

bool effect_within(double estimate, double truth) { return std::abs(estimate - truth) <= effect_tolerance(truth); }

double skeleton_f1(const GraphResult& estimate, const GraphTruth& truth) {
    using Pair = std::pair<std::string, std::string>;
    auto key = [](const std::string& a, const std::string& b) { return a < b ? Pair{a, b} : Pair{b, a}; };
    std::set<Pair> est, tru;
    for (const auto& e : estimate.edges()) est.insert(key(estimate.nodes.at(e.from), estimate.nodes.at(e.to)));
    for (std::size_t i = 0; i < truth.edges.size(); ++i)
        for (std::size_t j = 0; j < truth.edges[i].size(); ++j)
            if (truth.edges[i][j]) tru.insert(key(truth.nodes.at(i), truth.nodes.at(j)));
    if (est.empty() && tru.empty()) return 1.0;
    std::size_t hit = 0;
    for (const auto& p : est) hit += tru.count(p);
    return 2.0 * static_cast<double>(hit) / static_cast<double>(est.size() + tru.size());
}

CaseData make_case_data(const CausalQuery& golden, const TopicHierarchy* h, std::uint64_t seed, int rows) {
    Rng rng(seed);
    CaseData out;
    switch (golden.task) {
        case Task::CGL: {
            const auto names = graph_nodes_for(golden, h);
            auto g = gen_cgl(static_cast<int>(names.size()), rows, kDefaultMaskProbability, rng, names);
            out.data = std::move(g.data);
            out.truth = std::move(g.truth);
            break;
        }
        case Task::ATE:
        case Task::HTE:
        case Task::OPO: {
            const auto names = covariate_names(golden, h, kCaseCovariates);
            EffectParams params = sample_effect_params(static_cast<int>(names.size()), rng, names);
            centre_on_conditions(params, golden.conditions, rng);
            out.data = simulate_effect(params, rows, rng, *golden.treatment, *golden.response);
            if (golden.task == Task::ATE)
                out.truth = AteTruth{true_ate(params)};
            else if (golden.task == Task::HTE)
                out.truth = HteTruth{golden.conditions, true_hte(params, golden.conditions)};
            else
                out.truth = single_stage_policy(params, golden.conditions);
            break;
        }
        case Task::MA: {
            MediationColumns cols{*golden.treatment, *golden.mediator, *golden.response};
            auto m = gen_mediation(rows, rng, cols);
            out.data = std::move(m.data);
            out.truth = m.truth;
            break;
        }
    }
    return out;
}

bool result_wins(const ToolResult& result, const GoldenLabel& truth) {
    if (const auto* t = std::get_if<GraphTruth>(&truth)) {
        const auto* g = std::get_if<GraphResult>(&result);
        return g && skeleton_f1(*g, *t) >= kMinSkeletonF1;
    }
    if (const auto* t = std::get_if<AteTruth>(&truth)) {
        const auto* e = std::get_if<EffectResult>(&result);
        return e && effect_within(e->value, t->value);
    }
    if (const auto* t = std::get_if<HteTruth>(&truth)) {
        const auto* e = std::get_if<EffectResult>(&result);
        return e && effect_within(e->value, t->value);
    }
    if (const auto* t = std::get_if<MediationTruth>(&truth)) {
        const auto* m = std::get_if<MediationResult>(&result);
        return m && effect_within(m->total, t->total) && effect_within(m->direct, t->direct) &&
               effect_within(m->indirect, t->indirect);
    }
    const auto& t = std::get<PolicyTruth>(truth);
    const auto* a = std::get_if<ActionResult>(&result);
    return a && scalar_equal(a->level, t.action);
}

EvalReport end_to_end(const std::vector<QueryBenchRecord>& records, const PipelineFn& pipeline,
                      const EndToEndConfig& config) {
    EvalReport report;
    report.seed = config.seed;
    report.rows = config.rows;
    std::vector<std::optional<CausalQuery>> intents;
    std::vector<CausalQuery> golds;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        CaseTrace trace;
        trace.index = i;
        trace.task = rec.golden.task;
        trace.question = rec.question;
        std::optional<CausalQuery> intent;
        try {
            const CaseData cd = make_case_data(rec.golden, config.hierarchy, derive_seed(config.seed, "case", i),
                                               config.rows);
            trace.truth_json = golden_to_json(cd.truth);
            try {
                const PipelineOutput out = pipeline(rec.question, cd.data);
                intent = out.intent;
                trace.pass = true;
                trace.relevance = out.intent.task == rec.golden.task;
                trace.win = trace.relevance && result_wins(out.result, cd.truth);
                trace.result_json = tool_result_to_json(out.result);
                trace.interpretation = out.interpretation.text;
            } catch (const PipelineError& e) {
                intent = e.intent();
                throw;
            }
        } catch (const Error& e) {
            trace.error = std::string(to_string(stage_of(e.code()))) + ": " + e.what();
        } catch (const std::exception& e) {
            trace.error = std::string("internal: ") + e.what();
        }
        if (intent) trace.intent_json = serialize_query(*intent);

        auto& r = report.rates[trace.task];
        ++r.cases;
        r.passed += trace.pass;
        r.relevant += trace.relevance;
        r.won += trace.win;
        intents.push_back(std::move(intent));
        golds.push_back(rec.golden);
        report.cases.push_back(std::move(trace));
    }
    report.keys = key_accuracy(intents, golds);
    return report;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["seed"] = report.seed;
    j["rows"] = report.rows;
    ordered_json keys = ordered_json::object();
    for (auto key : kQueryKeys) {
        const auto& s = report.keys.find(key);
        if (s == report.keys.end() || s->second.total == 0) continue;
        keys[std::string(key)] = {{"accuracy", s->second.accuracy()}, {"count", s->second.total}};
    }
    j["extraction"] = keys;
    ordered_json rates = ordered_json::object();
    for (Task t : kAllTasks)
        if (auto it = report.rates.find(t); it != report.rates.end()) rates[std::string(to_string(t))] = rates_json(it->second);
    j["end_to_end"] = rates;
    ordered_json cases = ordered_json::array();
    for (const auto& c : report.cases) {
        ordered_json cj;
        cj["index"] = c.index;
        cj["task"] = std::string(to_string(c.task));
        cj["question"] = c.question;
        cj["pass"] = c.pass;
        cj["relevance"] = c.relevance;
        cj["win"] = c.win;
        cj["intent"] = c.intent_json.empty() ? ordered_json() : ordered_json::parse(c.intent_json);
        cj["result"] = c.result_json.empty() ? ordered_json() : ordered_json::parse(c.result_json);
        cj["truth"] = c.truth_json.empty() ? ordered_json() : ordered_json::parse(c.truth_json);
        cj["interpretation"] = c.interpretation;
        if (!c.error.empty()) cj["error"] = c.error;
        cases.push_back(std::move(cj));
    }
    j["cases"] = std::move(cases);
    return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::vector<Task> tasks;
    for (Task t : kAllTasks)
        if (report.rates.count(t)) tasks.push_back(t);
    std::ostringstream out;
    char buf[64];
    auto row = [&](const std::string& label, const std::function<std::string(Task)>& cell) {
        std::snprintf(buf, sizeof buf, "%-12s", label.c_str());
        out << buf;
        for (Task t : tasks) {
            std::snprintf(buf, sizeof buf, "%8s", cell(t).c_str());
            out << buf;
        }
        out << "\n";
    };
    row("", [](Task t) { return std::string(to_string(t)); });
    row("cases", [&](Task t) { return std::to_string(report.rates.at(t).cases); });
    row("pass", [&](Task t) { return fmt3(report.rates.at(t).pass()); });
    row("relevance", [&](Task t) { return fmt3(report.rates.at(t).relevance()); });
    row("win", [&](Task t) { return fmt3(report.rates.at(t).win()); });
    out << "\n";
    for (auto key : kQueryKeys) {
        const auto s = report.keys.find(key);
        if (s == report.keys.end() || s->second.total == 0) continue;
        std::snprintf(buf, sizeof buf, "%-12s%8s  (%zu)\n", std::string(key).c_str(), fmt3(s->second.accuracy()).c_str(),
                      s->second.total);
        out << buf;
    }
    return out.str();
}

}  // namespace causalqa
