#include <doctest.h>

#include <nlohmann/json.hpp>

#include "causalqa/eval.hpp"

using namespace causalqa;

namespace {

const TopicHierarchy& shipped() {
    static const TopicHierarchy h = load_hierarchy(CAUSALQA_HIERARCHY);
    return h;
}

CausalQuery ate(std::string dataset, std::string t, std::string y) {
    CausalQuery q;
    q.task = Task::ATE;
    q.dataset = std::move(dataset);
    q.treatment = std::move(t);
    q.response = std::move(y);
    return q;
}

}  // namespace

TEST_SUITE("eval") {
    TEST_CASE("soft match") {
        CHECK(soft_match("satisfaction", "satisfaction_rate"));
        CHECK(soft_match("customer_satisfaction_rate", "satisfaction_rate"));
        CHECK(soft_match("rate", "satisfaction_rate"));
        CHECK_FALSE(soft_match("ration", "satisfaction_rate"));
        CHECK(soft_match("Satisfaction Rate", "satisfaction_rate"));
        CHECK(soft_match("a_b", "a_b"));
        CHECK(soft_match("satisfaction_rate", "satisfaction") == soft_match("satisfaction", "satisfaction_rate"));
    }

    TEST_CASE("key accuracy") {
        const std::vector<CausalQuery> golds{ate("a.csv", "x", "y"), ate("b.csv", "p", "q")};
        const auto same = key_accuracy(golds, golds);
        for (const auto& [key, score] : same)
            if (score.total) CHECK(score.accuracy() == 1.0);
        CHECK(same.at("treatment").total == 2);
        CHECK(same.at("mediator").total == 0);

        auto wrong = golds;
        wrong[0].task = Task::HTE;
        const auto acc = key_accuracy(wrong, golds);
        CHECK(acc.at("causal_task").correct == 1);
        CHECK(acc.at("dataset").correct == 2);

        const auto missing = key_accuracy(std::vector<std::optional<CausalQuery>>{std::nullopt, golds[1]}, golds);
        CHECK(missing.at("dataset").correct == 1);

        CHECK_THROWS_AS(key_accuracy(std::vector<CausalQuery>{golds[0]}, golds), Error);
    }

    TEST_CASE("tolerances and wins") {
        CHECK(effect_tolerance(1.0) == 0.1);
        CHECK(effect_tolerance(10.0) == doctest::Approx(0.5));
        CHECK(effect_within(1.09, 1.0));
        CHECK_FALSE(effect_within(1.11, 1.0));
        CHECK(result_wins(EffectResult{2.0}, AteTruth{2.05}));
        CHECK_FALSE(result_wins(MediationResult{7.0, 1.0, 6.0}, AteTruth{7.0}));
        CHECK(result_wins(MediationResult{7.0, 1.0, 6.0}, MediationTruth{1.0, 6.0, 7.0}));
        CHECK_FALSE(result_wins(MediationResult{7.0, 1.5, 5.5}, MediationTruth{1.0, 6.0, 7.0}));
        PolicyTruth p;
        p.action = 1.0;
        CHECK(result_wins(ActionResult{1.0}, p));
        CHECK_FALSE(result_wins(ActionResult{0.0}, p));
    }

    TEST_CASE("skeleton F1") {
        GraphTruth t{{"a", "b", "c"}, {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}};
        GraphResult g;
        g.nodes = {"c", "b", "a"};  // matched by name, not position
        g.adjacency = {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}};
        CHECK(skeleton_f1(g, t) == 1.0);
        g.adjacency = {{0, 1, 1}, {0, 0, 0}, {0, 0, 0}};
        CHECK(skeleton_f1(g, t) == doctest::Approx(0.5));
        GraphTruth none{{"a", "b"}, {{0, 0}, {0, 0}}};
        GraphResult empty;
        empty.nodes = {"a", "b"};
        empty.adjacency = {{0, 0}, {0, 0}};
        CHECK(skeleton_f1(empty, none) == 1.0);
    }

    TEST_CASE("case data uses the query's names") {
        CausalQuery q = ate("employment.csv", "labor_participation_rate", "wage_increase");
        q.task = Task::HTE;
        q.conditions = {{"unemployment_rate", 0.4}};
        const CaseData cd = make_case_data(q, &shipped(), 3, 500);
        CHECK(cd.data.find("labor_participation_rate"));
        CHECK(cd.data.find("wage_increase"));
        CHECK(cd.data.find("unemployment_rate"));
        CHECK(cd.data.cols() == kCaseCovariates + 2);
        CHECK(std::holds_alternative<HteTruth>(cd.truth));

        CausalQuery g;
        g.task = Task::CGL;
        g.dataset = "employment.csv";
        g.nodes = {"all_variables"};
        CHECK(make_case_data(g, &shipped(), 3, 200).data.cols() == shipped().find("employment")->variables.size());
        CHECK(make_case_data(g, nullptr, 3, 200).data.cols() == 5);
    }

    TEST_CASE("a pipeline that always fails scores zero") {
        const auto records = generate_retrieval_bench(2, shipped(), 1);
        const PipelineFn broken = [](const std::string&, const TabularDataset&) -> PipelineOutput {
            throw Error(ErrorCode::EstimationFailed, "broken");
        };
        const EvalReport r = end_to_end(records, broken, {1, 300, &shipped()});
        for (const auto& [task, rates] : r.rates) {
            CHECK(rates.cases == 2);
            CHECK(rates.pass() == 0.0);
            CHECK(rates.relevance() == 0.0);
            CHECK(rates.win() == 0.0);
        }
        CHECK(r.cases.front().error.rfind("estimation: ", 0) == 0);
        CHECK(r.keys.at("causal_task").correct == 0);
    }

    TEST_CASE("report formats") {
        const auto records = generate_retrieval_bench(2, shipped(), 5);
        const PipelineFn real = [](const std::string& q, const TabularDataset& d) { return run_pipeline(q, d); };
        const EvalReport r = end_to_end(records, real, {5, 2000, &shipped()});
        const auto j = nlohmann::json::parse(report_to_json(r));
        CHECK(j["end_to_end"].size() == 5);
        CHECK(j["cases"].size() == 10);
        for (const auto& [task, rates] : j["end_to_end"].items()) {
            CHECK(rates["win"].get<double>() <= rates["relevance"].get<double>());
            CHECK(rates["relevance"].get<double>() <= rates["pass"].get<double>());
        }
        const std::string table = report_table(r);
        CHECK(table.find("CGL") != std::string::npos);
        CHECK(table.find("relevance") != std::string::npos);
        CHECK(report_to_json(r) == report_to_json(end_to_end(records, real, {5, 2000, &shipped()})));
    }
}
