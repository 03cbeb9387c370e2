#include <doctest.h>

#include <nlohmann/json.hpp>

#include "causalqa/datagen.hpp"
#include "causalqa/pipeline.hpp"
#include "stub_server.hpp"

using namespace causalqa;

namespace {

TabularDataset employment(std::uint64_t seed) {
    Rng rng(seed);
    EffectColumns cols;
    cols.covariates = {"unemployment_rate", "job_vacancy_count"};
    cols.treatment = "labor_participation_rate";
    cols.response = "wage_increase";
    return gen_effect(2, 4000, rng, cols).data;
}

LlmBackendConfig stub_config(const StubServer& s) {
    LlmBackendConfig cfg;
    cfg.endpoint = s.endpoint();
    cfg.timeout = std::chrono::seconds(5);
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("question to interpretation") {
        const auto out = run_pipeline(
            "What is the average treatment effect of labor_participation_rate on wage_increase in employment.csv?",
            employment(1));
        CHECK(out.intent.task == Task::ATE);
        CHECK(out.method == MethodId::DoublyRobust);
        CHECK(std::holds_alternative<EffectResult>(out.result));
        CHECK(out.interpretation.text.find("average treatment effect") != std::string::npos);
    }

    TEST_CASE("estimation failures keep the intent") {
        try {
            run_pipeline("What is the average treatment effect of unemployment_rate on wage_increase in employment.csv?",
                         employment(2));
            FAIL("expected a failure");
        } catch (const PipelineError& e) {
            CHECK(e.code() == ErrorCode::NonBinaryTreatment);
            CHECK(stage_of(e.code()) == Stage::Estimation);
            CHECK(e.intent().treatment == "unemployment_rate");
        }
    }

    TEST_CASE("interpretation failures are plain errors") {
        try {
            run_pipeline("hello", employment(3));
            FAIL("expected a failure");
        } catch (const PipelineError&) {
            FAIL("no intent exists yet");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InterpretationFailed);
        }
    }

    TEST_CASE("function-call replies") {
        const auto q = query_from_function_call(
            R"({"choices":[{"message":{"tool_calls":[{"function":{"name":"heterogeneous_treatment_effect","arguments":"{\"dataset\":\"a.csv\",\"treatment\":\"t\",\"response\":\"y\",\"condition\":\"age=3, region=north\"}"}}]}}]})");
        CHECK(q.task == Task::HTE);
        REQUIRE(q.conditions.size() == 2);
        CHECK(q.conditions[0] == ConditionClause{"age", 3.0});
        CHECK(q.conditions[1] == ConditionClause{"region", std::string("north")});

        const auto g = query_from_function_call(R"({"name":"causal_graph_learning","arguments":{"dataset":"a.csv"}})");
        CHECK(g.nodes == std::vector<std::string>{"all_variables"});

        CHECK_THROWS_AS(query_from_function_call("not json"), Error);
        CHECK_THROWS_AS(query_from_function_call(R"({"name":"unknown","arguments":{}})"), Error);
        CHECK_THROWS_AS(
            query_from_function_call(R"({"name":"average_treatment_effect","arguments":{"dataset":"a.csv"}})"), Error);
        CHECK(nlohmann::json::parse(interpretation_tools_json()).size() == 5);
    }

    TEST_CASE("model interpreter") {
        StubServer server(
            R"({"name":"average_treatment_effect","arguments":{"dataset":"employment.csv","treatment":"labor_participation_rate","response":"wage_increase"}})");
        PipelineOptions opt;
        opt.interpreter = stub_config(server);
        const auto out = run_pipeline("anything at all", employment(4), opt);
        CHECK(out.intent.task == Task::ATE);
        CHECK(server.last_body().find("anything at all") != std::string::npos);
    }
}
