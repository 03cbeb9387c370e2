#include <doctest.h>

#include "causalqa/parser.hpp"
#include "fixtures.hpp"

using namespace causalqa;

namespace {

ErrorCode interpret_error(std::string_view q) {
    try {
        interpret(q);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error for: " << q);
    return ErrorCode::InvalidQuery;
}

}  // namespace

TEST_SUITE("parser") {
    TEST_CASE("reference questions reproduce their JSON exactly") {
        for (const auto& c : fixtures::kReferenceQuestions) {
            CAPTURE(c.question);
            CHECK(serialize_query(interpret(c.question)) == c.expected_json);
        }
    }

    TEST_CASE("classification") {
        CHECK(classify_task(fixtures::kReferenceQuestions[3].question).task == Task::MA);
        CHECK(classify_task(fixtures::kReferenceQuestions[4].question).task == Task::OPO);
        CHECK(classify_task("Learn all causal relationships in a.csv.").task == Task::CGL);
        CHECK_THROWS_AS(classify_task("   "), Error);
    }

    TEST_CASE("dataset extraction") {
        CHECK(extract_dataset(fixtures::kReferenceQuestions[0].question) == "disaster_risk_reduction.csv");
        CHECK(extract_dataset("compare a.csv and b.csv") == "a.csv");
        try {
            extract_dataset("what drives sales?");
            FAIL("expected DatasetNotFound");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DatasetNotFound);
        }
    }

    TEST_CASE("parenthesized aliases win over long forms") {
        std::vector<std::string> names;
        for (const auto& m : extract_variables(fixtures::kReferenceQuestions[1].question)) names.push_back(m.name);
        CHECK(names == std::vector<std::string>{"labor_participation_rate", "wage_increase"});
    }

    TEST_CASE("known columns anchor variable mentions") {
        ParseContext ctx;
        ctx.known_columns = std::vector<std::string>{"x", "y"};
        std::vector<std::string> names;
        for (const auto& m : extract_variables("effect of X on Y", ctx)) names.push_back(m.name);
        CHECK(names == std::vector<std::string>{"x", "y"});

        ctx.known_columns = std::vector<std::string>{"building_code_compliance_rate"};
        names.clear();
        for (const auto& m : extract_variables("is building code compliance rate relevant", ctx))
            names.push_back(m.name);
        CHECK(names == std::vector<std::string>{"building_code_compliance_rate"});
    }

    TEST_CASE("conditions") {
        const auto hte = extract_conditions(fixtures::kReferenceQuestions[2].question);
        REQUIRE(hte.size() == 1);
        CHECK(hte[0] == ConditionClause{"readiness_index", 0.5});
        const auto opo = extract_conditions(fixtures::kReferenceQuestions[4].question);
        REQUIRE(opo.size() == 1);
        CHECK(opo[0] == ConditionClause{"poverty_ratio", 0.32});
        CHECK(extract_conditions("no condition here").empty());
    }

    TEST_CASE("frame rule binds treatment and response") {
        const auto q = interpret("effect of a on b in d.csv");
        CHECK(q.task == Task::ATE);
        CHECK(q.treatment == "a");
        CHECK(q.response == "b");
    }

    TEST_CASE("dataset token and punctuation stop the cue search") {
        const auto q = interpret("According to sales.csv, how should price_level be set to maximize revenue "
                                 "when season_index = 2?");
        CHECK(q.task == Task::OPO);
        CHECK(q.treatment == "price_level");
        CHECK(q.response == "revenue");
    }

    TEST_CASE("snake identifiers do not fire task cues") {
        const auto q = interpret("What is the average effect of policy_lapse_rate on claim_count in insurance.csv?");
        CHECK(q.task == Task::ATE);
        CHECK(q.treatment == "policy_lapse_rate");
    }

    TEST_CASE("failures") {
        CHECK(interpret_error("hello") == ErrorCode::InterpretationFailed);
        CHECK(interpret_error("") == ErrorCode::EmptyQuestion);
        CHECK(interpret_error("What is the effect of a on b?") == ErrorCode::DatasetNotFound);
    }
}
