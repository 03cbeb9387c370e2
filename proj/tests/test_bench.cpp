#include <doctest.h>

#include <set>

#include "causalqa/bench.hpp"
#include "causalqa/narrator.hpp"

using namespace causalqa;

namespace {

const TopicHierarchy& shipped() {
    static const TopicHierarchy h = load_hierarchy(CAUSALQA_HIERARCHY);
    return h;
}

ErrorCode hierarchy_error(std::string_view text) {
    try {
        parse_hierarchy(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("accepted: " << text);
    return ErrorCode::InvalidQuery;
}

}  // namespace

TEST_SUITE("bench") {
    TEST_CASE("shipped hierarchy") {
        const TopicNode* employment = shipped().find("employment");
        REQUIRE(employment);
        bool found = false;
        for (const auto& v : employment->variables)
            if (v.name == "labor_participation_rate") {
                found = true;
                CHECK(v.vtype == VarType::Continuous);
            }
        CHECK(found);
        for (const auto& t : shipped().topics) CHECK(t.variables.size() >= kMinTopicVariables);
    }

    TEST_CASE("malformed hierarchies") {
        CHECK(hierarchy_error("") == ErrorCode::MalformedHierarchy);
        CHECK(hierarchy_error(R"({"topics":[]})") == ErrorCode::MalformedHierarchy);
        const std::string vars =
            R"([{"name":"a","vtype":"continuous"},{"name":"b","vtype":"continuous"},{"name":"c","vtype":"discrete"},{"name":"d","vtype":"discrete"}])";
        CHECK_NOTHROW(parse_hierarchy(R"({"topics":[{"name":"t","variables":)" + vars + "}]}"));
        CHECK(hierarchy_error(R"({"topics":[{"name":"t","variables":)" + vars + R"(},{"name":"t","variables":)" + vars +
                              "}]}") == ErrorCode::MalformedHierarchy);
        CHECK(hierarchy_error(R"({"topics":[{"name":"t","variables":[{"name":"a","vtype":"continuous"}]}]})") ==
              ErrorCode::MalformedHierarchy);
        CHECK_THROWS_AS(load_hierarchy("/nonexistent/topics.json"), Error);
    }

    TEST_CASE("sampled queries are valid and stay inside one topic") {
        Rng rng(11);
        for (Task task : kAllTasks) {
            for (int i = 0; i < 1000; ++i) {
                const CausalQuery q = sample_query(task, shipped(), rng);
                CHECK(validate_query(q).empty());
                const TopicNode* topic = shipped().find(q.dataset.substr(0, q.dataset.size() - 4));
                REQUIRE(topic);
                std::set<std::string> names;
                for (const auto& v : topic->variables) names.insert(v.name);
                const auto vars = q.variables();
                for (const auto& v : vars) CHECK(names.count(v));
                CHECK(std::set<std::string>(vars.begin(), vars.end()).size() == vars.size());
            }
        }
    }

    TEST_CASE("ATE sample from the employment topic") {
        TopicHierarchy one;
        one.topics.push_back(*shipped().find("employment"));
        Rng rng(3);
        const CausalQuery q = sample_query(Task::ATE, one, rng);
        CHECK(q.dataset == "employment.csv");
        CHECK(q.treatment != q.response);
    }

    TEST_CASE("graph samples hit the all-variables placeholder") {
        Rng rng(5);
        int sentinel = 0;
        for (int i = 0; i < 200; ++i)
            sentinel += sample_query(Task::CGL, shipped(), rng).nodes == std::vector<std::string>{"all_variables"};
        CHECK(sentinel > 20);
        CHECK(sentinel < 120);
    }

    TEST_CASE("rendering") {
        CausalQuery q;
        q.task = Task::CGL;
        q.dataset = "employee_data.csv";
        q.nodes = {"all_variables"};
        Rng rng(1);
        CHECK(render_question(q, 0, rng) ==
              "Is there a method to discover every direct influence present in the employee_data.csv dataset?");
        CHECK_THROWS_AS(render_question(q, 99, rng), Error);

        Rng srng(2);
        for (Task task : kAllTasks)
            for (std::size_t t = 0; t < template_count(task); ++t) {
                const CausalQuery s = sample_query(task, shipped(), srng);
                const std::string text = render_question(s, t, srng);
                CHECK(text.find(s.dataset) != std::string::npos);
            }
    }

    TEST_CASE("retrieval bench size and determinism") {
        CHECK(generate_retrieval_bench(1, shipped(), 9).size() == 5);
        const auto a = generate_retrieval_bench(300, shipped(), 42);
        CHECK(a.size() == 1500);
        std::set<std::string> texts;
        for (const auto& r : a) texts.insert(r.question);
        CHECK(texts.size() == a.size());
        CHECK(to_jsonl(a) == to_jsonl(generate_retrieval_bench(300, shipped(), 42)));
        CHECK(to_jsonl(a) != to_jsonl(generate_retrieval_bench(300, shipped(), 43)));
    }

    TEST_CASE("a record's seed replays its question") {
        for (const auto& r : generate_retrieval_bench(3, shipped(), 17)) {
            Rng rng(r.seed);
            const CausalQuery q = sample_query(r.golden.task, shipped(), rng);
            CHECK(q == r.golden);
        }
    }

    TEST_CASE("bench JSONL round trip") {
        const auto a = generate_retrieval_bench(4, shipped(), 8);
        const auto b = parse_bench_jsonl(to_jsonl(a));
        REQUIRE(b.size() == a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(b[i].question == a[i].question);
            CHECK(b[i].golden == a[i].golden);
            CHECK(b[i].template_id == a[i].template_id);
            CHECK(b[i].seed == a[i].seed);
        }
        CHECK_THROWS_AS(parse_bench_jsonl("{oops\n"), Error);
    }

    TEST_CASE("interpretation bench") {
        const auto records = generate_retrieval_bench(80, shipped(), 4);
        const auto pairs = generate_interpret_bench(records, shipped(), 4);
        REQUIRE(pairs.size() == 400);
        for (const auto& p : pairs) {
            CHECK(result_matches_task(p.task, p.function_output));
            CHECK(p.template_summary == template_summary(p.task, p.function_output, p.golden));
            if (const auto* m = std::get_if<MediationResult>(&p.function_output))
                CHECK(m->total == m->direct + m->indirect);
        }
        CHECK(to_jsonl(pairs) == to_jsonl(generate_interpret_bench(records, shipped(), 4)));
    }
}
