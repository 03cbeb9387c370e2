#include <doctest.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "causalqa/narrator.hpp"
#include "fixtures.hpp"
#include "stub_server.hpp"

using namespace causalqa;

namespace {

CausalQuery effect_query(Task task, std::string treatment, std::string response) {
    CausalQuery q;
    q.task = task;
    q.dataset = "housing.csv";
    q.treatment = std::move(treatment);
    q.response = std::move(response);
    return q;
}

NarrationContext ate_context() {
    return {"What is the effect of homeownership_rate on affordability_index in housing.csv?",
            effect_query(Task::ATE, "homeownership_rate", "affordability_index"), MethodId::DoublyRobust,
            EffectResult{0.45}};
}

LlmBackendConfig stub_config(const StubServer& s) {
    LlmBackendConfig cfg;
    cfg.endpoint = s.endpoint();
    cfg.timeout = std::chrono::seconds(5);
    return cfg;
}

}  // namespace

TEST_SUITE("narrator") {
    TEST_CASE("graph summary") {
        CausalQuery q;
        q.task = Task::CGL;
        q.dataset = "diversity.csv";
        q.nodes = {"all_variables"};
        GraphResult g;
        g.nodes = {"gender_index", "diversity_index", "LGBTQ_inclusion", "disability_inclusion_index"};
        g.adjacency.assign(4, std::vector<int>(4, 0));
        g.strength.assign(4, std::vector<double>(4, 0.0));
        auto edge = [&](int i, int j, double s) {
            g.adjacency[i][j] = 1;
            g.strength[i][j] = g.strength[j][i] = s;
        };
        edge(0, 1, 9.0);
        edge(0, 2, 8.0);
        edge(3, 2, 7.0);
        CHECK(template_summary(Task::CGL, g, q) == fixtures::kSummaryCgl);

        edge(1, 3, 1.0);  // a fourth, weaker pair is counted but not spelled out
        const std::string four = template_summary(Task::CGL, g, q);
        CHECK(four.rfind("There are 3 pairs", 0) == 0);
        CHECK(four.find("diversity_index would causally influence the disability") == std::string::npos);

        GraphResult empty;
        empty.nodes = {"a", "b"};
        empty.adjacency.assign(2, std::vector<int>(2, 0));
        CHECK(template_summary(Task::CGL, empty, q) == "There are 0 pairs of significant causal relationships.");
    }

    TEST_CASE("effect summaries") {
        CHECK(template_summary(Task::ATE, EffectResult{0.45}, ate_context().query) == fixtures::kSummaryAte);

        CausalQuery hte = effect_query(Task::HTE, "professional_athlete_salaries", "event_attendance");
        hte.conditions = {{"medal_tally", 0.79}};
        CHECK(template_summary(Task::HTE, EffectResult{-1.41}, hte) == fixtures::kSummaryHte);

        CausalQuery ma = effect_query(Task::MA, "age_distribution", "gender_ratio");
        ma.mediator = "migration_speed";
        CHECK(template_summary(Task::MA, MediationResult{16.17, 9.43, 6.74}, ma) == fixtures::kSummaryMa);

        CausalQuery opo = effect_query(Task::OPO, "professional_athlete_salaries", "event_attendance");
        opo.conditions = {{"medal_tally", 2.0}};
        CHECK(template_summary(Task::OPO, ActionResult{std::string("C")}, opo) == fixtures::kSummaryOpo);
    }

    TEST_CASE("format mismatch") {
        try {
            template_summary(Task::ATE, MediationResult{1, 1, 0}, ate_context().query);
            FAIL("expected FormatMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FormatMismatch);
        }
    }

    TEST_CASE("summaries differ whenever the two-decimal value differs") {
        const auto q = ate_context().query;
        CHECK(template_summary(Task::ATE, EffectResult{0.45}, q) != template_summary(Task::ATE, EffectResult{0.46}, q));
        CHECK(template_summary(Task::ATE, EffectResult{-0.001}, q).find("-0.00") == std::string::npos);
    }

    TEST_CASE("template narration passes lint") {
        const Interpretation i = narrate(ate_context());
        CHECK(i.source == Interpretation::Source::Template);
        CHECK(split_sentences(i.text).size() == 2);
        CHECK(i.text.find("housing.csv") != std::string::npos);
        CHECK(lint(i.text, ate_context()).empty());
        CHECK(narrate(ate_context()).text == i.text);
    }

    TEST_CASE("lint flags") {
        const auto ctx = ate_context();
        const std::string good = narrate(ctx).text;

        const auto corr = lint("The homeownership_rate is correlated with the affordability_index. " + good, ctx);
        CHECK_FALSE(corr.hallucination_flags.empty());

        const auto extra = lint(good + " Roughly 12.5 percent of homes were affected.", ctx);
        CHECK_FALSE(extra.hallucination_flags.empty());

        const auto repeated = lint(good + " " + good, ctx);
        CHECK_FALSE(repeated.fluency_flags.empty());

        const auto missing = lint(fixtures::kSummaryAte, ctx);
        CHECK_FALSE(missing.incompleteness_flags.empty());

        std::string long_text = good;
        for (int k = 0; k < 6; ++k) long_text += " Sentence number " + std::to_string(k) + " adds nothing.";
        CHECK_FALSE(lint(long_text, ctx).fluency_flags.empty());
    }

    TEST_CASE("completeness sentence names what the summary leaves out") {
        CausalQuery q = effect_query(Task::OPO, "price", "sales");
        q.dataset = "shop.csv";
        q.conditions = {{"season", 2.0}};
        const std::string summary = template_summary(Task::OPO, ActionResult{1.0}, q);
        const std::string s = completeness_sentence(q, MethodId::QLearning, summary);
        CHECK(s.find("shop.csv") != std::string::npos);
        CHECK(s.find("season = 2") != std::string::npos);
        NarrationContext ctx{"", q, MethodId::QLearning, ActionResult{1.0}};
        CHECK(lint(narrate(ctx).text, ctx).empty());
    }

    TEST_CASE("interpretation prompt") {
        const auto ctx = ate_context();
        const std::string p =
            build_interpretation_prompt(ctx.question, Task::ATE, ctx.method, ctx.result, ctx.query);
        CHECK(p.find("The problem in (A) is a causal problem") != std::string::npos);
        CHECK(p.find(fixtures::kSummaryAte) != std::string::npos);
        CHECK(p.find(ctx.question) != std::string::npos);
        const std::string other =
            build_interpretation_prompt(ctx.question, Task::ATE, ctx.method, EffectResult{0.5}, ctx.query);
        CHECK(other != p);
    }

    TEST_CASE("endpoint parsing") {
        const HttpEndpoint e = parse_http_endpoint("http://localhost:8080/v1/chat");
        CHECK(e.host == "localhost");
        CHECK(e.port == 8080);
        CHECK(e.path == "/v1/chat");
        CHECK(parse_http_endpoint("http://example.org").port == 80);
        CHECK_THROWS_AS(parse_http_endpoint("https://example.org/"), Error);
        CHECK_THROWS_AS(parse_http_endpoint("ftp://x"), Error);
    }

    TEST_CASE("reply text extraction") {
        CHECK(reply_text(R"({"text":"hi"})") == "hi");
        CHECK(reply_text(R"({"choices":[{"message":{"content":"yo"}}]})") == "yo");
        CHECK(reply_text("plain") == "plain");
    }

    TEST_CASE("model reply kept when it lints clean") {
        const auto ctx = ate_context();
        const std::string clean = "Applying the doubly robust estimator to housing.csv, setting homeownership_rate "
                                  "as 1 changes the affordability_index by 0.45 on average.";
        REQUIRE(lint(clean, ctx).empty());
        StubServer server(nlohmann::json{{"text", clean}}.dump());
        ::setenv("CAUSALQA_LLM_TOKEN", "secret", 1);
        const Interpretation i = narrate(ctx, NarrateBackend::language_model(stub_config(server)));
        ::unsetenv("CAUSALQA_LLM_TOKEN");
        CHECK(i.source == Interpretation::Source::Llm);
        CHECK(i.text == clean);
        CHECK(server.last_auth() == "Bearer secret");
        CHECK(server.last_body().find("The problem in (A)") != std::string::npos);
    }

    TEST_CASE("model reply with association falls back to the template") {
        const auto ctx = ate_context();
        StubServer server(R"({"text":"The homeownership_rate is associated with the affordability_index."})");
        const Interpretation i = narrate(ctx, NarrateBackend::language_model(stub_config(server)));
        CHECK(i.source == Interpretation::Source::Template);
        CHECK(i.text == narrate(ctx).text);
        CHECK_FALSE(i.rejected.hallucination_flags.empty());
    }

    TEST_CASE("unreachable backend") {
        LlmBackendConfig cfg;
        cfg.endpoint = "http://127.0.0.1:1/none";
        cfg.timeout = std::chrono::seconds(2);
        try {
            narrate(ate_context(), NarrateBackend::language_model(cfg));
            FAIL("expected BackendUnreachable");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BackendUnreachable);
        }
        StubServer failing("{}", 500);
        CHECK_THROWS_AS(narrate(ate_context(), NarrateBackend::language_model(stub_config(failing))), Error);
    }
}
