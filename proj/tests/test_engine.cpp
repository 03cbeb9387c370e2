#include <doctest.h>

#include <cmath>

#include "causalqa/datagen.hpp"
#include "causalqa/engine.hpp"

using namespace causalqa;

namespace {

EffectParams one_covariate(double beta10, double beta1, double beta2, double mu) {
    EffectParams p;
    p.names = {"s1"};
    p.beta10 = beta10;
    p.beta1 = {beta1};
    p.beta2 = {beta2};
    p.mu = {mu};
    p.sigma = {1.0};
    return p;
}

template <class F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error");
    return ErrorCode::InvalidQuery;
}

std::normal_distribution<double> gauss;

}  // namespace

TEST_SUITE("engine") {
    TEST_CASE("OLS recovers an exact line") {
        Rng rng(1);
        Eigen::MatrixXd X(50, 1);
        Eigen::VectorXd y(50);
        for (int i = 0; i < 50; ++i) {
            X(i, 0) = gauss(rng);
            y(i) = 2.0 * X(i, 0);
        }
        const OlsFit f = ols(X, y);
        CHECK(std::abs(f.coefficients(0) - 2.0) < 1e-9);
        CHECK(std::abs(f.intercept) < 1e-9);
    }

    TEST_CASE("OLS on pure noise stays near zero") {
        Rng rng(2);
        Eigen::MatrixXd X(2000, 1);
        Eigen::VectorXd y(2000);
        for (int i = 0; i < 2000; ++i) {
            X(i, 0) = gauss(rng);
            y(i) = gauss(rng);
        }
        const OlsFit f = ols(X, y);
        CHECK(std::abs(f.coefficients(0)) < 3.0 * f.standard_errors(0));
    }

    TEST_CASE("OLS matches the normal equations") {
        Rng rng(3);
        Eigen::MatrixXd X(200, 4);
        Eigen::VectorXd y(200);
        for (int i = 0; i < 200; ++i) {
            for (int j = 0; j < 4; ++j) X(i, j) = gauss(rng);
            y(i) = 1.0 + X.row(i).sum() + gauss(rng);
        }
        Eigen::MatrixXd D(200, 5);
        D << Eigen::VectorXd::Ones(200), X;
        const Eigen::VectorXd beta = (D.transpose() * D).ldlt().solve(D.transpose() * y);
        const OlsFit f = ols(X, y);
        CHECK(std::abs(f.intercept - beta(0)) < 1e-8);
        for (int j = 0; j < 4; ++j) CHECK(std::abs(f.coefficients(j) - beta(j + 1)) < 1e-8);
    }

    TEST_CASE("collinear designs") {
        Eigen::MatrixXd X(20, 2);
        Eigen::VectorXd y(20);
        for (int i = 0; i < 20; ++i) {
            X(i, 0) = i;
            X(i, 1) = 2.0 * i;
            y(i) = i;
        }
        CHECK(error_of([&] { ols(X, y); }) == ErrorCode::RankDeficient);
        const OlsFit f = ols_with_fallback(X, y);
        CHECK(f.dropped.size() == 1);
    }

    TEST_CASE("logistic regression") {
        Rng rng(4);
        std::bernoulli_distribution coin(0.5);
        Eigen::MatrixXd X(5000, 2);
        Eigen::VectorXd a(5000);
        for (int i = 0; i < 5000; ++i) {
            X(i, 0) = gauss(rng);
            X(i, 1) = gauss(rng);
            a(i) = coin(rng) ? 1.0 : 0.0;
        }
        const LogisticFit f = logistic(X, a);
        CHECK(f.converged);
        CHECK(std::abs(f.intercept - std::log(a.mean() / (1 - a.mean()))) < 0.1);
        for (int i = 0; i < 5000; ++i) {
            const double p = f.probability(X.row(i).transpose());
            CHECK(p >= 0.4);
            CHECK(p <= 0.6);
        }

        Eigen::MatrixXd S(40, 1);
        Eigen::VectorXd b(40);
        for (int i = 0; i < 40; ++i) {
            S(i, 0) = i - 19.5;
            b(i) = i >= 20 ? 1.0 : 0.0;
        }
        CHECK(error_of([&] { logistic(S, b); }) == ErrorCode::SeparationDetected);
    }

    TEST_CASE("ATE") {
        TabularDataset exact;
        std::vector<double> a, y, s;
        for (int i = 0; i < 100; ++i) {
            a.push_back(i % 2);
            y.push_back(i % 2);
            s.push_back(std::sin(i));
        }
        exact.add_numeric("s", s);
        exact.add_numeric("a", a);
        exact.add_numeric("y", y);
        CHECK(std::abs(estimate_ate(exact, "a", "y").value - 1.0) < 1e-6);

        Rng rng(5);
        const EffectParams p = one_covariate(2.0, 0.7, 0.5, 1.0);
        const TabularDataset d = simulate_effect(p, 10000, rng);
        CHECK(std::abs(estimate_ate(d, "a", "y").value - 2.5) < 0.1);

        const EffectParams null = one_covariate(0.0, 0.7, 0.0, 1.0);
        const TabularDataset z = simulate_effect(null, 10000, rng);
        const EffectEstimate e = estimate_ate(z, "a", "y");
        CHECK(std::abs(e.value) < 3.0 * e.std_error);

        TabularDataset three;
        three.add_numeric("a", {0, 1, 2, 0, 1, 2});
        three.add_numeric("y", {1, 2, 3, 4, 5, 6});
        CHECK(error_of([&] { estimate_ate(three, "a", "y"); }) == ErrorCode::NonBinaryTreatment);
    }

    TEST_CASE("HTE") {
        Rng rng(6);
        const EffectParams p = one_covariate(2.0, 0.7, 0.5, 1.0);
        const TabularDataset d = simulate_effect(p, 10000, rng);
        CHECK(std::abs(estimate_hte(d, "a", "y", {{"s1", 3.0}}).value - 3.5) < 0.15);
        CHECK(error_of([&] { estimate_hte(d, "a", "y", {{"nope", 1.0}}); }) == ErrorCode::UnknownConditionVariable);

        const EffectParams flat = one_covariate(1.0, 0.7, 0.0, 1.0);
        const TabularDataset f = simulate_effect(flat, 10000, rng);
        const EffectEstimate h = estimate_hte(f, "a", "y", {{"s1", 2.0}});
        const EffectEstimate ate = estimate_ate(f, "a", "y");
        CHECK(std::abs(h.value - ate.value) < 3.0 * h.std_error);

        const SLearnerFit fit = fit_slearner(d, "a", "y");
        CHECK(fit.average_effect() == doctest::Approx(fit.row_average_effect()));
    }

    TEST_CASE("mediation") {
        MediationParams p;
        p.beta1 = 1.0;
        p.beta2 = 2.0;
        p.beta_m = 3.0;
        Rng rng(7);
        const TabularDataset d = simulate_mediation(p, 10000, rng);
        const MediationEstimate m = estimate_mediation(d, "a", "y", "m");
        CHECK(std::abs(m.effects.direct - 1.0) < 0.1);
        CHECK(std::abs(m.effects.indirect - 6.0) < 0.1);
        CHECK(std::abs(m.effects.total - 7.0) < 0.1);
        CHECK(m.effects.total == m.effects.direct + m.effects.indirect);

        p.beta_m = 0.0;
        const MediationEstimate z = estimate_mediation(simulate_mediation(p, 10000, rng), "a", "y", "m");
        CHECK(std::abs(z.effects.indirect) < 3.0 * z.indirect_se);
    }

    TEST_CASE("policy") {
        Rng rng(8);
        const EffectParams p = one_covariate(-1.0, 0.3, 1.0, 0.0);
        const TabularDataset d = simulate_effect(p, 10000, rng);
        CHECK(std::get<double>(optimize_policy(d, "a", "y", {{"s1", 2.0}}).action) == 1.0);
        CHECK(std::get<double>(optimize_policy(d, "a", "y", {{"s1", -1.0}}).action) == 0.0);

        TabularDataset tie;
        tie.add_numeric("s1", {0, 1, 0, 1, 0, 1, 0, 1});
        tie.add_numeric("a", {0, 0, 1, 1, 0, 0, 1, 1});
        tie.add_numeric("y", {1, 2, 1, 2, 1, 2, 1, 2});
        CHECK(std::get<double>(optimize_policy(tie, "a", "y", {{"s1", 0.5}}).action) == 0.0);

        TabularDataset letters;
        letters.add_categorical("a", {"B", "A", "B", "A", "B", "A"});
        letters.add_numeric("y", {3, 1, 3.1, 1.2, 2.9, 0.8});
        CHECK(std::get<std::string>(optimize_policy(letters, "a", "y", {}).action) == "B");
    }

    TEST_CASE("two-stage policy agrees with the model optimum") {
        int agree = 0;
        for (int rep = 0; rep < 20; ++rep) {
            Rng rng(100 + rep);
            const OpoData o = gen_opo(2, 10000, 2, rng);
            const PolicyTruth truth = multi_stage_policy(o.params, {{"s1_1", 0.5}});
            const PolicyEstimate est = optimize_policy(o.data, "a", "y", {{"s1_1", 0.5}});
            CHECK(est.stages == 2);
            agree += scalar_equal(est.action, truth.action);
        }
        CHECK(agree >= 17);
    }

    TEST_CASE("stage schema") {
        TabularDataset d;
        d.add_numeric("s1_1", {0, 1});
        d.add_numeric("a1", {0, 1});
        d.add_numeric("y1", {0, 1});
        d.add_numeric("a2", {0, 1});
        CHECK(error_of([&] { detect_stages(d, "a", "y"); }) == ErrorCode::MalformedStageSchema);
        TabularDataset single;
        single.add_numeric("a", {0, 1});
        single.add_numeric("y", {0, 1});
        CHECK_FALSE(detect_stages(single, "a", "y"));
    }

    TEST_CASE("dispatch routes each task") {
        Rng rng(9);
        const TabularDataset d = gen_effect(2, 2000, rng).data;
        CausalQuery q;
        q.task = Task::ATE;
        q.dataset = "d.csv";
        q.treatment = "A";  // resolved case-insensitively
        q.response = "y";
        CHECK(std::holds_alternative<EffectResult>(dispatch(q, d)));

        q.task = Task::CGL;
        q.treatment.reset();
        q.response.reset();
        q.nodes = {"all_variables"};
        const auto g = std::get<GraphResult>(dispatch(q, d));
        CHECK(g.nodes.size() == d.cols());

        q.nodes = {"missing_column"};
        CHECK(error_of([&] { dispatch(q, d); }) == ErrorCode::ColumnNotFound);
        CHECK(error_of([&] { dispatch(CausalQuery{}, d); }) == ErrorCode::InvalidQuery);
    }

    TEST_CASE("registry") {
        CHECK(default_method(Task::ATE) == MethodId::DoublyRobust);
        CHECK(methods_for(Task::ATE) == std::vector<MethodId>{MethodId::DoublyRobust, MethodId::SLearner});
        CHECK(methods_for(Task::CGL) == std::vector<MethodId>{MethodId::PC});

        MethodRegistry r = MethodRegistry::with_defaults();
        r.assign(Task::ATE, MethodId::SLearner);
        CHECK(r.method_for(Task::ATE) == MethodId::SLearner);
        Rng rng(10);
        const EffectParams p = one_covariate(2.0, 0.7, 0.5, 1.0);
        const TabularDataset d = simulate_effect(p, 10000, rng);
        CausalQuery q;
        q.task = Task::ATE;
        q.dataset = "d.csv";
        q.treatment = "a";
        q.response = "y";
        CHECK(std::abs(std::get<EffectResult>(dispatch(q, d, {}, r)).value - 2.5) < 0.1);
    }
}
