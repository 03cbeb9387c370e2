#include <doctest.h>

#include <cmath>
#include <numeric>

#include "causalqa/datagen.hpp"

using namespace causalqa;

namespace {

EffectParams one_covariate(double beta10, double beta1, double beta2, double mu, double sigma = 1.0) {
    EffectParams p;
    p.names = {"s1"};
    p.beta10 = beta10;
    p.beta1 = {beta1};
    p.beta2 = {beta2};
    p.mu = {mu};
    p.sigma = {sigma};
    return p;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

}  // namespace

TEST_SUITE("datagen") {
    TEST_CASE("SEM weights are strictly upper triangular and bounded") {
        Rng rng(1);
        for (int rep = 0; rep < 50; ++rep) {
            const SemParams p = sample_sem_params(6, 0.5, rng);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    const double w = p.weights(i, j);
                    if (j <= i) {
                        CHECK(w == 0.0);
                    } else if (w != 0.0) {
                        CHECK(std::abs(w) >= 0.5);
                        CHECK(std::abs(w) <= 2.0);
                    }
                }
        }
    }

    TEST_CASE("fully masked SEM has an empty truth") {
        Rng rng(2);
        const CglData d = gen_cgl(5, 100, 1.0, rng);
        CHECK(d.params.weights.isZero());
        for (const auto& row : d.truth.edges)
            for (int e : row) CHECK(e == 0);
        CHECK(d.data.cols() == 5);
    }

    TEST_CASE("chain covariance matches the analytic form") {
        SemParams p;
        p.weights = Eigen::MatrixXd::Zero(3, 3);
        p.weights(0, 1) = 1.5;
        p.weights(1, 2) = 1.5;
        p.noise_sd = {1.0, 1.0, 1.0};
        Rng rng(3);
        const TabularDataset d = simulate_sem(p, 200000, rng);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
        const Eigen::MatrixXd inv = (I - p.weights).inverse();
        const Eigen::MatrixXd sigma = inv.transpose() * inv;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double est = covariance(d.numeric(d.column(i).name), d.numeric(d.column(j).name));
                CHECK(est == doctest::Approx(sigma(i, j)).epsilon(0.02));
            }
    }

    TEST_CASE("same seed gives identical CSV bytes") {
        Rng a(9), b(9);
        CHECK(to_csv(gen_cgl(5, 200, 0.5, a).data) == to_csv(gen_cgl(5, 200, 0.5, b).data));
    }

    TEST_CASE("bad dimensions") {
        Rng rng(1);
        CHECK_THROWS_AS(gen_cgl(1, 10, 0.5, rng), Error);
        CHECK_THROWS_AS(gen_cgl(3, 10, 1.5, rng), Error);
        CHECK_THROWS_AS(gen_effect(0, 10, rng), Error);
        CHECK_THROWS_AS(gen_opo(2, 10, 0, rng), Error);
        CHECK_THROWS_AS(gen_mediation(2, rng), Error);
    }

    TEST_CASE("effect truths") {
        const EffectParams p = one_covariate(2.0, 0.7, 0.5, 1.0);
        CHECK(true_ate(p) == doctest::Approx(2.5));
        CHECK(true_hte(p, {{"s1", 3.0}}) == doctest::Approx(3.5));
        CHECK(true_hte(p, {{"s1", 1.0}}) == doctest::Approx(true_ate(p)));
        const EffectParams flat = one_covariate(2.0, 0.7, 0.0, 1.0);
        CHECK(true_hte(flat, {{"s1", -4.0}}) == doctest::Approx(2.0));
        CHECK_THROWS_AS(true_hte(p, {{"nope", 1.0}}), Error);
    }

    TEST_CASE("Monte Carlo agrees with the analytic ATE") {
        const EffectParams p = one_covariate(2.0, 0.7, 0.5, 1.0);
        Rng rng(4);
        const TabularDataset d = simulate_effect(p, 1000000, rng);
        const auto& a = d.numeric("a");
        const auto& y = d.numeric("y");
        double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
        for (std::size_t i = 0; i < a.size(); ++i) (a[i] > 0.5 ? (s1 += y[i], n1 += 1) : (s0 += y[i], n0 += 1));
        CHECK(s1 / n1 - s0 / n0 == doctest::Approx(2.5).epsilon(0.01));
        CHECK(n1 / a.size() == doctest::Approx(0.5).epsilon(0.01));
    }

    TEST_CASE("single-stage policy follows the sign of the effect") {
        const EffectParams p = one_covariate(-1.0, 0.3, 1.0, 0.0);
        CHECK(std::get<double>(single_stage_policy(p, {{"s1", 2.0}}).action) == 1.0);
        CHECK(std::get<double>(single_stage_policy(p, {{"s1", 0.0}}).action) == 0.0);
    }

    TEST_CASE("mediation truth") {
        MediationParams p;
        p.beta1 = 1.0;
        p.beta2 = 2.0;
        p.beta_m = 3.0;
        const MediationTruth t = mediation_truth(p);
        CHECK(t.direct == 1.0);
        CHECK(t.indirect == 6.0);
        CHECK(t.total == 7.0);

        Rng rng(5);
        const TabularDataset d = simulate_mediation(p, 1000000, rng);
        const auto& a = d.numeric("a");
        const auto& y = d.numeric("y");
        double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
        for (std::size_t i = 0; i < a.size(); ++i) (a[i] > 0.5 ? (s1 += y[i], n1 += 1) : (s0 += y[i], n0 += 1));
        CHECK(std::abs(s1 / n1 - s0 / n0 - 7.0) < 0.02);

        Rng r2(6);
        const MediationData zero = gen_mediation(100, r2, {}, 0.0);
        CHECK(zero.truth.indirect == 0.0);
        CHECK(zero.truth.total == zero.truth.direct);
        CHECK(zero.truth.total - (zero.truth.direct + zero.truth.indirect) == 0.0);
    }

    TEST_CASE("OPO layouts") {
        Rng rng(7);
        const OpoData one = gen_opo(2, 50, 1, rng);
        CHECK(one.data.names() == std::vector<std::string>{"s1", "s2", "a", "y"});
        const OpoData two = gen_opo(2, 50, 2, rng);
        CHECK(two.data.find("a1"));
        CHECK(two.data.find("a2"));
        CHECK(two.data.find("y2"));
    }

    TEST_CASE("golden sidecar") {
        CHECK(golden_to_json(AteTruth{0.5}) == R"({"type":"ate","value":0.5})");
        CHECK(golden_to_json(MediationTruth{1.0, 0.0, 1.0}) ==
              R"({"type":"mediation","direct":1.0,"indirect":0.0,"total":1.0})");
    }
}
