#pragma once

// Synthetic datasets with analytic golden labels for the five tasks.
//
//   CGL  X = B^T X + eps, B strictly upper triangular, Gaussian eps
//   ATE/HTE  S_j ~ N(mu_j, sigma_j^2), A ~ Bernoulli(0.5),
//        Y = A b10 + sum S_j b1j + sum A S_j b2j + eps_y
//   OPO  per-stage rewards as above, S_{t+1} = B_{a_t} S_t
//   MA   M = A bm + eps_m, Y = A b1 + M b2 + eps_y
//
// Coefficients are drawn as +-Uniform[0.5, 2], means Uniform(-2, 2) and
// standard deviations Uniform(0.5, 1.5). Everything is a pure function of
// the Rng state passed in.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "causalqa/dataset.hpp"
#include "causalqa/intent.hpp"
#include "causalqa/rng.hpp"

namespace causalqa {

inline constexpr double kDefaultMaskProbability = 0.5;

struct SemParams {
    Eigen::MatrixXd weights;  // strictly upper triangular; weights(i, j) is the edge i -> j
    double p_mask = kDefaultMaskProbability;
    std::vector<double> noise_sd;
};

struct GraphTruth {
    std::vector<std::string> nodes;
    std::vector<std::vector<int>> edges;  // edges[i][j] == 1 iff weights(i, j) != 0
};

struct EffectParams {
    std::vector<std::string> names;  // covariate column names
    double beta10 = 0.0;
    std::vector<double> beta1;
    std::vector<double> beta2;
    std::vector<double> mu;
    std::vector<double> sigma;
    double mu_y = 0.0;
    double sigma_y = 1.0;

    std::size_t size() const { return mu.size(); }
    // Expected reward E[Y | S = s, A = a].
    double mean_outcome(const std::vector<double>& s, double a) const;
};

struct MdpParams {
    Eigen::MatrixXd transition0;  // B_{s,0}
    Eigen::MatrixXd transition1;  // B_{s,1}
    int stages = 1;
    EffectParams reward;
};

struct MediationParams {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta_m = 0.0;
    double mu_y = 0.0;
    double sigma_y = 1.0;
    double mu_m = 0.0;
    double sigma_m = 1.0;
};

struct MediationTruth {
    double direct = 0.0;
    double indirect = 0.0;
    double total = 0.0;
};

struct AteTruth {
    double value = 0.0;
};

struct HteTruth {
    std::vector<ConditionClause> conditions;
    double value = 0.0;
};

struct PolicyTruth {
    std::vector<ConditionClause> conditions;
    Scalar action;
    double value_gap = 0.0;  // Q(best) - Q(other) at the query point
};

using GoldenLabel = std::variant<GraphTruth, AteTruth, HteTruth, MediationTruth, PolicyTruth>;

// ---------------------------------------------------------------------------
// CGL

SemParams sample_sem_params(int nodes, double p_mask, Rng& rng);
TabularDataset simulate_sem(const SemParams& params, int n, Rng& rng, const std::vector<std::string>& names = {});
GraphTruth graph_truth(const SemParams& params, const std::vector<std::string>& names);

struct CglData {
    TabularDataset data;
    GraphTruth truth;
    SemParams params;
};
// Throws Error(BadDims) unless nodes >= 2, n >= 1 and p_mask in [0, 1].
CglData gen_cgl(int nodes, int n, double p_mask, Rng& rng, const std::vector<std::string>& names = {});

// ---------------------------------------------------------------------------
// ATE / HTE

struct EffectColumns {
    std::vector<std::string> covariates;  // defaults to s1..sJ
    std::string treatment = "a";
    std::string response = "y";
};

EffectParams sample_effect_params(int covariates, Rng& rng, const std::vector<std::string>& names = {});
TabularDataset simulate_effect(const EffectParams& params, int n, Rng& rng, const std::string& treatment = "a",
                               const std::string& response = "y");

struct EffectData {
    TabularDataset data;
    EffectParams params;
};
// Throws Error(BadDims) unless covariates >= 1 and n >= 2.
EffectData gen_effect(int covariates, int n, Rng& rng, const EffectColumns& columns = {});

double true_ate(const EffectParams& params);
// Pinned covariates take their condition values, the rest their means.
// Throws Error(UnknownConditionVariable).
double true_hte(const EffectParams& params, const std::vector<ConditionClause>& conditions);
// Optimal binary action for a single-stage problem: 1 iff true_hte > 0.
PolicyTruth single_stage_policy(const EffectParams& params, const std::vector<ConditionClause>& conditions);

// ---------------------------------------------------------------------------
// OPO

MdpParams sample_mdp_params(int covariates, int stages, Rng& rng);
// stages == 1: columns s1..sJ, a, y. stages > 1: s{t}_{j}, a{t}, y{t}.
TabularDataset simulate_opo(const MdpParams& params, int n, Rng& rng);

struct OpoData {
    TabularDataset data;
    MdpParams params;
};
// Throws Error(BadDims) unless covariates >= 1, n >= 2 and stages >= 1.
OpoData gen_opo(int covariates, int n, int stages, Rng& rng);

// Exact optimal first-stage action by backward recursion on the known model.
// Conditions name stage-1 state columns (s1..sJ for one stage, s1_j otherwise).
PolicyTruth multi_stage_policy(const MdpParams& params, const std::vector<ConditionClause>& conditions);

// ---------------------------------------------------------------------------
// MA

struct MediationColumns {
    std::string treatment = "a";
    std::string mediator = "m";
    std::string response = "y";
};

MediationParams sample_mediation_params(Rng& rng, bool negligible = false);
TabularDataset simulate_mediation(const MediationParams& params, int n, Rng& rng,
                                  const MediationColumns& columns = {});
MediationTruth mediation_truth(const MediationParams& params);

struct MediationData {
    TabularDataset data;
    MediationParams params;
    MediationTruth truth;
};
// Throws Error(BadDims) unless n >= 3.
MediationData gen_mediation(int n, Rng& rng, const MediationColumns& columns = {},
                            std::optional<double> beta_m = std::nullopt);

// JSON sidecar describing a golden label and the parameters behind it.
std::string golden_to_json(const GoldenLabel& label);

}  // namespace causalqa
