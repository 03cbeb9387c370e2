#include "causalqa/datagen.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "causalqa/error.hpp"

namespace causalqa {

namespace {

constexpr double kCoefLo = 0.5;
constexpr double kCoefHi = 2.0;
constexpr double kMeanBound = 2.0;
constexpr double kSdLo = 0.5;
constexpr double kSdHi = 1.5;

std::vector<std::string> default_names(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int j = 1; j <= count; ++j) out.push_back(prefix + std::to_string(j));
    return out;
}

double normal(Rng& rng, double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double EffectParams::mean_outcome(const std::vector<double>& s, double a) const {
    return a * beta10 + dot(s, beta1) + a * dot(s, beta2) + mu_y;
}

// ---------------------------------------------------------------------------
// CGL

SemParams sample_sem_params(int nodes, double p_mask, Rng& rng) {
    SemParams p;
    p.p_mask = p_mask;
    p.weights = Eigen::MatrixXd::Zero(nodes, nodes);
    std::bernoulli_distribution masked(p_mask);
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) {
            const bool drop = masked(rng);
            const double w = signed_uniform(rng, kCoefLo, kCoefHi);
            if (!drop) p.weights(i, j) = w;
        }
    p.noise_sd.assign(static_cast<std::size_t>(nodes), 1.0);
    return p;
}

TabularDataset simulate_sem(const SemParams& params, int n, Rng& rng, const std::vector<std::string>& names) {
    const int J = static_cast<int>(params.weights.rows());
    const auto cols = names.empty() ? default_names("x", J) : names;
    if (static_cast<int>(cols.size()) != J) throw Error(ErrorCode::BadDims, "need one name per node");

    Eigen::MatrixXd X(n, J);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < J; ++j) {
            double v = normal(rng, 0.0, params.noise_sd[static_cast<std::size_t>(j)]);
            for (int i = 0; i < j; ++i) v += params.weights(i, j) * X(r, i);
            X(r, j) = v;
        }
    TabularDataset data;
    for (int j = 0; j < J; ++j) {
        std::vector<double> col(X.col(j).data(), X.col(j).data() + n);
        data.add_numeric(cols[static_cast<std::size_t>(j)], std::move(col));
    }
    return data;
}

GraphTruth graph_truth(const SemParams& params, const std::vector<std::string>& names) {
    const int J = static_cast<int>(params.weights.rows());
    GraphTruth t;
    t.nodes = names.empty() ? default_names("x", J) : names;
    t.edges.assign(J, std::vector<int>(J, 0));
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) t.edges[i][j] = params.weights(i, j) != 0.0 ? 1 : 0;
    return t;
}

CglData gen_cgl(int nodes, int n, double p_mask, Rng& rng, const std::vector<std::string>& names) {
    if (nodes < 2 || n < 1 || !(p_mask >= 0.0 && p_mask <= 1.0))
        throw Error(ErrorCode::BadDims, "gen_cgl needs nodes >= 2, n >= 1 and p_mask in [0, 1]");
    if (!names.empty() && static_cast<int>(names.size()) != nodes)
        throw Error(ErrorCode::BadDims, "gen_cgl needs one name per node");
    CglData out;
    out.params = sample_sem_params(nodes, p_mask, rng);
    out.data = simulate_sem(out.params, n, rng, names);
    out.truth = graph_truth(out.params, out.data.names());
    return out;
}

// ---------------------------------------------------------------------------
// ATE / HTE

EffectParams sample_effect_params(int covariates, Rng& rng, const std::vector<std::string>& names) {
    EffectParams p;
    p.names = names.empty() ? default_names("s", covariates) : names;
    if (static_cast<int>(p.names.size()) != covariates)
        throw Error(ErrorCode::BadDims, "need one name per covariate");
    p.beta10 = signed_uniform(rng, kCoefLo, kCoefHi);
    for (int j = 0; j < covariates; ++j) {
        p.beta1.push_back(signed_uniform(rng, kCoefLo, kCoefHi));
        p.beta2.push_back(signed_uniform(rng, kCoefLo, kCoefHi));
        p.mu.push_back(uniform(rng, -kMeanBound, kMeanBound));
        p.sigma.push_back(uniform(rng, kSdLo, kSdHi));
    }
    p.mu_y = uniform(rng, -kMeanBound, kMeanBound);
    p.sigma_y = uniform(rng, kSdLo, kSdHi);
    return p;
}

TabularDataset simulate_effect(const EffectParams& params, int n, Rng& rng, const std::string& treatment,
                               const std::string& response) {
    const std::size_t J = params.size();
    std::vector<std::vector<double>> s(J, std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<double> a(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
    std::bernoulli_distribution coin(0.5);
    std::vector<double> row(J);
    for (int r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < J; ++j) row[j] = s[j][r] = normal(rng, params.mu[j], params.sigma[j]);
        a[r] = coin(rng) ? 1.0 : 0.0;
        y[r] = params.mean_outcome(row, a[r]) - params.mu_y + normal(rng, params.mu_y, params.sigma_y);
    }
    TabularDataset data;
    for (std::size_t j = 0; j < J; ++j) data.add_numeric(params.names[j], std::move(s[j]));
    data.add_numeric(treatment, std::move(a));
    data.add_numeric(response, std::move(y));
    return data;
}

EffectData gen_effect(int covariates, int n, Rng& rng, const EffectColumns& columns) {
    if (covariates < 1 || n < 2) throw Error(ErrorCode::BadDims, "gen_effect needs covariates >= 1 and n >= 2");
    if (!columns.covariates.empty() && static_cast<int>(columns.covariates.size()) != covariates)
        throw Error(ErrorCode::BadDims, "gen_effect needs one name per covariate");
    EffectData out;
    out.params = sample_effect_params(covariates, rng, columns.covariates);
    out.data = simulate_effect(out.params, n, rng, columns.treatment, columns.response);
    return out;
}

double true_ate(const EffectParams& params) { return params.beta10 + dot(params.beta2, params.mu); }

namespace {

std::vector<double> query_point(const std::vector<std::string>& names, const std::vector<double>& means,
                                const std::vector<ConditionClause>& conditions) {
    std::vector<double> s = means;
    for (const auto& c : conditions) {
        std::size_t j = 0;
        while (j < names.size() && names[j] != c.variable) ++j;
        if (j == names.size())
            throw Error(ErrorCode::UnknownConditionVariable, "'" + c.variable + "' is not a covariate");
        const auto* v = std::get_if<double>(&c.value);
        if (!v) throw Error(ErrorCode::UnknownConditionVariable, "condition on '" + c.variable + "' is not numeric");
        s[j] = *v;
    }
    return s;
}

}  // namespace

double true_hte(const EffectParams& params, const std::vector<ConditionClause>& conditions) {
    const auto s = query_point(params.names, params.mu, conditions);
    return params.beta10 + dot(params.beta2, s);
}

PolicyTruth single_stage_policy(const EffectParams& params, const std::vector<ConditionClause>& conditions) {
    const double effect = true_hte(params, conditions);
    PolicyTruth t;
    t.conditions = conditions;
    t.action = effect > 0.0 ? 1.0 : 0.0;
    t.value_gap = std::abs(effect);
    return t;
}

// ---------------------------------------------------------------------------
// OPO

namespace {

Eigen::MatrixXd sample_transition(int J, Rng& rng) {
    Eigen::MatrixXd B(J, J);
    for (int i = 0; i < J; ++i)
        for (int j = 0; j < J; ++j) B(i, j) = signed_uniform(rng, kCoefLo, kCoefHi);
    const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(B, false).eigenvalues().cwiseAbs().maxCoeff();
    if (radius > 1.0) B /= radius;
    return B;
}

std::string stage_state_name(int stages, int t, int j) {
    if (stages == 1) return "s" + std::to_string(j);
    return "s" + std::to_string(t) + "_" + std::to_string(j);
}

}  // namespace

MdpParams sample_mdp_params(int covariates, int stages, Rng& rng) {
    MdpParams p;
    p.stages = stages;
    p.reward = sample_effect_params(covariates, rng);
    p.transition0 = sample_transition(covariates, rng);
    p.transition1 = sample_transition(covariates, rng);
    return p;
}

TabularDataset simulate_opo(const MdpParams& params, int n, Rng& rng) {
    const int J = static_cast<int>(params.reward.size());
    const int T = params.stages;
    const auto N = static_cast<std::size_t>(n);
    std::vector<std::vector<double>> states(static_cast<std::size_t>(T * J), std::vector<double>(N));
    std::vector<std::vector<double>> actions(static_cast<std::size_t>(T), std::vector<double>(N));
    std::vector<std::vector<double>> rewards(static_cast<std::size_t>(T), std::vector<double>(N));
    std::bernoulli_distribution coin(0.5);
    const EffectParams& rp = params.reward;
    std::vector<double> s(static_cast<std::size_t>(J));
    for (std::size_t r = 0; r < N; ++r) {
        for (int j = 0; j < J; ++j) s[j] = normal(rng, rp.mu[j], rp.sigma[j]);
        for (int t = 0; t < T; ++t) {
            const double a = coin(rng) ? 1.0 : 0.0;
            for (int j = 0; j < J; ++j) states[t * J + j][r] = s[j];
            actions[t][r] = a;
            rewards[t][r] = rp.mean_outcome(s, a) - rp.mu_y + normal(rng, rp.mu_y, rp.sigma_y);
            const Eigen::MatrixXd& B = a > 0.5 ? params.transition1 : params.transition0;
            Eigen::VectorXd next = B * Eigen::Map<const Eigen::VectorXd>(s.data(), J);
            for (int j = 0; j < J; ++j) s[j] = next(j);
        }
    }
    TabularDataset data;
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < J; ++j) data.add_numeric(stage_state_name(T, t + 1, j + 1), std::move(states[t * J + j]));
        data.add_numeric(T == 1 ? "a" : "a" + std::to_string(t + 1), std::move(actions[t]));
        data.add_numeric(T == 1 ? "y" : "y" + std::to_string(t + 1), std::move(rewards[t]));
    }
    return data;
}

OpoData gen_opo(int covariates, int n, int stages, Rng& rng) {
    if (covariates < 1 || n < 2 || stages < 1)
        throw Error(ErrorCode::BadDims, "gen_opo needs covariates >= 1, n >= 2 and stages >= 1");
    OpoData out;
    out.params = sample_mdp_params(covariates, stages, rng);
    out.data = simulate_opo(out.params, n, rng);
    return out;
}

namespace {

double optimal_value(const MdpParams& p, int stage, const Eigen::VectorXd& s) {
    if (stage > p.stages) return 0.0;
    const std::vector<double> sv(s.data(), s.data() + s.size());
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 1; ++a) {
        const Eigen::MatrixXd& B = a ? p.transition1 : p.transition0;
        best = std::max(best, p.reward.mean_outcome(sv, a) + optimal_value(p, stage + 1, B * s));
    }
    return best;
}

}  // namespace

PolicyTruth multi_stage_policy(const MdpParams& params, const std::vector<ConditionClause>& conditions) {
    const int J = static_cast<int>(params.reward.size());
    std::vector<std::string> names;
    for (int j = 1; j <= J; ++j) names.push_back(stage_state_name(params.stages, 1, j));
    const auto point = query_point(names, params.reward.mu, conditions);
    const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(point.data(), J);
    double q[2];
    for (int a = 0; a <= 1; ++a) {
        const Eigen::MatrixXd& B = a ? params.transition1 : params.transition0;
        q[a] = params.reward.mean_outcome(point, a) + optimal_value(params, 2, B * s);
    }
    PolicyTruth t;
    t.conditions = conditions;
    t.action = q[1] > q[0] ? 1.0 : 0.0;
    t.value_gap = std::abs(q[1] - q[0]);
    return t;
}

// ---------------------------------------------------------------------------
// MA

MediationParams sample_mediation_params(Rng& rng, bool negligible) {
    MediationParams p;
    p.beta1 = signed_uniform(rng, kCoefLo, kCoefHi);
    p.beta2 = signed_uniform(rng, kCoefLo, kCoefHi);
    const double bm = signed_uniform(rng, kCoefLo, kCoefHi);
    p.beta_m = negligible ? 0.0 : bm;
    p.mu_y = uniform(rng, -kMeanBound, kMeanBound);
    p.sigma_y = uniform(rng, kSdLo, kSdHi);
    p.mu_m = uniform(rng, -kMeanBound, kMeanBound);
    p.sigma_m = uniform(rng, kSdLo, kSdHi);
    return p;
}

TabularDataset simulate_mediation(const MediationParams& p, int n, Rng& rng, const MediationColumns& columns) {
    const auto N = static_cast<std::size_t>(n);
    std::vector<double> a(N), m(N), y(N);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t r = 0; r < N; ++r) {
        a[r] = coin(rng) ? 1.0 : 0.0;
        m[r] = a[r] * p.beta_m + normal(rng, p.mu_m, p.sigma_m);
        y[r] = a[r] * p.beta1 + m[r] * p.beta2 + normal(rng, p.mu_y, p.sigma_y);
    }
    TabularDataset data;
    data.add_numeric(columns.treatment, std::move(a));
    data.add_numeric(columns.mediator, std::move(m));
    data.add_numeric(columns.response, std::move(y));
    return data;
}

MediationTruth mediation_truth(const MediationParams& p) {
    MediationTruth t;
    t.direct = p.beta1;
    t.indirect = p.beta_m * p.beta2;
    t.total = t.direct + t.indirect;
    return t;
}

MediationData gen_mediation(int n, Rng& rng, const MediationColumns& columns, std::optional<double> beta_m) {
    if (n < 3) throw Error(ErrorCode::BadDims, "gen_mediation needs n >= 3");
    MediationData out;
    out.params = sample_mediation_params(rng);
    if (beta_m) out.params.beta_m = *beta_m;
    out.data = simulate_mediation(out.params, n, rng, columns);
    out.truth = mediation_truth(out.params);
    return out;
}

// ---------------------------------------------------------------------------

std::string golden_to_json(const GoldenLabel& label) {
    using nlohmann::ordered_json;
    auto conditions_json = [](const std::vector<ConditionClause>& cs) {
        ordered_json arr = ordered_json::array();
        for (const auto& c : cs) {
            ordered_json v;
            if (const auto* d = std::get_if<double>(&c.value))
                v = *d;
            else
                v = std::get<std::string>(c.value);
            arr.push_back(ordered_json::array({c.variable, v}));
        }
        return arr;
    };
    ordered_json j;
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, GraphTruth>) {
                j["type"] = "graph";
                j["nodes"] = t.nodes;
                j["edges"] = t.edges;
            } else if constexpr (std::is_same_v<T, AteTruth>) {
                j["type"] = "ate";
                j["value"] = t.value;
            } else if constexpr (std::is_same_v<T, HteTruth>) {
                j["type"] = "hte";
                j["conditions"] = conditions_json(t.conditions);
                j["value"] = t.value;
            } else if constexpr (std::is_same_v<T, MediationTruth>) {
                j["type"] = "mediation";
                j["direct"] = t.direct;
                j["indirect"] = t.indirect;
                j["total"] = t.total;
            } else {
                j["type"] = "policy";
                j["conditions"] = conditions_json(t.conditions);
                if (const auto* d = std::get_if<double>(&t.action))
                    j["action"] = *d;
                else
                    j["action"] = std::get<std::string>(t.action);
                j["value_gap"] = t.value_gap;
            }
        },
        label);
    return j.dump();
}

}  // namespace causalqa
