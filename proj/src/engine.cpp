#include "causalqa/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <set>

#include "causalqa/error.hpp"
#include "causalqa/text.hpp"

namespace causalqa {

namespace {

std::optional<std::string> find_ci(const TabularDataset& data, std::string_view name) {
    if (data.find(name)) return std::string(name);
    const std::string lower = to_lower(name);
    for (const auto& n : data.names())
        if (to_lower(n) == lower) return n;
    return std::nullopt;
}

// Distinct values of a column in sorted order, plus each row's level index.
struct Levels {
    std::vector<Scalar> levels;
    std::vector<int> index;
};

Levels levels_of(const Column& col) {
    Levels out;
    out.index.resize(col.size());
    if (col.categorical) {
        std::vector<std::string> distinct(col.labels.begin(), col.labels.end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (const auto& d : distinct) out.levels.emplace_back(d);
        for (std::size_t i = 0; i < col.size(); ++i)
            out.index[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), col.labels[i]) -
                                            distinct.begin());
    } else {
        std::vector<double> distinct(col.values.begin(), col.values.end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (double d : distinct) out.levels.emplace_back(d);
        for (std::size_t i = 0; i < col.size(); ++i)
            out.index[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), col.values[i]) -
                                            distinct.begin());
    }
    return out;
}

Eigen::VectorXd binary_treatment(const TabularDataset& data, const std::string& treatment) {
    const Levels lv = levels_of(data.column(treatment));
    if (lv.levels.size() != 2)
        throw Error(ErrorCode::NonBinaryTreatment, "treatment '" + treatment + "' has " +
                                                       std::to_string(lv.levels.size()) +
                                                       " distinct values, expected exactly 2");
    Eigen::VectorXd a(static_cast<Eigen::Index>(lv.index.size()));
    for (std::size_t i = 0; i < lv.index.size(); ++i) a(static_cast<Eigen::Index>(i)) = lv.index[i];
    return a;
}

Eigen::VectorXd numeric_vector(const TabularDataset& data, const std::string& name) {
    const auto& v = data.numeric(name);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Covariates as a numeric design: numeric columns as-is, categorical columns
// as dummies for every level but the first.
struct CovariateBlock {
    std::vector<std::string> sources;  // original column name per design column
    std::vector<std::optional<std::string>> dummy_level;
    std::vector<std::vector<std::string>> categorical_levels;  // per design column, for validation
    Eigen::MatrixXd X;
    Eigen::VectorXd means;

    std::vector<std::string> source_names() const {
        std::vector<std::string> out;
        for (const auto& s : sources)
            if (out.empty() || out.back() != s) out.push_back(s);
        return out;
    }

    // Design row with `conditions` pinned and every other column at its mean.
    Eigen::VectorXd point(const std::vector<ConditionClause>& conditions) const {
        Eigen::VectorXd x = means;
        for (const auto& c : conditions) {
            std::optional<std::string> src;
            for (const auto& s : sources)
                if (s == c.variable) src = s;
            if (!src)
                for (const auto& s : sources)
                    if (to_lower(s) == to_lower(c.variable)) src = s;
            if (!src)
                throw Error(ErrorCode::UnknownConditionVariable,
                            "condition variable '" + c.variable + "' is not a covariate of the model");
            for (std::size_t k = 0; k < sources.size(); ++k) {
                if (sources[k] != *src) continue;
                const auto kk = static_cast<Eigen::Index>(k);
                if (!dummy_level[k]) {
                    const double* v = std::get_if<double>(&c.value);
                    if (!v)
                        throw Error(ErrorCode::UnknownConditionVariable,
                                    "condition " + c.variable + " = " + format_scalar(c.value) +
                                        " is not numeric but the column is");
                    x(kk) = *v;
                } else {
                    const std::string label = format_scalar(c.value);
                    const auto& lv = categorical_levels[k];
                    if (std::find(lv.begin(), lv.end(), label) == lv.end())
                        throw Error(ErrorCode::UnknownConditionVariable,
                                    "level '" + label + "' of '" + c.variable + "' does not occur in the data");
                    x(kk) = (*dummy_level[k] == label) ? 1.0 : 0.0;
                }
            }
        }
        return x;
    }
};

CovariateBlock encode_covariates(const TabularDataset& data, const std::vector<std::string>& excluded) {
    CovariateBlock b;
    std::vector<Eigen::VectorXd> cols;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        const Column& col = data.column(c);
        if (std::find(excluded.begin(), excluded.end(), col.name) != excluded.end()) continue;
        if (!col.categorical) {
            b.sources.push_back(col.name);
            b.dummy_level.emplace_back();
            b.categorical_levels.emplace_back();
            cols.push_back(Eigen::Map<const Eigen::VectorXd>(col.values.data(),
                                                             static_cast<Eigen::Index>(col.values.size())));
            continue;
        }
        const Levels lv = levels_of(col);
        std::vector<std::string> names;
        for (const auto& l : lv.levels) names.push_back(std::get<std::string>(l));
        for (std::size_t l = 1; l < names.size(); ++l) {
            b.sources.push_back(col.name);
            b.dummy_level.emplace_back(names[l]);
            b.categorical_levels.push_back(names);
            Eigen::VectorXd d(static_cast<Eigen::Index>(col.size()));
            for (std::size_t i = 0; i < col.size(); ++i)
                d(static_cast<Eigen::Index>(i)) = lv.index[i] == static_cast<int>(l) ? 1.0 : 0.0;
            cols.push_back(std::move(d));
        }
    }
    const auto n = static_cast<Eigen::Index>(data.rows());
    b.X.resize(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) b.X.col(static_cast<Eigen::Index>(k)) = cols[k];
    b.means = cols.empty() ? Eigen::VectorXd() : Eigen::VectorXd(b.X.colwise().mean().transpose());
    return b;
}

Eigen::MatrixXd rows_where(const Eigen::MatrixXd& X, const Eigen::VectorXd& a, double arm) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) == arm) idx.push_back(i);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
    return out;
}

Eigen::VectorXd rows_where(const Eigen::VectorXd& y, const Eigen::VectorXd& a, double arm) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) == arm) out.push_back(y(i));
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

void require_distinct(const std::vector<std::string>& names) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw Error(ErrorCode::InvalidQuery, "column '" + n + "' is used for more than one role");
}

}  // namespace

// ---------------------------------------------------------------------------
// ATE

EffectEstimate estimate_ate(const TabularDataset& data, const std::string& treatment, const std::string& response) {
    require_distinct({treatment, response});
    const Eigen::VectorXd a = binary_treatment(data, treatment);
    const Eigen::VectorXd y = numeric_vector(data, response);
    const CovariateBlock cov = encode_covariates(data, {treatment, response});
    const Eigen::MatrixXd& X = cov.X;

    const OlsFit m1 = ols_with_fallback(rows_where(X, a, 1.0), rows_where(y, a, 1.0));
    const OlsFit m0 = ols_with_fallback(rows_where(X, a, 0.0), rows_where(y, a, 0.0));
    const LogisticFit ps = logistic_with_fallback(X, a);

    const Eigen::Index n = X.rows();
    Eigen::VectorXd psi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = X.row(i).transpose();
        const double mu1 = m1.predict(x), mu0 = m0.predict(x);
        const double e = ps.probability(x);
        psi(i) = mu1 - mu0 + a(i) * (y(i) - mu1) / e - (1.0 - a(i)) * (y(i) - mu0) / (1.0 - e);
    }
    EffectEstimate out;
    out.value = psi.mean();
    const double var = n > 1 ? (psi.array() - out.value).square().sum() / static_cast<double>(n - 1) : 0.0;
    out.std_error = std::sqrt(var / static_cast<double>(n));
    return out;
}

// ---------------------------------------------------------------------------
// HTE

struct SLearnerFit::Encoded {
    CovariateBlock block;
    Eigen::VectorXd a;
    std::vector<std::string> names;
};

SLearnerFit fit_slearner(const TabularDataset& data, const std::string& treatment, const std::string& response) {
    require_distinct({treatment, response});
    auto enc = std::make_shared<SLearnerFit::Encoded>();
    enc->a = binary_treatment(data, treatment);
    enc->block = encode_covariates(data, {treatment, response});
    enc->names = enc->block.source_names();
    const Eigen::VectorXd y = numeric_vector(data, response);

    const Eigen::MatrixXd& S = enc->block.X;
    const Eigen::Index n = S.rows(), J = S.cols();
    Eigen::MatrixXd D(n, 1 + 2 * J);
    D.col(0) = enc->a;
    D.middleCols(1, J) = S;
    D.rightCols(J) = S.array().colwise() * enc->a.array();

    SLearnerFit fit;
    fit.fit_ = ols_with_fallback(D, y);
    fit.enc_ = std::move(enc);
    return fit;
}

EffectEstimate SLearnerFit::effect_at(const std::vector<ConditionClause>& conditions) const {
    const Eigen::VectorXd s = enc_->block.point(conditions);
    const Eigen::Index J = s.size();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(1 + 2 * J);
    g(0) = 1.0;
    g.tail(J) = s;
    EffectEstimate out;
    out.value = fit_.coefficients.dot(g);
    out.std_error = std::sqrt(std::max(0.0, g.dot(fit_.covariance * g)));
    return out;
}

double SLearnerFit::average_effect() const { return effect_at({}).value; }

double SLearnerFit::row_average_effect() const {
    const Eigen::Index J = enc_->block.X.cols();
    const Eigen::VectorXd per_row =
        (enc_->block.X * fit_.coefficients.tail(J)).array() + fit_.coefficients(0);
    return per_row.mean();
}

const std::vector<std::string>& SLearnerFit::covariates() const { return enc_->names; }

EffectEstimate estimate_hte(const TabularDataset& data, const std::string& treatment, const std::string& response,
                            const std::vector<ConditionClause>& conditions) {
    for (const auto& c : conditions) {
        if (!find_ci(data, c.variable))
            throw Error(ErrorCode::UnknownConditionVariable, "condition variable '" + c.variable + "' is not in the table");
    }
    return fit_slearner(data, treatment, response).effect_at(conditions);
}

// ---------------------------------------------------------------------------
// MA

MediationEstimate estimate_mediation(const TabularDataset& data, const std::string& treatment,
                                     const std::string& response, const std::string& mediator) {
    require_distinct({treatment, response, mediator});
    const Eigen::VectorXd a = binary_treatment(data, treatment);
    const Eigen::VectorXd m = numeric_vector(data, mediator);
    const Eigen::VectorXd y = numeric_vector(data, response);

    const OlsFit fm = ols(a, m);
    Eigen::MatrixXd am(a.size(), 2);
    am.col(0) = a;
    am.col(1) = m;
    const OlsFit fy = ols(am, y);

    const double bm = fm.coefficients(0), b1 = fy.coefficients(0), b2 = fy.coefficients(1);
    MediationEstimate out;
    out.effects.direct = b1;
    out.effects.indirect = bm * b2;
    out.effects.total = out.effects.direct + out.effects.indirect;
    out.direct_se = fy.standard_errors(0);
    const double se_m = fm.standard_errors(0), se_2 = fy.standard_errors(1);
    out.indirect_se = std::sqrt(bm * bm * se_2 * se_2 + b2 * b2 * se_m * se_m);
    return out;
}

// ---------------------------------------------------------------------------
// OPO

namespace {

// Q(s, l) = c + b.s + g_l + d_l.s with g_0 = d_0 = 0.
struct QModel {
    int levels = 1;
    Eigen::Index dims = 0;
    OlsFit fit;

    double q(const Eigen::VectorXd& s, int l) const {
        double v = fit.intercept + fit.coefficients.head(dims).dot(s);
        if (l > 0) {
            const Eigen::Index base = dims + (levels - 1);
            v += fit.coefficients(dims + l - 1) + fit.coefficients.segment(base + (l - 1) * dims, dims).dot(s);
        }
        return v;
    }
};

QModel fit_q(const Eigen::MatrixXd& S, const std::vector<int>& level, int L, const Eigen::VectorXd& y) {
    const Eigen::Index n = S.rows(), J = S.cols();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, J + (L - 1) * (1 + J));
    D.leftCols(J) = S;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int l = level[static_cast<std::size_t>(i)];
        if (l == 0) continue;
        D(i, J + l - 1) = 1.0;
        D.block(i, J + (L - 1) + (l - 1) * J, 1, J) = S.row(i);
    }
    QModel m;
    m.levels = L;
    m.dims = J;
    m.fit = ols_with_fallback(D, y);
    return m;
}

int argmax_first(const std::vector<double>& q) {
    double best = -std::numeric_limits<double>::infinity(), scale = 0.0;
    for (double v : q) {
        best = std::max(best, v);
        scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-9 * scale + 1e-12;
    for (std::size_t l = 0; l < q.size(); ++l)
        if (q[l] >= best - tol) return static_cast<int>(l);
    return 0;
}

Levels checked_levels(const TabularDataset& data, const std::string& treatment) {
    Levels lv = levels_of(data.column(treatment));
    if (lv.levels.size() > kMaxTreatmentLevels)
        throw Error(ErrorCode::TooManyLevels, "treatment '" + treatment + "' has " + std::to_string(lv.levels.size()) +
                                                  " levels; at most " + std::to_string(kMaxTreatmentLevels) +
                                                  " are supported");
    return lv;
}

PolicyEstimate single_stage(const TabularDataset& data, const std::string& treatment, const std::string& response,
                            const std::vector<ConditionClause>& conditions) {
    require_distinct({treatment, response});
    const Levels lv = checked_levels(data, treatment);
    const Eigen::VectorXd y = numeric_vector(data, response);
    const CovariateBlock cov = encode_covariates(data, {treatment, response});
    const int L = static_cast<int>(lv.levels.size());
    const Eigen::VectorXd s = cov.point(conditions);

    PolicyEstimate out;
    out.levels = lv.levels;
    if (L == 1) {
        out.q_values = {y.mean()};
    } else {
        const QModel m = fit_q(cov.X, lv.index, L, y);
        for (int l = 0; l < L; ++l) out.q_values.push_back(m.q(s, l));
    }
    out.action = lv.levels[static_cast<std::size_t>(argmax_first(out.q_values))];
    return out;
}

Eigen::MatrixXd stage_matrix(const TabularDataset& data, const std::vector<std::string>& cols) {
    Eigen::MatrixXd S(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) S.col(static_cast<Eigen::Index>(j)) = numeric_vector(data, cols[j]);
    return S;
}

PolicyEstimate multi_stage(const TabularDataset& data, const StageSchema& schema,
                           const std::vector<ConditionClause>& conditions) {
    const int T = schema.stages;
    std::vector<Levels> levels;
    std::vector<Eigen::MatrixXd> states;
    for (int t = 0; t < T; ++t) {
        levels.push_back(checked_levels(data, schema.treatments[static_cast<std::size_t>(t)]));
        states.push_back(stage_matrix(data, schema.states[static_cast<std::size_t>(t)]));
    }

    Eigen::VectorXd pseudo = numeric_vector(data, schema.responses.back());
    QModel first;
    for (int t = T - 1; t >= 0; --t) {
        const auto& lv = levels[static_cast<std::size_t>(t)];
        const int L = static_cast<int>(lv.levels.size());
        const Eigen::MatrixXd& S = states[static_cast<std::size_t>(t)];
        const QModel m = fit_q(S, lv.index, L, pseudo);
        if (t == 0) {
            first = m;
            break;
        }
        Eigen::VectorXd next = numeric_vector(data, schema.responses[static_cast<std::size_t>(t - 1)]);
        for (Eigen::Index i = 0; i < S.rows(); ++i) {
            const Eigen::VectorXd s = S.row(i).transpose();
            double best = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < L; ++l) best = std::max(best, m.q(s, l));
            next(i) += best;
        }
        pseudo = std::move(next);
    }

    // Query point over the stage-1 state columns.
    const auto& names = schema.states.front();
    Eigen::VectorXd s = states.front().colwise().mean().transpose();
    for (const auto& c : conditions) {
        std::optional<std::size_t> hit;
        for (std::size_t j = 0; j < names.size(); ++j)
            if (to_lower(names[j]) == to_lower(c.variable)) hit = j;
        if (!hit)
            throw Error(ErrorCode::UnknownConditionVariable,
                        "condition variable '" + c.variable + "' is not a first-stage state column");
        const double* v = std::get_if<double>(&c.value);
        if (!v)
            throw Error(ErrorCode::UnknownConditionVariable,
                        "condition " + c.variable + " = " + format_scalar(c.value) + " is not numeric");
        s(static_cast<Eigen::Index>(*hit)) = *v;
    }

    PolicyEstimate out;
    out.stages = T;
    out.levels = levels.front().levels;
    for (int l = 0; l < static_cast<int>(out.levels.size()); ++l) out.q_values.push_back(first.q(s, l));
    out.action = out.levels[static_cast<std::size_t>(argmax_first(out.q_values))];
    return out;
}

std::optional<std::string> stage_base(const TabularDataset& data, const std::string& name) {
    if (!find_ci(data, name)) {
        if (find_ci(data, name + "1")) return name;
        return std::nullopt;
    }
    if (name.size() > 1 && name.back() == '1') {
        const std::string base = name.substr(0, name.size() - 1);
        if (find_ci(data, base + "2")) return base;
    }
    return std::nullopt;
}

}  // namespace

std::optional<StageSchema> detect_stages(const TabularDataset& data, const std::string& treatment,
                                         const std::string& response) {
    const auto tbase = stage_base(data, treatment);
    if (!tbase) return std::nullopt;

    StageSchema schema;
    for (int t = 1;; ++t) {
        auto col = find_ci(data, *tbase + std::to_string(t));
        if (!col) break;
        schema.treatments.push_back(*col);
    }
    schema.stages = static_cast<int>(schema.treatments.size());
    if (schema.stages < 2)
        throw Error(ErrorCode::MalformedStageSchema,
                    "found " + *tbase + "1 but no " + *tbase + "2; a multi-stage layout needs at least two stages");

    std::string rbase = response;
    if (!find_ci(data, rbase + "1") && rbase.size() > 1 && rbase.back() == '1') rbase.pop_back();
    for (int t = 1; t <= schema.stages; ++t) {
        auto col = find_ci(data, rbase + std::to_string(t));
        if (!col)
            throw Error(ErrorCode::MalformedStageSchema,
                        "stage " + std::to_string(t) + " has no response column " + rbase + std::to_string(t));
        schema.responses.push_back(*col);
    }

    static const std::regex state_pattern(R"(^(.*[^0-9])([0-9]+)_([0-9]+)$)");
    std::vector<std::vector<std::pair<int, std::string>>> by_stage(static_cast<std::size_t>(schema.stages));
    for (const auto& name : data.names()) {
        std::smatch m;
        if (!std::regex_match(name, m, state_pattern)) continue;
        const int t = std::stoi(m[2].str());
        if (t < 1 || t > schema.stages) continue;
        by_stage[static_cast<std::size_t>(t - 1)].emplace_back(std::stoi(m[3].str()), name);
    }
    for (int t = 0; t < schema.stages; ++t) {
        auto& cols = by_stage[static_cast<std::size_t>(t)];
        if (cols.empty())
            throw Error(ErrorCode::MalformedStageSchema, "stage " + std::to_string(t + 1) + " has no state columns");
        if (cols.size() != by_stage.front().size())
            throw Error(ErrorCode::MalformedStageSchema, "stages disagree on the number of state columns");
        std::sort(cols.begin(), cols.end());
        std::vector<std::string> names;
        for (auto& [j, n] : cols) names.push_back(n);
        schema.states.push_back(std::move(names));
    }
    return schema;
}

PolicyEstimate optimize_policy(const TabularDataset& data, const std::string& treatment, const std::string& response,
                               const std::vector<ConditionClause>& conditions) {
    if (auto schema = detect_stages(data, treatment, response)) return multi_stage(data, *schema, conditions);
    return single_stage(data, resolve_column(data, treatment), resolve_column(data, response), conditions);
}

// ---------------------------------------------------------------------------
// Dispatch

std::string_view to_string(MethodId id) {
    switch (id) {
        case MethodId::PC: return "PC";
        case MethodId::DoublyRobust: return "DoublyRobust";
        case MethodId::SLearner: return "SLearner";
        case MethodId::MediationPoC: return "MediationPoC";
        case MethodId::QLearning: return "QLearning";
    }
    return "?";
}

std::string_view method_name(MethodId id) {
    switch (id) {
        case MethodId::PC: return "the PC algorithm";
        case MethodId::DoublyRobust: return "the doubly robust estimator";
        case MethodId::SLearner: return "the S-learner";
        case MethodId::MediationPoC: return "causal mediation analysis";
        case MethodId::QLearning: return "Q-learning";
    }
    return "?";
}

MethodId default_method(Task task) {
    switch (task) {
        case Task::CGL: return MethodId::PC;
        case Task::ATE: return MethodId::DoublyRobust;
        case Task::HTE: return MethodId::SLearner;
        case Task::MA: return MethodId::MediationPoC;
        case Task::OPO: return MethodId::QLearning;
    }
    return MethodId::DoublyRobust;
}

std::vector<MethodId> methods_for(Task task) {
    // The S-learner with nothing pinned is the effect at the covariate means.
    if (task == Task::ATE) return {MethodId::DoublyRobust, MethodId::SLearner};
    return {default_method(task)};
}

MethodRegistry MethodRegistry::with_defaults() {
    MethodRegistry r;
    r.register_method(MethodId::PC, [](const CausalQuery& q, const TabularDataset& d, const EngineOptions& o) {
        return ToolResult{learn_graph(d, q.nodes, o.alpha)};
    });
    r.register_method(MethodId::DoublyRobust, [](const CausalQuery& q, const TabularDataset& d, const EngineOptions&) {
        return ToolResult{EffectResult{estimate_ate(d, *q.treatment, *q.response).value}};
    });
    r.register_method(MethodId::SLearner, [](const CausalQuery& q, const TabularDataset& d, const EngineOptions&) {
        return ToolResult{EffectResult{estimate_hte(d, *q.treatment, *q.response, q.conditions).value}};
    });
    r.register_method(MethodId::MediationPoC, [](const CausalQuery& q, const TabularDataset& d, const EngineOptions&) {
        return ToolResult{estimate_mediation(d, *q.treatment, *q.response, *q.mediator).effects};
    });
    r.register_method(MethodId::QLearning, [](const CausalQuery& q, const TabularDataset& d, const EngineOptions&) {
        return ToolResult{ActionResult{optimize_policy(d, *q.treatment, *q.response, q.conditions).action}};
    });
    for (Task t : kAllTasks) r.assign(t, default_method(t));
    return r;
}

void MethodRegistry::register_method(MethodId id, Method fn) { methods_[id] = std::move(fn); }
void MethodRegistry::assign(Task task, MethodId id) { assignment_[task] = id; }

MethodId MethodRegistry::method_for(Task task) const {
    auto it = assignment_.find(task);
    return it == assignment_.end() ? default_method(task) : it->second;
}

const Method& MethodRegistry::get(MethodId id) const {
    auto it = methods_.find(id);
    if (it == methods_.end() || !it->second)
        throw Error(ErrorCode::EstimationFailed, "no estimator registered for " + std::string(to_string(id)));
    return it->second;
}

const MethodRegistry& default_registry() {
    static const MethodRegistry registry = MethodRegistry::with_defaults();
    return registry;
}

CausalQuery resolve_query(const CausalQuery& q, const TabularDataset& data) {
    CausalQuery r = q;
    if (q.task == Task::CGL) {
        if (!(q.nodes.size() == 1 && q.nodes.front() == kAllVariables))
            for (auto& n : r.nodes) n = resolve_column(data, n);
    }
    const bool staged = q.task == Task::OPO && q.treatment && q.response &&
                        detect_stages(data, *q.treatment, *q.response).has_value();
    if (!staged) {
        if (r.treatment) r.treatment = resolve_column(data, *r.treatment);
        if (r.response) r.response = resolve_column(data, *r.response);
    }
    if (r.mediator) r.mediator = resolve_column(data, *r.mediator);
    for (auto& c : r.conditions) c.variable = resolve_column(data, c.variable);
    return r;
}

ToolResult dispatch(const CausalQuery& q, const TabularDataset& data, const EngineOptions& options,
                    const MethodRegistry& registry) {
    const auto violations = validate_query(q);
    if (!violations.empty())
        throw Error(ErrorCode::InvalidQuery, "slot '" + violations.front().slot + "': " + violations.front().rule);
    const CausalQuery resolved = resolve_query(q, data);
    const Method& method = registry.get(registry.method_for(q.task));
    try {
        ToolResult result = method(resolved, data, options);
        if (!result_matches_task(q.task, result))
            throw Error(ErrorCode::EstimationFailed, "estimator returned the wrong result type for " +
                                                         std::string(to_string(q.task)));
        return result;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::EstimationFailed, e.what());
    }
}

}  // namespace causalqa
