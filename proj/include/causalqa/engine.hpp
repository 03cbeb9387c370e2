#pragma once

// Estimators behind each task and the dispatcher that routes a validated
// query to one of them.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "causalqa/dataset.hpp"
#include "causalqa/graph.hpp"
#include "causalqa/intent.hpp"
#include "causalqa/regression.hpp"

namespace causalqa {

inline constexpr std::size_t kMaxTreatmentLevels = 10;

struct EffectEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct MediationEstimate {
    MediationResult effects;  // total == direct + indirect exactly
    double direct_se = 0.0;
    double indirect_se = 0.0;  // delta method
};

// Doubly robust (AIPW) ATE. Covariates are every column other than the
// treatment and the response; categorical covariates are dummy coded.
// The treatment must have exactly two distinct values, mapped to 0/1 in
// sorted order. Throws Error(NonBinaryTreatment).
EffectEstimate estimate_ate(const TabularDataset& data, const std::string& treatment, const std::string& response);

// Single OLS of Y on [A, S, A*S].
class SLearnerFit {
public:
    // Fitted Y(1) - Y(0) with the given covariates pinned and the rest at
    // their sample means. Throws Error(UnknownConditionVariable).
    EffectEstimate effect_at(const std::vector<ConditionClause>& conditions) const;
    // Implied ATE: the fitted effect at the covariate means.
    double average_effect() const;
    // Mean over the rows of the fitted per-row effect.
    double row_average_effect() const;

    const std::vector<std::string>& covariates() const;

private:
    friend SLearnerFit fit_slearner(const TabularDataset&, const std::string&, const std::string&);
    struct Encoded;
    std::shared_ptr<const Encoded> enc_;
    OlsFit fit_;
};

SLearnerFit fit_slearner(const TabularDataset& data, const std::string& treatment, const std::string& response);
EffectEstimate estimate_hte(const TabularDataset& data, const std::string& treatment, const std::string& response,
                            const std::vector<ConditionClause>& conditions);

// Product of coefficients: M ~ A gives beta_m, Y ~ A + M gives beta_1 and
// beta_2; direct = beta_1, indirect = beta_m * beta_2.
MediationEstimate estimate_mediation(const TabularDataset& data, const std::string& treatment,
                                     const std::string& response, const std::string& mediator);

// Stage-indexed layout: treatments A1..AT, responses Y1..YT and state
// columns named <prefix><t>_<j>.
struct StageSchema {
    int stages = 0;
    std::vector<std::string> treatments;
    std::vector<std::string> responses;
    std::vector<std::vector<std::string>> states;  // per stage
};

// Detects a multi-stage layout for the given treatment/response base names.
// Returns nullopt for single-stage data and throws Error(MalformedStageSchema)
// when stage columns are present but incomplete.
std::optional<StageSchema> detect_stages(const TabularDataset& data, const std::string& treatment,
                                         const std::string& response);

struct PolicyEstimate {
    Scalar action;
    std::vector<Scalar> levels;     // sorted
    std::vector<double> q_values;   // per level at the query point
    int stages = 1;
};

// Q-learning. Single stage: OLS with per-level indicators and
// level x covariate interactions, argmax at the query point. Multi-stage:
// backward induction with max-Q pseudo-outcomes. Near ties go to the first
// level in sorted order. Throws Error(TooManyLevels | MalformedStageSchema).
PolicyEstimate optimize_policy(const TabularDataset& data, const std::string& treatment, const std::string& response,
                               const std::vector<ConditionClause>& conditions);

// ---------------------------------------------------------------------------
// Dispatch

enum class MethodId { PC, DoublyRobust, SLearner, MediationPoC, QLearning };

std::string_view to_string(MethodId id);
// Human-readable method name used in narrations, e.g. "the PC algorithm".
std::string_view method_name(MethodId id);
MethodId default_method(Task task);
// Every built-in method able to answer the task, default first.
std::vector<MethodId> methods_for(Task task);

struct EngineOptions {
    double alpha = kDefaultAlpha;
};

using Method = std::function<ToolResult(const CausalQuery&, const TabularDataset&, const EngineOptions&)>;

class MethodRegistry {
public:
    // Registry holding the built-in estimator for each MethodId and the
    // default task assignment.
    static MethodRegistry with_defaults();

    void register_method(MethodId id, Method fn);
    void assign(Task task, MethodId id);
    MethodId method_for(Task task) const;
    const Method& get(MethodId id) const;

private:
    std::map<MethodId, Method> methods_;
    std::map<Task, MethodId> assignment_;
};

const MethodRegistry& default_registry();

// Rewrites every variable of the query to the dataset column it resolves to.
// Throws Error(ColumnNotFound | AmbiguousColumn).
CausalQuery resolve_query(const CausalQuery& q, const TabularDataset& data);

// Validates and resolves the query, then runs the assigned method. Failures
// outside the error taxonomy surface as Error(EstimationFailed).
ToolResult dispatch(const CausalQuery& q, const TabularDataset& data, const EngineOptions& options = {},
                    const MethodRegistry& registry = default_registry());

}  // namespace causalqa
