#pragma once

// Extraction accuracy per query key and end-to-end pass / relevance / win
// rates against analytic golden labels.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/bench.hpp"
#include "causalqa/datagen.hpp"
#include "causalqa/pipeline.hpp"

namespace causalqa {

// Lowercase, underscores to spaces, trim; then either string must be a
// token-boundary substring of the other.
bool soft_match(std::string_view predicted, std::string_view gold);

// Report keys in display order.
inline constexpr std::string_view kQueryKeys[] = {"causal_task", "dataset", "nodes",    "treatment",
                                                  "response",    "mediator", "condition"};

struct KeyScore {
    std::size_t correct = 0;
    std::size_t total = 0;  // golds carrying the key
    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

using KeyAccuracy = std::map<std::string, KeyScore, std::less<>>;

// A missing prediction (nullopt) scores zero on every key its gold carries.
// Throws Error(LengthMismatch).
KeyAccuracy key_accuracy(const std::vector<std::optional<CausalQuery>>& predictions,
                         const std::vector<CausalQuery>& golds);
KeyAccuracy key_accuracy(const std::vector<CausalQuery>& predictions, const std::vector<CausalQuery>& golds);

// Win tolerance for effect sizes: max(0.1, 5% of |truth|).
double effect_tolerance(double truth);
bool effect_within(double estimate, double truth);

// F1 of the undirected skeletons, matched by node name. Two empty skeletons
// score 1.
double skeleton_f1(const GraphResult& estimate, const GraphTruth& truth);
inline constexpr double kMinSkeletonF1 = 0.8;

struct CaseData {
    TabularDataset data;
    GoldenLabel truth;
};

inline constexpr int kDefaultCaseRows = 10000;
inline constexpr int kCaseCovariates = 3;

// Synthetic dataset for a golden query with columns named after its
// variables. Covariates borrow the topic's other variable names when the
// hierarchy knows the topic. Condition covariates are centred near their
// queried value so the question stays inside the data's support.
CaseData make_case_data(const CausalQuery& golden, const TopicHierarchy* h, std::uint64_t seed,
                        int rows = kDefaultCaseRows);

// Whether a tool result counts as a win against the golden label.
bool result_wins(const ToolResult& result, const GoldenLabel& truth);

using PipelineFn = std::function<PipelineOutput(const std::string& question, const TabularDataset& data)>;

struct CaseTrace {
    std::size_t index = 0;
    Task task = Task::ATE;
    std::string question;
    bool pass = false;
    bool relevance = false;
    bool win = false;
    std::string intent_json;  // empty when interpretation failed
    std::string result_json;
    std::string truth_json;
    std::string interpretation;
    std::string error;  // "<stage>: <message>" on failure
};

struct TaskRates {
    std::size_t cases = 0;
    std::size_t passed = 0;
    std::size_t relevant = 0;
    std::size_t won = 0;

    double pass() const { return cases ? static_cast<double>(passed) / static_cast<double>(cases) : 0.0; }
    double relevance() const { return cases ? static_cast<double>(relevant) / static_cast<double>(cases) : 0.0; }
    double win() const { return cases ? static_cast<double>(won) / static_cast<double>(cases) : 0.0; }
};

struct EvalReport {
    KeyAccuracy keys;                 // rule-parser extraction over the bench
    std::map<Task, TaskRates> rates;  // only tasks present in the bench
    std::vector<CaseTrace> cases;
    std::uint64_t seed = 0;
    int rows = kDefaultCaseRows;
};

struct EndToEndConfig {
    std::uint64_t seed = 0;
    int rows = kDefaultCaseRows;
    const TopicHierarchy* hierarchy = nullptr;
};

// Runs every record through the pipeline on a freshly generated dataset.
// Failures are counted, never thrown.
EvalReport end_to_end(const std::vector<QueryBenchRecord>& records, const PipelineFn& pipeline,
                      const EndToEndConfig& config);

std::string report_to_json(const EvalReport& report);
// Aligned plain-text table: one column per task, rows for the three rates,
// followed by the extraction accuracies.
std::string report_table(const EvalReport& report);

}  // namespace causalqa
