#pragma once

// Structured causal intent: the record a question is interpreted into, the
// tool outputs the engine produces, and their canonical JSON forms.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causalqa/error.hpp"

namespace causalqa {

enum class Category { CSL, CEL, CPL };
enum class Task { CGL, ATE, HTE, MA, OPO };

inline constexpr Task kAllTasks[] = {Task::CGL, Task::ATE, Task::HTE, Task::MA, Task::OPO};

// Placeholder node list meaning "every column of the dataset".
inline constexpr std::string_view kAllVariables = "all_variables";

Category category_of(Task task);
std::string_view to_string(Task task);
std::string_view to_string(Category category);
std::optional<Task> task_from_string(std::string_view name);

// A condition value or a treatment level: numeric when it parses as a number,
// otherwise the verbatim text (letter levels such as "C").
using Scalar = std::variant<double, std::string>;

// Parses `text` as a number if the whole string is numeric, else keeps it.
Scalar make_scalar(std::string_view text);
// Shortest round-trip decimal for numbers, verbatim text otherwise.
std::string format_scalar(const Scalar& value);
bool scalar_equal(const Scalar& a, const Scalar& b, double tol = 1e-9);

bool is_identifier(std::string_view s);

struct ConditionClause {
    std::string variable;
    Scalar value;

    bool operator==(const ConditionClause&) const = default;
};

struct CausalQuery {
    Task task = Task::ATE;
    std::string dataset;
    std::vector<std::string> nodes;  // CGL only
    std::optional<std::string> treatment;
    std::optional<std::string> response;
    std::optional<std::string> mediator;
    std::vector<ConditionClause> conditions;

    bool operator==(const CausalQuery&) const = default;

    // Every variable named by the query (nodes, roles, condition variables),
    // excluding the all_variables placeholder.
    std::vector<std::string> variables() const;
};

enum class ViolationKind { MissingRequiredKey, UnexpectedKey, EmptyNodes, InvalidIdentifier };

struct Violation {
    ViolationKind kind;
    std::string slot;
    std::string rule;

    bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_query(const CausalQuery& q);

// Canonical JSON: causal_problem first, then dataset, then the task's own
// keys. Scalar slots are single-element lists, conditions are [name, value]
// pairs. Throws Error(InvalidQuery) if the slot invariant is violated.
std::string serialize_query(const CausalQuery& q);

// Throws Error(MalformedJson | UnknownTask | MissingRequiredKey | InvalidQuery).
CausalQuery parse_query_json(std::string_view text);

// ---------------------------------------------------------------------------
// Tool results

struct GraphResult {
    std::vector<std::string> nodes;
    // adjacency[i][j] == 1 means an edge i -> j; an undirected edge sets both.
    std::vector<std::vector<int>> adjacency;
    // Evidence strength per pair (larger is more significant); may be empty.
    std::vector<std::vector<double>> strength;

    struct Edge {
        std::size_t from;
        std::size_t to;
        bool directed;
        double strength;
    };
    // One entry per adjacent pair, sorted by decreasing strength then by
    // (from, to). Undirected pairs are reported as lower index -> higher.
    std::vector<Edge> edges() const;
    std::size_t pair_count() const { return edges().size(); }
};

struct EffectResult {
    double value = 0.0;
};

struct MediationResult {
    double total = 0.0;
    double direct = 0.0;
    double indirect = 0.0;
};

struct ActionResult {
    Scalar level;
};

using ToolResult = std::variant<GraphResult, EffectResult, MediationResult, ActionResult>;

// The result alternative a task is expected to produce.
bool result_matches_task(Task task, const ToolResult& result);
std::string tool_result_to_json(const ToolResult& result);
ToolResult tool_result_from_json(std::string_view text);

}  // namespace causalqa
