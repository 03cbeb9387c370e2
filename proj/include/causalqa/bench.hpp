#pragma once

// Benchmark construction: topic hierarchy -> sampled golden query ->
// templated question, plus interpretation pairs with random tool outputs.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/engine.hpp"
#include "causalqa/intent.hpp"
#include "causalqa/rng.hpp"

namespace causalqa {

enum class VarType { Discrete, Continuous };

std::string_view to_string(VarType t);

struct VariableSpec {
    std::string name;
    VarType vtype = VarType::Continuous;
};

struct TopicNode {
    std::string name;
    std::vector<VariableSpec> variables;
};

inline constexpr std::size_t kMinTopicVariables = 4;

struct TopicHierarchy {
    std::vector<TopicNode> topics;

    const TopicNode* find(std::string_view topic) const;
};

// JSON {topics: [{name, variables: [{name, vtype}]}]}. Throws
// Error(MalformedHierarchy) on bad JSON, no topics, duplicate names,
// non-identifier names or a topic with fewer than kMinTopicVariables.
TopicHierarchy parse_hierarchy(std::string_view json);
TopicHierarchy load_hierarchy(const std::filesystem::path& path);

// Probability that a sampled graph query asks about every column.
inline constexpr double kAllVariablesProbability = 0.3;

// One topic, variables drawn without replacement. Condition values: discrete
// -> integer in 0..4, continuous -> Uniform[0, 1] at two decimals.
CausalQuery sample_query(Task task, const TopicHierarchy& h, Rng& rng);

std::size_t template_count(Task task);

// Every slot value appears verbatim in the text. `rng` drives the lexical
// jitter (verb synonyms, condition phrasing, long-form variable names).
// Throws Error(UnknownTemplate).
std::string render_question(const CausalQuery& q, std::size_t template_id, Rng& rng);

struct QueryBenchRecord {
    std::string question;
    CausalQuery golden;
    std::size_t template_id = 0;
    std::uint64_t seed = 0;  // Rng(seed) replays sample_query and render_question
};

// n_per_task distinct questions per task, tasks in kAllTasks order.
std::vector<QueryBenchRecord> generate_retrieval_bench(std::size_t n_per_task, const TopicHierarchy& h,
                                                       std::uint64_t seed);

struct InterpretBenchRecord {
    std::string question;
    CausalQuery golden;
    Task task = Task::ATE;
    MethodId method = MethodId::DoublyRobust;
    ToolResult function_output;
    std::string template_summary;
};

// Random tool output in the task's format for the golden query. Graph
// queries over all_variables draw their nodes from the dataset's topic.
ToolResult sample_tool_result(const CausalQuery& q, const TopicHierarchy& h, Rng& rng);

std::vector<InterpretBenchRecord> generate_interpret_bench(const std::vector<QueryBenchRecord>& records,
                                                           const TopicHierarchy& h, std::uint64_t seed);

// One JSON object per line.
std::string to_jsonl(const std::vector<QueryBenchRecord>& records);
std::vector<QueryBenchRecord> parse_bench_jsonl(std::string_view text);
std::string to_jsonl(const std::vector<InterpretBenchRecord>& records);

}  // namespace causalqa
