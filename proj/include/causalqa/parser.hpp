#pragma once

// Deterministic question interpreter: task classification by weighted
// lexical cues, slot extraction by chunking and frame cues.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/intent.hpp"

namespace causalqa {

struct Cue {
    std::string pattern;  // lowercase; matched at a word start, may be a prefix ("mediat")
    double weight = 1.0;
};

struct CueTable {
    std::map<Task, std::vector<Cue>> cues;
    // Added to HTE when the question states a condition and also carries an effect cue.
    double condition_bonus = 4.0;

    static const CueTable& defaults();
};

struct ParseContext {
    std::optional<std::vector<std::string>> known_columns;
    CueTable cues = CueTable::defaults();
    double fuzzy_threshold = 0.25;
};

struct Classification {
    Task task = Task::ATE;
    double score = 0.0;  // winning weight over the total weight, in [0, 1]
    std::map<Task, double> raw;
};

// Highest-scoring task; ties resolve MA > OPO > HTE > CGL > ATE. A question
// with no cue at all yields ATE with score 0. Throws Error(EmptyQuestion).
Classification classify_task(std::string_view question, const ParseContext& ctx = {});

// First `name.csv` token. Throws Error(DatasetNotFound).
std::string extract_dataset(std::string_view question);

struct Mention {
    std::string name;
    std::size_t begin = 0;  // byte span in the question
    std::size_t end = 0;
};

// Candidate variable mentions in order of appearance, duplicates removed.
std::vector<Mention> extract_variables(std::string_view question, const ParseContext& ctx = {});

// `name = value`, `name is set at value`, `name stands at value` and similar
// clauses, parenthesized or not. A natural-language clause followed by a
// parenthesized `alias = value` yields only the alias form.
std::vector<ConditionClause> extract_conditions(std::string_view question);

// Binds mentions to the task's slots by their nearest frame cue. Throws
// Error(RoleAmbiguity) when a required slot stays empty.
CausalQuery assign_roles(Task task, const std::vector<Mention>& mentions, std::string_view question);

// Full pipeline. Throws Error(EmptyQuestion | DatasetNotFound) as-is, and
// Error(InterpretationFailed) when no task cue fires or roles cannot be bound.
CausalQuery interpret(std::string_view question, const ParseContext& ctx = {});

}  // namespace causalqa
