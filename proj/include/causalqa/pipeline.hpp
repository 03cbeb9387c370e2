#pragma once

// Question -> intent -> tool result -> interpretation.

#include <optional>
#include <string>
#include <string_view>

#include "causalqa/dataset.hpp"
#include "causalqa/engine.hpp"
#include "causalqa/narrator.hpp"
#include "causalqa/parser.hpp"

namespace causalqa {

// Asks an HTTP model for the intent. The request carries the question and a
// function schema per task; the reply may be canonical query JSON or a
// function call {name, arguments}. Throws Error(BackendUnreachable) on
// transport failure and Error(InterpretationFailed) on an unusable reply.
CausalQuery interpret_with_llm(std::string_view question, const LlmBackendConfig& cfg);

// The function schemas sent to the model, one per task.
std::string interpretation_tools_json();

// Maps a function-call reply onto a query. Throws Error(InterpretationFailed).
CausalQuery query_from_function_call(std::string_view reply);

struct PipelineOptions {
    EngineOptions engine;
    NarrateBackend narrator = NarrateBackend::template_only();
    // When set, intents come from the model instead of the rule parser.
    std::optional<LlmBackendConfig> interpreter;
};

struct PipelineOutput {
    CausalQuery intent;
    MethodId method = MethodId::DoublyRobust;
    ToolResult result;
    Interpretation interpretation;
};

// A failure after the intent was produced; keeps the intent for scoring.
class PipelineError : public Error {
public:
    PipelineError(const Error& cause, CausalQuery intent)
        : Error(cause.code(), strip_code(cause.what())), intent_(std::move(intent)) {}

    const CausalQuery& intent() const noexcept { return intent_; }

private:
    static std::string strip_code(std::string_view what) {
        const auto colon = what.find(": ");
        return std::string(colon == std::string_view::npos ? what : what.substr(colon + 2));
    }
    CausalQuery intent_;
};

// Variables are parsed against the dataset's own column names. Errors keep
// their codes, so stage_of(code) tells which step failed; anything thrown
// after interpretation is a PipelineError.
PipelineOutput run_pipeline(std::string_view question, const TabularDataset& data, const PipelineOptions& options = {},
                            const MethodRegistry& registry = default_registry());

}  // namespace causalqa
