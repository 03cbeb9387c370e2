#pragma once

// Turns a tool result into a fixed one-sentence-per-fact summary, optionally
// polishes it through an HTTP language model, and checks any interpretation
// against an automated rubric.

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "causalqa/engine.hpp"
#include "causalqa/intent.hpp"

namespace causalqa {

// At most this many edges are spelled out in a graph summary.
inline constexpr std::size_t kMaxReportedEdges = 3;

// Exact template text. Effect sizes use two decimals; condition values and
// action levels print as given. Throws Error(FormatMismatch) when the result
// alternative does not belong to the task.
std::string template_summary(Task task, const ToolResult& result, const CausalQuery& q);

struct NarrationContext {
    std::string question;
    CausalQuery query;
    MethodId method = MethodId::DoublyRobust;
    ToolResult result;
};

// Rubric proxy. Meaningless variable names cannot be detected without a
// lexicon, so that fluency item is not checked.
struct RubricReport {
    std::vector<std::string> hallucination_flags;
    std::vector<std::string> incompleteness_flags;
    std::vector<std::string> fluency_flags;

    bool empty() const {
        return hallucination_flags.empty() && incompleteness_flags.empty() && fluency_flags.empty();
    }
};

inline constexpr std::size_t kMaxSentences = 6;

RubricReport lint(std::string_view text, const NarrationContext& ctx);

// Splits on sentence-final punctuation followed by whitespace or the end.
std::vector<std::string> split_sentences(std::string_view text);

inline constexpr int kPromptSentences = 4;

std::string build_interpretation_prompt(std::string_view question, Task task, MethodId method,
                                        const ToolResult& result, const CausalQuery& q);

// "This result was obtained by applying {method} to {dataset}." with any
// query variable the summary leaves out appended.
std::string completeness_sentence(const CausalQuery& q, MethodId method, std::string_view summary);

struct LlmBackendConfig {
    // http://host[:port]/path; https is not supported.
    std::string endpoint;
    // Name of the environment variable holding the bearer token.
    std::string token_env = "CAUSALQA_LLM_TOKEN";
    std::chrono::seconds timeout{30};
};

struct NarrateBackend {
    bool use_llm = false;
    LlmBackendConfig llm;

    static NarrateBackend template_only() { return {}; }
    static NarrateBackend language_model(LlmBackendConfig cfg) { return {true, std::move(cfg)}; }
};

struct Interpretation {
    enum class Source { Template, Llm };

    std::string text;
    Source source = Source::Template;
    NarrationContext context;
    // Lint findings on a rejected model reply; empty when the reply was kept.
    RubricReport rejected;
};

// Template-only: summary plus the completeness sentence. With a model
// backend the prompt is posted and the reply kept only when it lints clean.
// Throws Error(BackendUnreachable) on transport failure.
Interpretation narrate(const NarrationContext& ctx, const NarrateBackend& backend = NarrateBackend::template_only());

// Parses "http://host[:port]/path". Throws Error(BackendUnreachable) for
// anything else.
struct HttpEndpoint {
    std::string host;
    int port = 80;
    std::string path = "/";
};
HttpEndpoint parse_http_endpoint(std::string_view url);

// POSTs a JSON body with the bearer token (if set) and returns the response
// body. Throws Error(BackendUnreachable) on transport errors or non-2xx.
std::string post_json(const LlmBackendConfig& cfg, const std::string& body);

// The text of a model reply: a "text", "completion", "response" or "output"
// field, an OpenAI-style choice, or the raw body.
std::string reply_text(const std::string& body);

}  // namespace causalqa
