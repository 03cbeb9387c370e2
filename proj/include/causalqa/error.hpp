#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalqa {

// Every failure the library can report. The pipeline stage that raised an
// error is recoverable from its code (see stage_of).
enum class ErrorCode {
    // intent
    InvalidQuery,
    MalformedJson,
    UnknownTask,
    MissingRequiredKey,
    // parser
    EmptyQuestion,
    DatasetNotFound,
    RoleAmbiguity,
    InterpretationFailed,
    // bench / datagen
    MalformedHierarchy,
    UnknownTemplate,
    BadDims,
    UnknownConditionVariable,
    // data + engine
    Io,
    MalformedCsv,
    ColumnNotFound,
    AmbiguousColumn,
    NonBinaryTreatment,
    TooManyLevels,
    MalformedStageSchema,
    RankDeficient,
    SeparationDetected,
    InsufficientSamples,
    EstimationFailed,
    // narrator
    FormatMismatch,
    BackendUnreachable,
    // eval
    LengthMismatch,
};

enum class Stage { Intent, Interpretation, Data, Estimation, Narration, Evaluation };

std::string_view to_string(ErrorCode code);
Stage stage_of(ErrorCode code);
std::string_view to_string(Stage stage);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace causalqa
