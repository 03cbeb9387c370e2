#include "causalqa/error.hpp"

namespace causalqa {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::MissingRequiredKey: return "MissingRequiredKey";
    case ErrorCode::EmptyQuestion: return "EmptyQuestion";
    case ErrorCode::DatasetNotFound: return "DatasetNotFound";
    case ErrorCode::RoleAmbiguity: return "RoleAmbiguity";
    case ErrorCode::InterpretationFailed: return "InterpretationFailed";
    case ErrorCode::MalformedHierarchy: return "MalformedHierarchy";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::UnknownConditionVariable: return "UnknownConditionVariable";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::ColumnNotFound: return "ColumnNotFound";
    case ErrorCode::AmbiguousColumn: return "AmbiguousColumn";
    case ErrorCode::NonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::MalformedStageSchema: return "MalformedStageSchema";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SeparationDetected: return "SeparationDetected";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EstimationFailed: return "EstimationFailed";
    case ErrorCode::FormatMismatch: return "FormatMismatch";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    }
    return "Unknown";
}

Stage stage_of(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidQuery:
    case ErrorCode::MalformedJson:
    case ErrorCode::UnknownTask:
    case ErrorCode::MissingRequiredKey:
        return Stage::Intent;
    case ErrorCode::EmptyQuestion:
    case ErrorCode::DatasetNotFound:
    case ErrorCode::RoleAmbiguity:
    case ErrorCode::InterpretationFailed:
        return Stage::Interpretation;
    case ErrorCode::Io:
    case ErrorCode::MalformedCsv:
    case ErrorCode::MalformedHierarchy:
    case ErrorCode::UnknownTemplate:
    case ErrorCode::BadDims:
        return Stage::Data;
    case ErrorCode::FormatMismatch:
    case ErrorCode::BackendUnreachable:
        return Stage::Narration;
    case ErrorCode::LengthMismatch:
        return Stage::Evaluation;
    default:
        return Stage::Estimation;
    }
}

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::Intent: return "intent";
    case Stage::Interpretation: return "interpretation";
    case Stage::Data: return "data";
    case Stage::Estimation: return "estimation";
    case Stage::Narration: return "narration";
    case Stage::Evaluation: return "evaluation";
    }
    return "?";
}

}  // namespace causalqa
