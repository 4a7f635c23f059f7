#include "ffdlab/error.hpp"

namespace ffdlab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::UnparseableRow: return "UnparseableRow";
        case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
        case ErrorCode::OHLCViolation: return "OHLCViolation";
        case ErrorCode::IncompatiblePeriod: return "IncompatiblePeriod";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::SingularRegression: return "SingularRegression";
        case ErrorCode::NoPassingD: return "NoPassingD";
        case ErrorCode::DegenerateBarrier: return "DegenerateBarrier";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidBounds: return "InvalidBounds";
        case ErrorCode::ObjectiveFailure: return "ObjectiveFailure";
        case ErrorCode::DegenerateCurve: return "DegenerateCurve";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::StageFailure: return "StageFailure";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, std::optional<std::size_t> line) {
    std::string out{to_string(code)};
    if (line) {
        out += "(" + std::to_string(*line) + ")";
    }
    if (!message.empty()) {
        out += ": " + message;
    }
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(compose(code, message, line)), code_(code), line_(line) {}

}  // namespace ffdlab
