#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ffdlab {

enum class ErrorCode {
    InvalidArgument,
    Io,
    MissingColumn,
    UnparseableRow,
    NonMonotonicTimestamp,
    OHLCViolation,
    IncompatiblePeriod,
    NonConvergence,
    SeriesTooShort,
    DegenerateVariance,
    DegenerateInput,
    SingularRegression,
    NoPassingD,
    DegenerateBarrier,
    ConstantColumn,
    RankDeficient,
    AlignmentMismatch,
    DimensionMismatch,
    NonFiniteLoss,
    LengthMismatch,
    EmptyInput,
    InvalidBounds,
    ObjectiveFailure,
    DegenerateCurve,
    InvalidParams,
    StageFailure,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this type. `line` carries a
// 1-based data-row number for CSV errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

}  // namespace ffdlab
