#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wsc {

enum class ErrorKind {
    EmptyDataset,
    ShapeMismatch,
    ComplianceViolation,
    NonBinaryIndicator,
    MissingValue,
    ParseError,
    InvalidSchema,
    UnknownCovariate,
    NonBinaryCovariate,
    InvalidSpec,
    CalibrationFailure,
    DegenerateScenario,
    DegenerateDesign,
    AllOneClass,
    EmptyInput,
    ZeroWeightSum,
    InvalidConfig,
    NoControlGroup,
    NoTreatmentGroup,
    NoCompliers,
    NoExposed,
    NoUnexposed,
    InsufficientUnexposed,
    NoMatches,
    EmptyGroup,
    TooManyFailedReplicates,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-readable kind; the CLI
// reports the kind name verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace wsc
