#include "wsc/error.hpp"

namespace wsc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::ComplianceViolation: return "ComplianceViolation";
        case ErrorKind::NonBinaryIndicator: return "NonBinaryIndicator";
        case ErrorKind::MissingValue: return "MissingValue";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InvalidSchema: return "InvalidSchema";
        case ErrorKind::UnknownCovariate: return "UnknownCovariate";
        case ErrorKind::NonBinaryCovariate: return "NonBinaryCovariate";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::CalibrationFailure: return "CalibrationFailure";
        case ErrorKind::DegenerateScenario: return "DegenerateScenario";
        case ErrorKind::DegenerateDesign: return "DegenerateDesign";
        case ErrorKind::AllOneClass: return "AllOneClass";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::ZeroWeightSum: return "ZeroWeightSum";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::NoControlGroup: return "NoControlGroup";
        case ErrorKind::NoTreatmentGroup: return "NoTreatmentGroup";
        case ErrorKind::NoCompliers: return "NoCompliers";
        case ErrorKind::NoExposed: return "NoExposed";
        case ErrorKind::NoUnexposed: return "NoUnexposed";
        case ErrorKind::InsufficientUnexposed: return "InsufficientUnexposed";
        case ErrorKind::NoMatches: return "NoMatches";
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::TooManyFailedReplicates: return "TooManyFailedReplicates";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace wsc
