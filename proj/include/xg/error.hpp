#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xg {

enum class ErrorCode {
    InvalidArgument,
    IoError,
    MissingColumn,
    OutOfRangeCoordinate,
    InvalidEnum,
    InvalidValue,
    EmptyDataset,
    EmptyPartition,
    MissingZoneModel,
    UnsupportedSpec,
    NonFiniteFeature,
    DimensionMismatch,
    VersionMismatch,
    CorruptArtifact,
    SingleClass,
    UnknownFeature,
    NotWhitelisted,
    IncompatibleArtifact,
    UsageError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::OutOfRangeCoordinate: return "OutOfRangeCoordinate";
    case ErrorCode::InvalidEnum: return "InvalidEnum";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::MissingZoneModel: return "MissingZoneModel";
    case ErrorCode::UnsupportedSpec: return "UnsupportedSpec";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptArtifact: return "CorruptArtifact";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::NotWhitelisted: return "NotWhitelisted";
    case ErrorCode::IncompatibleArtifact: return "IncompatibleArtifact";
    case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

/// Every failure in the library surfaces as this exception; `code()` is the
/// machine-readable part, `what()` the human context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace xg
