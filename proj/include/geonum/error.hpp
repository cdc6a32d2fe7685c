#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geonum {

enum class ErrorCode {
    EmptyInput,
    SingularBasis,
    NotInLattice,
    DimensionMismatch,
    InvalidVolume,
    EmptyRegion,
    InvalidLattice,
    ZeroVector,
    TupleTooLong,
    EnumerationBudgetExceeded,
    BadTupleOrder,
    CombinatorialBudgetExceeded,
    InsufficientData,
    DomainError,
    BadOrder,
    InvalidTerm,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::NotInLattice: return "NotInLattice";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidVolume: return "InvalidVolume";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::InvalidLattice: return "InvalidLattice";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TupleTooLong: return "TupleTooLong";
    case ErrorCode::EnumerationBudgetExceeded: return "EnumerationBudgetExceeded";
    case ErrorCode::BadTupleOrder: return "BadTupleOrder";
    case ErrorCode::CombinatorialBudgetExceeded: return "CombinatorialBudgetExceeded";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::InvalidTerm: return "InvalidTerm";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the library is reported through this exception; `code()`
/// identifies the failure class, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace geonum
