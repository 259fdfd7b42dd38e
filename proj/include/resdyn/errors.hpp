// errors.hpp: error codes and the exception type shared by all modules

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resdyn {

enum class ErrorCode {
    // validation
    NonHermitianCoupling,
    DimensionMismatch,
    NonPositiveBeta,
    InvalidArgument,
    RegisterTooLarge,
    BadConfiguration,
    OmegaPrimeOutOfRange,
    TooLargeForExhaustiveCheck,
    UnsupportedAnisotropy,
    DimensionTooLarge,
    ConfigError,
    // numerical
    InfraredDivergent,
    QuadratureNotConverged,
    AmbiguousClustering,
    DefectiveLevelShift,
    WeightMismatch,
    PoorFit,
};

inline constexpr std::string_view to_string(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::NonHermitianCoupling: return "NonHermitianCoupling";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::RegisterTooLarge: return "RegisterTooLarge";
        case ErrorCode::BadConfiguration: return "BadConfiguration";
        case ErrorCode::OmegaPrimeOutOfRange: return "OmegaPrimeOutOfRange";
        case ErrorCode::TooLargeForExhaustiveCheck: return "TooLargeForExhaustiveCheck";
        case ErrorCode::UnsupportedAnisotropy: return "UnsupportedAnisotropy";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InfraredDivergent: return "InfraredDivergent";
        case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorCode::AmbiguousClustering: return "AmbiguousClustering";
        case ErrorCode::DefectiveLevelShift: return "DefectiveLevelShift";
        case ErrorCode::WeightMismatch: return "WeightMismatch";
        case ErrorCode::PoorFit: return "PoorFit";
    }
    return "Unknown";
}

// Validation errors map to CLI exit code 1, numerical failures to 2.
inline constexpr bool is_numerical(ErrorCode c) noexcept {
    switch (c) {
        case ErrorCode::InfraredDivergent:
        case ErrorCode::QuadratureNotConverged:
        case ErrorCode::AmbiguousClustering:
        case ErrorCode::DefectiveLevelShift:
        case ErrorCode::WeightMismatch:
        case ErrorCode::PoorFit:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace resdyn
