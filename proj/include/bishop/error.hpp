#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bishop {

enum class ErrorCode {
    ParameterDimensionMismatch,
    NoConvergence,
    EllipticityViolation,
    SingularNormalizationMatrix,
    NotStarShaped,
    NoRoot,
    GridMismatch,
    AliasingRisk,
    ZeroOnCurve,
    NonzeroWinding,
    ValidityEscape,
    TargetTooCloseToBoundary,
    StencilOutOfRange,
    SpecParseError,
    SchemaViolation,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParameterDimensionMismatch: return "ParameterDimensionMismatch";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::EllipticityViolation: return "EllipticityViolation";
        case ErrorCode::SingularNormalizationMatrix: return "SingularNormalizationMatrix";
        case ErrorCode::NotStarShaped: return "NotStarShaped";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::AliasingRisk: return "AliasingRisk";
        case ErrorCode::ZeroOnCurve: return "ZeroOnCurve";
        case ErrorCode::NonzeroWinding: return "NonzeroWinding";
        case ErrorCode::ValidityEscape: return "ValidityEscape";
        case ErrorCode::TargetTooCloseToBoundary: return "TargetTooCloseToBoundary";
        case ErrorCode::StencilOutOfRange: return "StencilOutOfRange";
        case ErrorCode::SpecParseError: return "SpecParseError";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace bishop
