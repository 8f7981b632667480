#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace moran {

enum class ErrorCode {
    BoundViolation,
    WeightViolation,
    MassViolation,
    InvalidDepth,
    DomainError,
    InputTooShort,
    OverflowGuard,
    AddressTooDeep,
    EnumerationCapExceeded,
    MissingWeights,
    TargetOutOfRange,
    DepthExceeded,
    NoAdmissibleWindow,
    PreconditionViolated,
    HypothesisViolated,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::WeightViolation: return "WeightViolation";
    case ErrorCode::MassViolation: return "MassViolation";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::AddressTooDeep: return "AddressTooDeep";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::MissingWeights: return "MissingWeights";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NoAdmissibleWindow: return "NoAdmissibleWindow";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Process exit code for the CLI: 2 validation, 3 range, 4 resource cap.
constexpr int exit_code(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::TargetOutOfRange:
    case ErrorCode::DomainError:
        return 3;
    case ErrorCode::OverflowGuard:
    case ErrorCode::EnumerationCapExceeded:
    case ErrorCode::DepthExceeded:
    case ErrorCode::NoAdmissibleWindow:
        return 4;
    default:
        return 2;
    }
}

struct Diagnostic {
    ErrorCode code;
    std::string message;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Carries every violated invariant found during validation. code() is the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics)
        : Error(diagnostics.front().code, join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

    bool has(ErrorCode code) const noexcept {
        for (const auto& d : diagnostics_)
            if (d.code == code) return true;
        return false;
    }

private:
    static std::string join(const std::vector<Diagnostic>& ds) {
        std::string out = ds.front().message;
        for (std::size_t i = 1; i < ds.size(); ++i) {
            out += "; ";
            out += to_string(ds[i].code);
            out += ": ";
            out += ds[i].message;
        }
        return out;
    }

    std::vector<Diagnostic> diagnostics_;
};

}  // namespace moran
