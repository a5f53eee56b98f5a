#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace orthoact {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedFamily,
    UnsupportedDistribution,
    DegenerateActivation,
    RankDeficient,
    NonConvergent,
    NonFiniteLoss,
    DimensionMismatch,
    ConditioningFailure,
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
        case ErrorCode::UnsupportedDistribution: return "UnsupportedDistribution";
        case ErrorCode::DegenerateActivation: return "DegenerateActivation";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NonConvergent: return "NonConvergent";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ConditioningFailure: return "ConditioningFailure";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by the training loop; carries the optimizer step that produced the bad loss.
class NonFiniteLossError : public Error {
public:
    explicit NonFiniteLossError(std::int64_t step)
        : Error(ErrorCode::NonFiniteLoss, "non-finite loss at step " + std::to_string(step)),
          step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace orthoact
