// error.hpp - error type shared by every kerrcav module

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kerrcav {

enum class ErrorCode {
    InvalidArgument,
    BandEdge,          // sin k = 0 or xi = 0: no incident flux
    PoleAtResonance,   // |Omega_k - Omega| below the resonance epsilon
    NotLinear,
    StepUnderflow,
    NonFinite,
    SiteOutOfRange,
    DimensionMismatch,
    EigenFailure,
    Config,
    Io,
    MissingBranch,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kerrcav
