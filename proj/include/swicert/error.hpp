#pragma once

#include <stdexcept>
#include <string>

namespace swicert {

/// Failure category; the CLI maps it onto an exit code.
enum class ErrorKind {
    Dimension,
    Domain,
    NumericalFailure,
    NoUniqueSolution,
    NotPositiveDefinite,
    SynthesisUnavailable,
    Configuration,
    UndefinedStatistic,
    InconsistentBundle,
    DivergentDensity,
    InsufficientData,
    InsufficientSwitches,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::NoUniqueSolution: return "no-unique-solution";
    case ErrorKind::NotPositiveDefinite: return "not-positive-definite";
    case ErrorKind::SynthesisUnavailable: return "synthesis-unavailable";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::UndefinedStatistic: return "undefined-statistic";
    case ErrorKind::InconsistentBundle: return "inconsistent-bundle";
    case ErrorKind::DivergentDensity: return "divergent-density";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::InsufficientSwitches: return "insufficient-switches";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    /// True for failures of the numerical kernels rather than of the inputs.
    [[nodiscard]] bool is_numerical() const noexcept {
        return kind_ == ErrorKind::NumericalFailure || kind_ == ErrorKind::NoUniqueSolution;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

} // namespace swicert
