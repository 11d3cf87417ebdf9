#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace beds {

enum class ErrorKind {
  domain,               // argument outside the operation's domain
  dimension,            // mismatched vector lengths / dimensionality
  numeric_failure,      // non-finite values or a solver that failed to converge
  physical_violation,   // inputs that would break a thermodynamic bound
  insufficient_data,    // too few samples for the requested statistic
  insufficient_history, // potential update without recorded agreement
  degenerate_coherence, // kappa == 0 where the formula is singular
  divergence,           // geometric series with ratio >= 1
  config,               // invalid scenario configuration
  io,                   // unreadable / unwritable path
};

constexpr std::string_view to_string(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::numeric_failure: return "numeric_failure";
    case ErrorKind::physical_violation: return "physical_violation";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::insufficient_history: return "insufficient_history";
    case ErrorKind::degenerate_coherence: return "degenerate_coherence";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<double> residual = std::nullopt)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Final residual for solver failures, when one is available.
  std::optional<double> residual() const noexcept { return residual_; }

 private:
  ErrorKind kind_;
  std::optional<double> residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace beds
