#pragma once

// Fixed-step descent on the BEDS loss, plain or natural.

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "beds/dynamics.hpp"
#include "beds/error.hpp"
#include "beds/regularizers.hpp"

namespace beds {

enum class Method { plain, natural };

constexpr std::string_view to_string(Method m) noexcept { return m == Method::plain ? "plain" : "natural"; }

/// Data term of the objective; an empty `loss` means data == 0.
struct DataObjective {
  std::function<double(const BedsState&)> loss;
  std::function<BedsGradient(const BedsState&)> gradient;
};

struct OptimizeOptions {
  double lambda = 1.0;
  double eta = 0.05;
  int steps = 100;
  Method method = Method::natural;
};

struct OptimizeResult {
  Trajectory trajectory;              // t = step index, initial state included
  std::vector<LossBreakdown> losses;  // one per trajectory entry
  int phi_skips = 0;                  // natural steps taken with kappa == 0
};

inline OptimizeResult optimize(const BedsState& init, const BedsTarget& target, const DataObjective& data,
                               const OptimizeOptions& opt) {
  if (opt.steps < 1) fail(ErrorKind::domain, "optimize: steps must be >= 1");
  if (!(opt.eta > 0.0)) fail(ErrorKind::domain, "optimize: eta must be > 0");

  auto evaluate = [&](const BedsState& s, int step) {
    const double d = data.loss ? data.loss(s) : 0.0;
    auto lb = beds_loss(s, target, opt.lambda, d, DegeneratePolicy::penalty);
    if (!std::isfinite(lb.total))
      fail(ErrorKind::numeric_failure, "optimize: non-finite loss at step " + std::to_string(step));
    return lb;
  };

  OptimizeResult out;
  BedsState s = init;
  out.trajectory.push(0.0, s);
  out.losses.push_back(evaluate(s, 0));
  for (int k = 1; k <= opt.steps; ++k) {
    const BedsGradient dg = data.gradient ? data.gradient(s) : BedsGradient{};
    const auto g = beds_loss_gradient(s, target, opt.lambda, dg, DegeneratePolicy::penalty);
    if (opt.method == Method::plain) {
      s = gradient_step(s, g, opt.eta);
    } else {
      auto ns = natural_gradient_step(s, g, opt.eta);
      out.phi_skips += ns.phi_skipped ? 1 : 0;
      s = std::move(ns.state);
    }
    out.trajectory.push(static_cast<double>(k), s);
    out.losses.push_back(evaluate(s, k));
  }
  return out;
}

}  // namespace beds
