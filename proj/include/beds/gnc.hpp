#pragma once

// Graduated non-convexity with KL dissipation toward a prior:
//
//   min_q  E_q[(1 - alpha) L_smooth + alpha L_target] + beta KL(q || prior)
//
// over Gaussian q = (m, tau), swept along a sampled (alpha, beta) schedule.
// The expectation uses 16-node Gauss-Hermite quadrature; its gradient uses the
// Stein identities dE/dm = E[L z]/sigma and dE/dsigma = E[L (z^2 - 1)]/sigma.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "beds/error.hpp"
#include "beds/geometry.hpp"

namespace beds {

using ScalarObjective = std::function<double(double)>;

inline double effective_temperature(double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::domain, "effective_temperature: beta must be > 0");
  return 1.0 / beta;
}

inline double gnc_objective(double theta, double alpha, const ScalarObjective& smooth, const ScalarObjective& target) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "gnc_objective: alpha must lie in [0, 1]");
  if (alpha == 0.0) return smooth(theta);
  if (alpha == 1.0) return target(theta);
  return (1.0 - alpha) * smooth(theta) + alpha * target(theta);
}

struct GncSchedule {
  std::vector<double> alpha;
  std::vector<double> beta;

  void validate() const {
    if (alpha.size() < 2 || alpha.size() != beta.size())
      fail(ErrorKind::domain, "GncSchedule: alpha and beta need the same length >= 2");
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) fail(ErrorKind::domain, "GncSchedule: alpha must lie in [0, 1]");
      if (i > 0 && alpha[i] < alpha[i - 1]) fail(ErrorKind::domain, "GncSchedule: alpha must be nondecreasing");
      if (!(beta[i] > 0.0) || !std::isfinite(beta[i])) fail(ErrorKind::domain, "GncSchedule: beta must be > 0");
    }
    if (alpha.front() > 0.05 || alpha.back() < 0.95)
      fail(ErrorKind::domain, "GncSchedule: alpha must start <= 0.05 and end >= 0.95");
  }

  /// alpha linear from 0 to 1 over n samples, beta = beta0 + (beta1 - beta0) alpha.
  static GncSchedule coupled(std::size_t n, double beta0, double beta1) {
    GncSchedule s;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
      s.alpha.push_back(a);
      s.beta.push_back(beta0 + (beta1 - beta0) * a);
    }
    return s;
  }
};

namespace detail {

// Physicists' Gauss-Hermite rule (weight e^{-x^2}), Newton on the orthonormal
// recurrence.
template <int N>
std::pair<std::array<double, N>, std::array<double, N>> gauss_hermite() {
  std::array<double, N> x{}, w{};
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < (N + 1) / 2; ++i) {
    if (i == 0) z = std::sqrt(2.0 * N + 1.0) - 1.85575 * std::pow(2.0 * N + 1.0, -1.0 / 6.0);
    else if (i == 1) z -= 1.14 * std::pow(static_cast<double>(N), 0.426) / z;
    else if (i == 2) z = 1.86 * z - 0.86 * x[0];
    else if (i == 3) z = 1.91 * z - 0.91 * x[1];
    else z = 2.0 * z - x[i - 2];
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= N; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * N) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    x[i] = z;
    x[N - 1 - i] = -z;
    w[i] = w[N - 1 - i] = 2.0 / (pp * pp);
  }
  return {x, w};
}

struct StandardNormalRule {
  std::array<double, 16> z{};
  std::array<double, 16> w{};
  StandardNormalRule() {
    const auto [x, wh] = gauss_hermite<16>();
    for (int i = 0; i < 16; ++i) {
      z[i] = std::numbers::sqrt2 * x[i];
      w[i] = wh[i] / std::sqrt(std::numbers::pi);
    }
  }
};

inline const StandardNormalRule& normal_rule() {
  static const StandardNormalRule rule;
  return rule;
}

}  // namespace detail

/// E_{N(m, 1/tau)}[f] by 16-node Gauss-Hermite.
inline double gaussian_expectation(const GaussianBelief& q, const ScalarObjective& f) {
  const auto& r = detail::normal_rule();
  const double s = q.sigma();
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) acc += r.w[i] * f(q.mu() + s * r.z[i]);
  if (!std::isfinite(acc)) fail(ErrorKind::numeric_failure, "gaussian_expectation: non-finite quadrature value");
  return acc;
}

struct GncStage {
  double alpha = 0.0;
  double beta = 0.0;
  double temperature = 0.0;
  GaussianBelief q{0.0, 1.0};
  double objective = 0.0;  // E_q[L_alpha] + beta KL(q || prior) at stage end
};

struct GncOptions {
  int steps_per_stage = 50;
  double eta = 0.5;
  double max_step = 0.25;  // trust radius in Fisher-Rao length per step
};

namespace detail {

struct GncEval {
  double value = 0.0;
  double d_mu = 0.0;
  double d_tau = 0.0;
};

inline GncEval gnc_eval(const GaussianBelief& q, double alpha, double beta, const GaussianBelief& prior,
                        const ScalarObjective& smooth, const ScalarObjective& target) {
  const auto& r = normal_rule();
  const double s = q.sigma();
  double e = 0.0, em = 0.0, es = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double l = gnc_objective(q.mu() + s * r.z[i], alpha, smooth, target);
    e += r.w[i] * l;
    em += r.w[i] * l * r.z[i];
    es += r.w[i] * l * (r.z[i] * r.z[i] - 1.0);
  }
  if (!std::isfinite(e) || !std::isfinite(em) || !std::isfinite(es))
    fail(ErrorKind::numeric_failure, "run_gnc: quadrature produced a non-finite value");
  const double tp = prior.tau();
  const double dm = q.mu() - prior.mu();
  GncEval out;
  out.value = e + beta * gaussian_kl(q, prior);
  out.d_mu = em / s + beta * tp * dm;
  // dsigma/dtau = -sigma^3 / 2
  out.d_tau = -0.5 * s * s * es + beta * 0.5 * (1.0 / q.tau() - tp / (q.tau() * q.tau()));
  return out;
}

}  // namespace detail

/// Natural-gradient descent on each schedule sample, in (m, ln tau) so that
/// tau stays positive, with a Fisher-length trust radius and Armijo
/// backtracking.
inline std::vector<GncStage> run_gnc(const GaussianBelief& init, const GncSchedule& schedule, const GaussianBelief& prior,
                                     const ScalarObjective& target, const ScalarObjective& smooth,
                                     const GncOptions& opt = {}) {
  schedule.validate();
  if (opt.steps_per_stage < 1) fail(ErrorKind::domain, "run_gnc: steps_per_stage must be >= 1");
  if (!(opt.eta > 0.0)) fail(ErrorKind::domain, "run_gnc: eta must be > 0");

  std::vector<GncStage> out;
  out.reserve(schedule.alpha.size());
  GaussianBelief q = init;
  for (std::size_t st = 0; st < schedule.alpha.size(); ++st) {
    const double a = schedule.alpha[st];
    const double b = schedule.beta[st];
    auto cur = detail::gnc_eval(q, a, b, prior, smooth, target);
    for (int k = 0; k < opt.steps_per_stage; ++k) {
      // Natural direction: metric tau for m, 1/2 for ln tau.
      const double step_m = cur.d_mu / q.tau();
      const double step_l = 2.0 * q.tau() * cur.d_tau;
      const double slope = cur.d_mu * step_m + q.tau() * cur.d_tau * step_l;
      if (!(slope > 0.0)) break;
      double h = opt.eta / (1.0 + b);
      // Fisher length of the step h (step_m, step_l) under tau dm^2 + dl^2 / 2.
      const double len = std::sqrt(q.tau() * step_m * step_m + 0.5 * step_l * step_l);
      if (h * len > opt.max_step) h = opt.max_step / len;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, h *= 0.5) {
        const double tau_new = q.tau() * std::exp(-h * step_l);
        if (!(tau_new > 0.0) || !std::isfinite(tau_new)) continue;
        const GaussianBelief trial(q.mu() - h * step_m, tau_new);
        const auto ev = detail::gnc_eval(trial, a, b, prior, smooth, target);
        if (ev.value <= cur.value - 1e-4 * h * slope) {
          q = trial;
          cur = ev;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    out.push_back({a, b, effective_temperature(b), q, cur.value});
  }
  return out;
}

}  // namespace beds
