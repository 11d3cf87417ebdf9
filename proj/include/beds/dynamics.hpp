#pragma once

// Dissipation dynamics and crystallization diagnostics.
//
//   d tau / dt = -2 gamma tau       (per spatial factor)
//   d kappa / dt = -gamma_kappa kappa
//
// mu and phi are not transported by dissipation.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "beds/error.hpp"
#include "beds/state.hpp"

namespace beds {

struct DissipationParams {
  double gamma = 0.0;
  double gamma_kappa = 0.0;
  double kT = 1.0;

  void validate() const {
    if (!(gamma >= 0.0) || !(gamma_kappa >= 0.0)) fail(ErrorKind::domain, "DissipationParams: rates must be >= 0");
    if (!(kT > 0.0)) fail(ErrorKind::domain, "DissipationParams: kT must be > 0");
  }
};

enum class Regime { fluid, transition, crystallized };

constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::fluid: return "fluid";
    case Regime::transition: return "transition";
    case Regime::crystallized: return "crystallized";
  }
  return "unknown";
}

enum class CrystalFlags { none, position, phase, complete };

constexpr std::string_view to_string(CrystalFlags f) noexcept {
  switch (f) {
    case CrystalFlags::none: return "none";
    case CrystalFlags::position: return "position";
    case CrystalFlags::phase: return "phase";
    case CrystalFlags::complete: return "complete";
  }
  return "unknown";
}

/// C = tau_bar * kappa, tau_bar the geometric mean of the spatial precisions.
inline double crystallization_index(const BedsState& s) { return mean_precision(s) * s.temporal().kappa(); }

inline Regime classify_regime(double c, double eps = 0.1) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::domain, "classify_regime: eps must lie in (0, 1)");
  if (c < eps) return Regime::fluid;
  if (c > 1.0 / eps) return Regime::crystallized;
  return Regime::transition;
}

inline CrystalFlags crystallization_flags(const BedsState& s, double tau_crit, double kappa_crit) {
  if (!(tau_crit > 0.0) || !(kappa_crit > 0.0)) fail(ErrorKind::domain, "crystallization_flags: thresholds must be > 0");
  double tau_min = s.spatial(0).tau();
  for (const auto& g : s.spatial()) tau_min = std::min(tau_min, g.tau());
  const bool pos = tau_min > tau_crit;
  const bool ph = s.temporal().kappa() > kappa_crit;
  if (pos && ph) return CrystalFlags::complete;
  if (pos) return CrystalFlags::position;
  if (ph) return CrystalFlags::phase;
  return CrystalFlags::none;
}

struct StepDiagnostics {
  double crystallization = 0.0;
  Regime regime = Regime::fluid;
};

class Trajectory {
 public:
  explicit Trajectory(double regime_eps = 0.1) : eps_(regime_eps) {}

  void push(double t, BedsState s) {
    if (!std::isfinite(t)) fail(ErrorKind::numeric_failure, "Trajectory: non-finite time");
    if (!times_.empty() && !(t > times_.back())) fail(ErrorKind::domain, "Trajectory: times must be strictly increasing");
    if (!states_.empty() && s.dim() != states_.front().dim())
      fail(ErrorKind::dimension, "Trajectory: state dimension changed");
    const double c = crystallization_index(s);
    times_.push_back(t);
    states_.push_back(std::move(s));
    diagnostics_.push_back({c, classify_regime(c, eps_)});
  }

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<BedsState>& states() const noexcept { return states_; }
  const std::vector<StepDiagnostics>& diagnostics() const noexcept { return diagnostics_; }
  const BedsState& back() const { return states_.back(); }
  double regime_eps() const noexcept { return eps_; }

 private:
  double eps_;
  std::vector<double> times_;
  std::vector<BedsState> states_;
  std::vector<StepDiagnostics> diagnostics_;
};

inline BedsState dissipate_closed_form(const BedsState& s, const DissipationParams& p, double t) {
  p.validate();
  if (!(t >= 0.0)) fail(ErrorKind::domain, "dissipate_closed_form: t must be >= 0");
  const double ft = std::exp(-2.0 * p.gamma * t);
  std::vector<GaussianBelief> sp;
  sp.reserve(s.dim());
  for (const auto& g : s.spatial()) sp.emplace_back(g.mu(), g.tau() * ft);
  const auto& v = s.temporal();
  return {std::move(sp), {v.phi(), v.kappa() * std::exp(-p.gamma_kappa * t)}};
}

/// Classical RK4 on the dissipation ODE with ceil(t_end/dt) equal steps.
inline Trajectory dissipate_rk4(const BedsState& s, const DissipationParams& p, double t_end, double dt,
                                double regime_eps = 0.1) {
  p.validate();
  if (!(dt > 0.0) || !(dt <= t_end) || !std::isfinite(t_end))
    fail(ErrorKind::domain, "dissipate_rk4: need 0 < dt <= t_end");
  const auto n = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(n);

  auto rk4 = [h](double y, double rate) {
    const double k1 = -rate * y;
    const double k2 = -rate * (y + 0.5 * h * k1);
    const double k3 = -rate * (y + 0.5 * h * k2);
    const double k4 = -rate * (y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  std::vector<double> tau(s.dim());
  std::vector<double> mu(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    tau[i] = s.spatial(i).tau();
    mu[i] = s.spatial(i).mu();
  }
  double kappa = s.temporal().kappa();
  const double phi = s.temporal().phi();

  Trajectory traj(regime_eps);
  traj.push(0.0, s);
  for (long k = 1; k <= n; ++k) {
    for (auto& x : tau) x = rk4(x, 2.0 * p.gamma);
    kappa = rk4(kappa, p.gamma_kappa);
    for (double x : tau)
      if (!std::isfinite(x) || !(x > 0.0))
        fail(ErrorKind::numeric_failure, "dissipate_rk4: precision left the domain at step " + std::to_string(k));
    if (!std::isfinite(kappa))
      fail(ErrorKind::numeric_failure, "dissipate_rk4: non-finite kappa at step " + std::to_string(k));
    std::vector<GaussianBelief> sp;
    sp.reserve(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) sp.emplace_back(mu[i], tau[i]);
    traj.push(k == n ? t_end : static_cast<double>(k) * h, BedsState(std::move(sp), {phi, kappa}));
  }
  return traj;
}

/// kappa implied by an EMA with momentum m.
inline double ema_coherence(double m) {
  if (!(m >= 0.0 && m < 1.0)) fail(ErrorKind::domain, "ema_coherence: momentum must lie in [0, 1)");
  return 1.0 / (1.0 - m);
}

/// kappa implied by a soft actor-critic entropy temperature alpha.
inline double sac_coherence(double alpha) {
  if (!(alpha > 0.0)) fail(ErrorKind::domain, "sac_coherence: alpha must be > 0");
  return 1.0 / alpha;
}

}  // namespace beds
