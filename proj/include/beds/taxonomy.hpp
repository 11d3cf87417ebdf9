#pragma once

// Six-class trajectory taxonomy.
//
// Each component (tau_bar, kappa) is crystallizable if its trailing window has
// settled, maintainable otherwise. When both components agree the problem is
// coupled (C-full / M-full). When they disagree, the component with the larger
// log-range over the whole trajectory is dominant and its own regime names the
// class: tau dominant gives C-tau or M-tau, kappa dominant gives C-kappa or
// M-kappa. Ties resolve to the crystallizable side.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string_view>
#include <vector>

#include "beds/dynamics.hpp"
#include "beds/error.hpp"

namespace beds {

enum class ComponentRegime { crystallizable, maintainable };
enum class TaxonomyClass { c_tau, c_kappa, c_full, m_tau, m_kappa, m_full };

constexpr std::string_view to_string(ComponentRegime r) noexcept {
  return r == ComponentRegime::crystallizable ? "crystallizable" : "maintainable";
}

constexpr std::string_view to_string(TaxonomyClass c) noexcept {
  switch (c) {
    case TaxonomyClass::c_tau: return "C-tau";
    case TaxonomyClass::c_kappa: return "C-kappa";
    case TaxonomyClass::c_full: return "C-full";
    case TaxonomyClass::m_tau: return "M-tau";
    case TaxonomyClass::m_kappa: return "M-kappa";
    case TaxonomyClass::m_full: return "M-full";
  }
  return "unknown";
}

enum class Dominance { tau, kappa };

struct TaxonomyLabel {
  ComponentRegime tau_regime = ComponentRegime::crystallizable;
  ComponentRegime kappa_regime = ComponentRegime::crystallizable;
  TaxonomyClass cls = TaxonomyClass::c_full;

  friend bool operator==(const TaxonomyLabel&, const TaxonomyLabel&) = default;
};

/// Class from the two flags; `dominant` only matters when the flags differ.
constexpr TaxonomyClass assemble_class(ComponentRegime tau, ComponentRegime kappa, Dominance dominant) noexcept {
  using R = ComponentRegime;
  if (tau == R::crystallizable && kappa == R::crystallizable) return TaxonomyClass::c_full;
  if (tau == R::maintainable && kappa == R::maintainable) return TaxonomyClass::m_full;
  if (tau == R::crystallizable) return dominant == Dominance::tau ? TaxonomyClass::c_tau : TaxonomyClass::m_kappa;
  return dominant == Dominance::tau ? TaxonomyClass::m_tau : TaxonomyClass::c_kappa;
}

namespace detail {

inline ComponentRegime tail_regime(const std::vector<double>& v, std::size_t window, double tol) {
  const auto first = v.end() - static_cast<std::ptrdiff_t>(window);
  const double mean = std::accumulate(first, v.end(), 0.0) / static_cast<double>(window);
  double ss = 0.0;
  for (auto it = first; it != v.end(); ++it) ss += (*it - mean) * (*it - mean);
  const double sd = std::sqrt(ss / static_cast<double>(window - 1));
  return sd / (std::abs(mean) + tol) < tol ? ComponentRegime::crystallizable : ComponentRegime::maintainable;
}

inline double log_range(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double tiny = std::numeric_limits<double>::min();
  return std::log(std::max(*hi, tiny)) - std::log(std::max(*lo, tiny));
}

}  // namespace detail

inline TaxonomyLabel classify_trajectory(const Trajectory& traj, std::size_t window = 50, double tol = 1e-3) {
  if (window < 2) fail(ErrorKind::domain, "classify_trajectory: window must be >= 2");
  if (!(tol > 0.0)) fail(ErrorKind::domain, "classify_trajectory: tol must be > 0");
  if (traj.size() < 2 * window)
    fail(ErrorKind::insufficient_data, "classify_trajectory: trajectory shorter than twice the window");

  std::vector<double> tau, kappa;
  tau.reserve(traj.size());
  kappa.reserve(traj.size());
  for (const auto& s : traj.states()) {
    tau.push_back(mean_precision(s));
    kappa.push_back(s.temporal().kappa());
  }
  TaxonomyLabel out;
  out.tau_regime = detail::tail_regime(tau, window, tol);
  out.kappa_regime = detail::tail_regime(kappa, window, tol);

  const double rt = detail::log_range(tau);
  const double rk = detail::log_range(kappa);
  Dominance dom;
  if (rt == rk) {
    dom = out.tau_regime == ComponentRegime::crystallizable ? Dominance::tau : Dominance::kappa;
  } else {
    dom = rt > rk ? Dominance::tau : Dominance::kappa;
  }
  out.cls = assemble_class(out.tau_regime, out.kappa_regime, dom);
  return out;
}

}  // namespace beds
