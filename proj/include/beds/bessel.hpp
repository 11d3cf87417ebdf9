#pragma once

// Modified Bessel ratio A(k) = I1(k)/I0(k) and the derived quantities the von
// Mises geometry needs. Power series below kSeriesCutoff, Hankel asymptotic
// expansion above; the two branches agree to ~2e-14 at the switch.

#include <cmath>

#include "beds/error.hpp"

namespace beds::bessel {

inline constexpr double kSeriesCutoff = 15.0;

namespace detail {

// Returns S1/S0 where I0 = S0 and I1 = (k/2) S1, so that A(k) = (k/2) S1/S0.
inline double series_half_ratio(double kappa) {
  const double q = 0.25 * kappa * kappa;
  double t0 = 1.0, t1 = 1.0, s0 = 1.0, s1 = 1.0;
  for (int k = 1; k < 200; ++k) {
    t0 *= q / (static_cast<double>(k) * k);
    t1 *= q / (static_cast<double>(k) * (k + 1));
    s0 += t0;
    s1 += t1;
    if (t0 < 1e-18 * s0 && t1 < 1e-18 * s1) break;
  }
  return s1 / s0;
}

// Sum of the asymptotic series for e^{-x} sqrt(2 pi x) I_nu(x), truncated at
// its smallest term.
inline double asymptotic_sum(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, total = 1.0, prev = 1.0;
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) >= prev) break;
    total += term;
    prev = std::abs(term);
    if (prev < 1e-18 * std::abs(total)) break;
  }
  return total;
}

}  // namespace detail

/// A(k) = I1(k)/I0(k). A(0) = 0, strictly increasing, A -> 1 as k -> inf.
inline double ratio(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) fail(ErrorKind::domain, "bessel ratio: kappa must be finite and >= 0");
  if (kappa < kSeriesCutoff) return 0.5 * kappa * detail::series_half_ratio(kappa);
  return detail::asymptotic_sum(1, kappa) / detail::asymptotic_sum(0, kappa);
}

/// A(k)/k, finite at k = 0 where it equals 1/2.
inline double ratio_over_kappa(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) fail(ErrorKind::domain, "bessel ratio: kappa must be finite and >= 0");
  if (kappa < kSeriesCutoff) return 0.5 * detail::series_half_ratio(kappa);
  return ratio(kappa) / kappa;
}

/// dA/dk = 1 - A^2 - A/k, which is also the Fisher coefficient g_kk.
inline double ratio_derivative(double kappa) {
  const double a = ratio(kappa);
  return 1.0 - a * a - ratio_over_kappa(kappa);
}

/// (A'(k) - A(k)/k) / k^2; the anisotropic part of the von Mises metric in
/// natural coordinates. Equals -1/8 at k = 0.
inline double anisotropy(double kappa) {
  if (kappa < 1e-2) {
    const double r2 = kappa * kappa;
    return -1.0 / 8.0 + r2 * (1.0 / 24.0 + r2 * (-11.0 / 1024.0 + r2 * (19.0 / 7680.0)));
  }
  const double a = ratio(kappa);
  return (1.0 - a * a - 2.0 * a / kappa) / (kappa * kappa);
}

}  // namespace beds::bessel
