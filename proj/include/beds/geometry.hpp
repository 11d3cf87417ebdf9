#pragma once

// Fisher-Rao geometry of the univariate Gaussian and von Mises families.
//
// Gaussian beliefs are stored as (mu, tau) with tau = 1/sigma^2. Their metric
//   ds^2 = tau dmu^2 + dtau^2 / (2 tau^2)
// is the hyperbolic half-plane in the coordinates (mu/sqrt(2), sigma), scaled
// by sqrt(2), which gives closed forms for distances and geodesics.

#include <cmath>
#include <complex>
#include <numbers>

#include "beds/bessel.hpp"
#include "beds/error.hpp"

namespace beds {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into [0, 2pi).
inline double wrap_phase(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;  // fmod + 2pi can round up to exactly 2pi
  return r;
}

/// Signed circular difference a - b mapped into (-pi, pi].
inline double phase_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

class GaussianBelief {
 public:
  GaussianBelief(double mu, double tau) : mu_(mu), tau_(tau) {
    if (!std::isfinite(mu)) fail(ErrorKind::domain, "GaussianBelief: mu must be finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorKind::domain, "GaussianBelief: tau must be finite and > 0");
  }

  static GaussianBelief from_sigma(double mu, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "GaussianBelief: sigma must be > 0");
    return {mu, 1.0 / (sigma * sigma)};
  }

  double mu() const noexcept { return mu_; }
  double tau() const noexcept { return tau_; }
  double sigma() const noexcept { return 1.0 / std::sqrt(tau_); }
  double variance() const noexcept { return 1.0 / tau_; }

  friend bool operator==(const GaussianBelief&, const GaussianBelief&) = default;

 private:
  double mu_;
  double tau_;
};

class VonMisesBelief {
 public:
  VonMisesBelief(double phi, double kappa) : phi_(0.0), kappa_(kappa) {
    if (!std::isfinite(phi)) fail(ErrorKind::domain, "VonMisesBelief: phi must be finite");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) fail(ErrorKind::domain, "VonMisesBelief: kappa must be finite and >= 0");
    phi_ = wrap_phase(phi);
  }

  double phi() const noexcept { return phi_; }
  double kappa() const noexcept { return kappa_; }
  bool uniform() const noexcept { return kappa_ == 0.0; }

  friend bool operator==(const VonMisesBelief&, const VonMisesBelief&) = default;

 private:
  double phi_;
  double kappa_;
};

/// Diagonal 2x2 metric; off-diagonal terms vanish for both families.
struct MetricTensor2 {
  double g11 = 0.0;
  double g22 = 0.0;
};

// ---------------------------------------------------------------------------
// Gaussian family

inline MetricTensor2 gaussian_metric(const GaussianBelief& b) {
  const double t = b.tau();
  return {t, 1.0 / (2.0 * t * t)};
}

namespace detail {
// acosh(1 + x) without the cancellation of forming 1 + x.
inline double acosh1p(double x) { return std::log1p(x + std::sqrt(x * (x + 2.0))); }
}  // namespace detail

inline double gaussian_fr_distance(const GaussianBelief& a, const GaussianBelief& b) {
  const double sa = a.sigma();
  const double sb = b.sigma();
  const double dmu = a.mu() - b.mu();
  const double ds = sa - sb;
  const double x = (0.5 * dmu * dmu + ds * ds) / (2.0 * sa * sb);
  return std::numbers::sqrt2 * detail::acosh1p(x);
}

/// Point at arc-length fraction s in [0, 1] along the geodesic from a to b.
///
/// Both endpoints are mapped to the Poincare disk with a at the origin, where
/// the geodesic is a radial segment, and mapped back.
inline GaussianBelief gaussian_geodesic(const GaussianBelief& a, const GaussianBelief& b, double s) {
  if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::domain, "gaussian_geodesic: s must lie in [0, 1]");
  if (s == 0.0 || a == b) return a;
  if (s == 1.0) return b;

  using C = std::complex<double>;
  const double ua = a.mu() / std::numbers::sqrt2;
  const double ya = a.sigma();
  const C w((b.mu() / std::numbers::sqrt2 - ua) / ya, b.sigma() / ya);
  const C i(0.0, 1.0);
  const C zeta = (w - i) / (w + i);
  const double radius = std::abs(zeta);
  const double half_d = std::atanh(radius);  // half the unit-curvature distance
  const C zeta_s = (std::tanh(s * half_d) / radius) * zeta;
  const C ws = i * (1.0 + zeta_s) / (1.0 - zeta_s);

  const double mu = std::numbers::sqrt2 * (ua + ya * ws.real());
  const double sigma = ya * ws.imag();
  return GaussianBelief::from_sigma(mu, sigma);
}

/// KL(a || b) for univariate Gaussians.
inline double gaussian_kl(const GaussianBelief& a, const GaussianBelief& b) {
  // With rho = tau_b / tau_a: KL = (rho - 1 - ln rho)/2 + tau_b dmu^2 / 2.
  const double eps = (b.tau() - a.tau()) / a.tau();
  const double dmu = a.mu() - b.mu();
  return 0.5 * (eps - std::log1p(eps)) + 0.5 * b.tau() * dmu * dmu;
}

// ---------------------------------------------------------------------------
// von Mises family

/// A(kappa) = I1(kappa) / I0(kappa).
inline double bessel_ratio(double kappa) { return bessel::ratio(kappa); }

/// (g_phiphi, g_kappakappa) = (kappa A, 1 - A^2 - A/kappa); g_kk(0) = 1/2.
inline MetricTensor2 vonmises_metric(double kappa) {
  return {kappa * bessel::ratio(kappa), bessel::ratio_derivative(kappa)};
}

}  // namespace beds
