#pragma once

// Numeric Fisher-Rao distance on the von Mises manifold.
//
// The von Mises family is an exponential family with natural parameter
// eta = kappa (cos phi, sin phi) and log-partition psi(eta) = ln I0(|eta|).
// Working in eta removes the coordinate singularity at kappa = 0 and makes the
// phase wraparound implicit. The metric is the Hessian of psi:
//   G(eta) = (A/r) I + c(r) eta eta^T,   r = |eta|, c = (A' - A/r) / r^2,
// and the dual (expectation) coordinates are theta = grad psi = (A/r) eta.
//
// The path is discretised into N straight segments and relaxed by minimising
//   E = sum_k (eta_{k+1} - eta_k) . (theta_{k+1} - theta_k),
// the segment-averaged metric energy. Its Hessian is block tridiagonal with
// off-diagonal blocks -(G_k + G_{k+1}); each relaxation sweep is one block
// Thomas solve followed by a backtracking line search. Where the exact Hessian
// does not give a descent direction (far from the solution, where the metric
// varies quickly between nodes) the diagonal is replaced by the weighted
// Laplacian form G_{k-1} + 2 G_k + G_{k+1}, which keeps the system SPD.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "beds/bessel.hpp"
#include "beds/error.hpp"
#include "beds/geometry.hpp"

namespace beds {

struct VonMisesPathOptions {
  int segments = 256;
  int max_iterations = 10000;
  double tolerance = 1e-8;
};

struct VonMisesPathResult {
  double distance = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<VonMisesBelief> nodes;  // relaxed path, endpoints included
};

namespace detail::vm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Symmetric 2x2 matrix [[a, b], [b, d]]; general 2x2 for the Thomas sweep.
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;  // [[a, b], [c, d]]
};

inline Mat2 operator+(const Mat2& p, const Mat2& q) { return {p.a + q.a, p.b + q.b, p.c + q.c, p.d + q.d}; }
inline Mat2 operator-(const Mat2& p, const Mat2& q) { return {p.a - q.a, p.b - q.b, p.c - q.c, p.d - q.d}; }
inline Mat2 operator*(double s, const Mat2& p) { return {s * p.a, s * p.b, s * p.c, s * p.d}; }
inline Mat2 operator*(const Mat2& p, const Mat2& q) {
  return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d, p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
}
inline Vec2 operator*(const Mat2& p, Vec2 v) { return {p.a * v.x + p.b * v.y, p.c * v.x + p.d * v.y}; }
inline Mat2 inverse(const Mat2& p) {
  const double det = p.a * p.d - p.b * p.c;
  return {p.d / det, -p.b / det, -p.c / det, p.a / det};
}

inline Vec2 to_natural(const VonMisesBelief& v) {
  return {v.kappa() * std::cos(v.phi()), v.kappa() * std::sin(v.phi())};
}

inline VonMisesBelief from_natural(Vec2 e) { return {std::atan2(e.y, e.x), norm(e)}; }

inline Vec2 dual(Vec2 e) { return bessel::ratio_over_kappa(norm(e)) * e; }

inline Mat2 metric(Vec2 e) {
  const double r = norm(e);
  const double iso = bessel::ratio_over_kappa(r);
  const double c = bessel::anisotropy(r);
  return {iso + c * e.x * e.x, c * e.x * e.y, c * e.x * e.y, iso + c * e.y * e.y};
}

// sum_l d^3 psi / (d eta_i d eta_j d eta_l) v_l, with psi the log-partition.
// For G = a(r) I + c(r) eta eta^T this is
//   c (v eta^T + eta v^T + (eta.v) I) + (c'/r) (eta.v) eta eta^T.
inline Mat2 third_derivative_contraction(Vec2 e, Vec2 v) {
  const double r = norm(e);
  const double c = bessel::anisotropy(r);
  double dc_over_r;
  if (r < 1e-2) {
    const double r2 = r * r;
    dc_over_r = 1.0 / 12.0 + r2 * (-11.0 / 256.0 + r2 * (19.0 / 1280.0));
  } else {
    const double h = 1e-4 * r;
    dc_over_r = (bessel::anisotropy(r + h) - bessel::anisotropy(r - h)) / (2.0 * h * r);
  }
  const double ev = dot(e, v);
  const double w = dc_over_r * ev;
  return {c * (2.0 * v.x * e.x + ev) + w * e.x * e.x, c * (v.x * e.y + e.x * v.y) + w * e.x * e.y,
          c * (v.x * e.y + e.x * v.y) + w * e.x * e.y, c * (2.0 * v.y * e.y + ev) + w * e.y * e.y};
}

inline double quad_form(const Mat2& g, Vec2 v) { return dot(v, g * v); }

inline double energy(const std::vector<Vec2>& eta, const std::vector<Vec2>& theta) {
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < eta.size(); ++k) e += dot(eta[k + 1] - eta[k], theta[k + 1] - theta[k]);
  return e;
}

// Rounding floor of energy(): each term differences O(|eta|), O(|theta|)
// quantities, so cancellation sets the resolution, not |E| itself.
inline double energy_noise(const std::vector<Vec2>& eta, const std::vector<Vec2>& theta) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < eta.size(); ++k) {
    s += norm(eta[k + 1] - eta[k]) * (norm(theta[k]) + norm(theta[k + 1])) +
         norm(theta[k + 1] - theta[k]) * (norm(eta[k]) + norm(eta[k + 1]));
  }
  return 2.0 * std::numeric_limits<double>::epsilon() * s;
}

// Length of the straight segment p -> q under G, 5-point Gauss-Legendre.
inline double segment_length(Vec2 p, Vec2 q) {
  static constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                    0.4786286704993665, 0.2369268850561891};
  const Vec2 d = q - p;
  double len = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const Vec2 x = p + t * d;
    len += weights[i] * std::sqrt(std::max(0.0, quad_form(metric(x), d)));
  }
  return 0.5 * len;
}

}  // namespace detail::vm

/// Relaxes a discretised geodesic between a and b and returns its length.
inline VonMisesPathResult vonmises_fr_path(const VonMisesBelief& a, const VonMisesBelief& b,
                                           const VonMisesPathOptions& opt = {}) {
  using namespace detail::vm;
  if (opt.segments < 2) fail(ErrorKind::domain, "vonmises_fr_path: need at least 2 segments");

  Vec2 ea = to_natural(a);
  Vec2 eb = to_natural(b);
  VonMisesPathResult out;
  const double span = norm(eb - ea);
  if (span == 0.0 || (a.kappa() == 0.0 && b.kappa() == 0.0)) {
    out.nodes = {a, b};
    return out;
  }
  // Fixed endpoint order so that d(a, b) and d(b, a) run the same arithmetic.
  const bool swapped = std::pair(ea.x, ea.y) > std::pair(eb.x, eb.y);
  if (swapped) std::swap(ea, eb);

  // On a chord this short the straight segment is the geodesic to ~1e-12
  // relative, while the energy differences the relaxation would need sit
  // below round-off.
  if (span < 1e-6 * std::max({1.0, norm(ea), norm(eb)})) {
    out.distance = segment_length(ea, eb);
    out.nodes = {a, b};
    return out;
  }

  const int n = opt.segments;
  std::vector<Vec2> eta(n + 1);
  for (int k = 0; k <= n; ++k) eta[k] = ea + (static_cast<double>(k) / n) * (eb - ea);
  eta[n] = eb;

  std::vector<Vec2> theta(n + 1), grad(n + 1), step(n + 1), trial(n + 1), trial_theta(n + 1);
  std::vector<Mat2> g(n + 1), diag_exact(n + 1), diag_spd(n + 1), cprime(n + 1);
  std::vector<Vec2> dprime(n + 1);
  for (int k = 0; k <= n; ++k) theta[k] = dual(eta[k]);
  double e_cur = energy(eta, theta);

  // Solves the block tridiagonal system with the given diagonal blocks and
  // returns the slope grad.step, or 0 if the step is not a descent direction.
  auto solve = [&](const std::vector<Mat2>& diag) {
    for (int k = 1; k < n; ++k) {
      const Mat2 lower = -1.0 * (g[k - 1] + g[k]);
      Mat2 dk = diag[k];
      Vec2 rk = -1.0 * grad[k];
      if (k > 1) {
        dk = dk - lower * cprime[k - 1];
        rk = rk - lower * dprime[k - 1];
      }
      const Mat2 inv = inverse(dk);
      cprime[k] = inv * (-1.0 * (g[k] + g[k + 1]));
      dprime[k] = inv * rk;
    }
    step[n - 1] = dprime[n - 1];
    for (int k = n - 2; k >= 1; --k) step[k] = dprime[k] - cprime[k] * step[k + 1];
    double slope = 0.0;
    for (int k = 1; k < n; ++k) slope += dot(grad[k], step[k]);
    return std::isfinite(slope) && slope < 0.0 ? slope : 0.0;
  };

  bool converged = false;
  double residual = 0.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    for (int k = 0; k <= n; ++k) g[k] = metric(eta[k]);
    for (int k = 1; k < n; ++k) {
      const Vec2 second = 2.0 * eta[k] - eta[k - 1] - eta[k + 1];
      grad[k] = (2.0 * theta[k] - theta[k - 1] - theta[k + 1]) + g[k] * second;
      diag_exact[k] = 4.0 * g[k] + third_derivative_contraction(eta[k], second);
      diag_spd[k] = g[k - 1] + 2.0 * g[k] + g[k + 1];
    }
    double slope = solve(diag_exact);
    if (slope == 0.0) slope = solve(diag_spd);

    residual = 0.0;
    for (int k = 1; k < n; ++k) residual = std::max(residual, norm(step[k]));
    residual /= span;
    if (!std::isfinite(residual)) break;
    if (residual < opt.tolerance) {
      converged = true;
      break;
    }
    if (slope == 0.0) break;

    // The predicted decrease is below what the energy can resolve, so the path
    // is as stationary as double precision allows even if the step residual
    // is held above tolerance by round-off in the gradient.
    if (-slope < energy_noise(eta, theta)) {
      converged = true;
      break;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      trial[0] = eta[0];
      trial[n] = eta[n];
      for (int k = 1; k < n; ++k) trial[k] = eta[k] + alpha * step[k];
      for (int k = 0; k <= n; ++k) trial_theta[k] = dual(trial[k]);
      const double e_new = energy(trial, trial_theta);
      if (e_new <= e_cur + 1e-4 * alpha * slope) {
        eta.swap(trial);
        theta.swap(trial_theta);
        e_cur = e_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!converged) {
    throw Error(ErrorKind::numeric_failure,
                "vonmises_fr_distance: path relaxation did not converge after " + std::to_string(it) +
                    " iterations (residual " + std::to_string(residual) + ")",
                residual);
  }

  double length = 0.0;
  for (int k = 0; k < n; ++k) length += segment_length(eta[k], eta[k + 1]);

  out.distance = length;
  out.iterations = it;
  out.residual = residual;
  out.nodes.reserve(n + 1);
  for (int k = 0; k <= n; ++k) out.nodes.push_back(from_natural(eta[swapped ? n - k : k]));
  out.nodes.front() = a;
  out.nodes.back() = b;
  return out;
}

inline double vonmises_fr_distance(const VonMisesBelief& a, const VonMisesBelief& b,
                                   const VonMisesPathOptions& opt = {}) {
  return vonmises_fr_path(a, b, opt).distance;
}

}  // namespace beds
