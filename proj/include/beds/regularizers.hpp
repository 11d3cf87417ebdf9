#pragma once

// BEDS loss decomposition and the Euclidean / SIGReg baselines.
//
//   L = sum_i tau_i (mu_i - mu*_i)^2                  spatial_mu
//     + sum_i (tau_i - tau*_i)^2 / (2 tau_i tau*_i)   spatial_tau
//     + kappa (1 - cos(phi - phi*))                   temporal_phi
//     + (kappa - kappa*)^2 / (2 kappa kappa*)         temporal_kappa
//     + lambda * data

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "beds/error.hpp"
#include "beds/geometry.hpp"
#include "beds/state.hpp"

namespace beds {

/// Penalty reported for temporal_kappa when kappa or kappa* is zero and the
/// caller asked for a finite value instead of an error.
inline constexpr double kDegenerateKappaPenalty = 1e12;

/// Floor applied to tau and kappa after every optimizer step.
inline constexpr double kPositiveFloor = 1e-9;

struct BedsTarget {
  BedsState state_star;
};

struct LossBreakdown {
  double spatial_mu = 0.0;
  double spatial_tau = 0.0;
  double temporal_phi = 0.0;
  double temporal_kappa = 0.0;
  double data = 0.0;
  double lambda = 1.0;
  double total = 0.0;
};

/// Gradient over (mu_i, tau_i, phi, kappa).
struct BedsGradient {
  std::vector<double> mu;
  std::vector<double> tau;
  double phi = 0.0;
  double kappa = 0.0;

  static BedsGradient zeros(std::size_t d) { return {std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), 0.0, 0.0}; }
  std::size_t dim() const noexcept { return mu.size(); }
};

enum class DegeneratePolicy { error, penalty };

namespace detail {

inline void check_dims(const BedsState& s, const BedsState& t, const char* who) {
  if (s.dim() != t.dim()) fail(ErrorKind::dimension, std::string(who) + ": state and target dimensions differ");
}

}  // namespace detail

inline LossBreakdown beds_loss(const BedsState& s, const BedsTarget& target, double lambda, double data_loss,
                               DegeneratePolicy policy = DegeneratePolicy::error) {
  const BedsState& t = target.state_star;
  detail::check_dims(s, t, "beds_loss");
  if (!(lambda > 0.0)) fail(ErrorKind::domain, "beds_loss: lambda must be > 0");

  LossBreakdown out;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const auto& g = s.spatial(i);
    const auto& gs = t.spatial(i);
    const double dmu = g.mu() - gs.mu();
    const double dtau = g.tau() - gs.tau();
    out.spatial_mu += g.tau() * dmu * dmu;
    out.spatial_tau += dtau * dtau / (2.0 * g.tau() * gs.tau());
  }
  const double k = s.temporal().kappa();
  const double ks = t.temporal().kappa();
  out.temporal_phi = k * (1.0 - std::cos(s.temporal().phi() - t.temporal().phi()));
  if (k == 0.0 || ks == 0.0) {
    if (policy == DegeneratePolicy::error)
      fail(ErrorKind::degenerate_coherence, "beds_loss: temporal_kappa is singular at kappa = 0");
    out.temporal_kappa = kDegenerateKappaPenalty;
  } else {
    const double dk = k - ks;
    out.temporal_kappa = dk * dk / (2.0 * k * ks);
  }
  out.data = data_loss;
  out.lambda = lambda;
  out.total = out.spatial_mu + out.spatial_tau + out.temporal_phi + out.temporal_kappa + lambda * data_loss;
  return out;
}

/// Analytic gradient of beds_loss. `data_grad` may be empty (treated as zero).
inline BedsGradient beds_loss_gradient(const BedsState& s, const BedsTarget& target, double lambda,
                                       const BedsGradient& data_grad = {},
                                       DegeneratePolicy policy = DegeneratePolicy::error) {
  const BedsState& t = target.state_star;
  detail::check_dims(s, t, "beds_loss_gradient");
  if (!(lambda > 0.0)) fail(ErrorKind::domain, "beds_loss_gradient: lambda must be > 0");
  const bool has_data = data_grad.dim() != 0;
  if (has_data && (data_grad.dim() != s.dim() || data_grad.tau.size() != s.dim()))
    fail(ErrorKind::dimension, "beds_loss_gradient: data gradient dimension mismatch");

  auto g = BedsGradient::zeros(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const double tau = s.spatial(i).tau();
    const double ts = t.spatial(i).tau();
    const double dmu = s.spatial(i).mu() - t.spatial(i).mu();
    g.mu[i] = 2.0 * tau * dmu;
    g.tau[i] = dmu * dmu + 0.5 * (1.0 / ts - ts / (tau * tau));
  }
  const double dphi = s.temporal().phi() - t.temporal().phi();
  double k = s.temporal().kappa();
  const double ks = t.temporal().kappa();
  g.phi = k * std::sin(dphi);
  g.kappa = 1.0 - std::cos(dphi);
  if (k == 0.0 || ks == 0.0) {
    if (policy == DegeneratePolicy::error)
      fail(ErrorKind::degenerate_coherence, "beds_loss_gradient: temporal_kappa is singular at kappa = 0");
    // Gradient of the regular branch at the floor; pushes kappa back inside.
    if (ks > 0.0) {
      k = std::max(k, kPositiveFloor);
      g.kappa += 0.5 * (1.0 / ks - ks / (k * k));
    }
  } else {
    g.kappa += 0.5 * (1.0 / ks - ks / (k * k));
  }
  if (has_data) {
    for (std::size_t i = 0; i < s.dim(); ++i) {
      g.mu[i] += lambda * data_grad.mu[i];
      g.tau[i] += lambda * data_grad.tau[i];
    }
    g.phi += lambda * data_grad.phi;
    g.kappa += lambda * data_grad.kappa;
  }
  return g;
}

/// ||theta - theta*||^2 + lambda * data_loss.
inline double ridge_loss(const std::vector<double>& theta, const std::vector<double>& theta_star, double lambda,
                         double data_loss) {
  if (theta.size() != theta_star.size()) fail(ErrorKind::dimension, "ridge_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) acc += (theta[i] - theta_star[i]) * (theta[i] - theta_star[i]);
  return acc + lambda * data_loss;
}

/// -sum ln sigma_i + alpha_reg sum (sigma_i - 1)^2.
inline double sigreg_loss(const std::vector<double>& sigmas, double alpha_reg) {
  if (!(alpha_reg > 0.0)) fail(ErrorKind::domain, "sigreg_loss: alpha_reg must be > 0");
  double acc = 0.0;
  for (double s : sigmas) {
    if (!(s > 0.0)) fail(ErrorKind::domain, "sigreg_loss: sigma must be > 0");
    acc += -std::log(s) + alpha_reg * (s - 1.0) * (s - 1.0);
  }
  return acc;
}

/// ||Cov - I||_F^2 + ||mean||^2 over the rows of an n x k embedding matrix.
/// The covariance is the unbiased (n - 1) estimator.
inline double sigreg_proxy(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (n < 2) fail(ErrorKind::insufficient_data, "sigreg_proxy: need at least 2 rows");
  const std::size_t k = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != k) fail(ErrorKind::dimension, "sigreg_proxy: ragged embedding matrix");

  std::vector<double> mean(k, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < k; ++j) mean[j] += r[j];
  for (auto& m : mean) m /= static_cast<double>(n);

  double out = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double c = 0.0;
      for (const auto& r : rows) c += (r[a] - mean[a]) * (r[b] - mean[b]);
      c /= static_cast<double>(n - 1);
      const double dev = c - (a == b ? 1.0 : 0.0);
      out += dev * dev;
    }
  }
  for (double m : mean) out += m * m;
  return out;
}

namespace detail {

inline BedsState assemble(const BedsState& s, const std::vector<double>& mu, const std::vector<double>& tau,
                          double phi, double kappa) {
  bool finite = std::isfinite(phi) && std::isfinite(kappa);
  for (std::size_t i = 0; i < s.dim(); ++i) finite = finite && std::isfinite(mu[i]) && std::isfinite(tau[i]);
  if (!finite) fail(ErrorKind::numeric_failure, "descent step produced a non-finite coordinate");
  std::vector<GaussianBelief> sp;
  sp.reserve(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) sp.emplace_back(mu[i], std::max(tau[i], kPositiveFloor));
  return {std::move(sp), {phi, std::max(kappa, kPositiveFloor)}};
}

inline void check_step(const BedsState& s, const BedsGradient& g, double eta, const char* who) {
  if (!(eta > 0.0)) fail(ErrorKind::domain, std::string(who) + ": eta must be > 0");
  if (g.mu.size() != s.dim() || g.tau.size() != s.dim())
    fail(ErrorKind::dimension, std::string(who) + ": gradient dimension mismatch");
}

}  // namespace detail

/// theta <- theta - eta grad, with tau and kappa floored at kPositiveFloor.
inline BedsState gradient_step(const BedsState& s, const BedsGradient& g, double eta) {
  detail::check_step(s, g, eta, "gradient_step");
  std::vector<double> mu(s.dim()), tau(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    mu[i] = s.spatial(i).mu() - eta * g.mu[i];
    tau[i] = s.spatial(i).tau() - eta * g.tau[i];
  }
  return detail::assemble(s, mu, tau, s.temporal().phi() - eta * g.phi, s.temporal().kappa() - eta * g.kappa);
}

struct NaturalStep {
  BedsState state;
  bool phi_skipped = false;  // g_phiphi vanished (kappa == 0); phi left unchanged
};

/// theta <- theta - eta G^{-1} grad with the diagonal BEDS metric.
inline NaturalStep natural_gradient_step(const BedsState& s, const BedsGradient& g, double eta) {
  detail::check_step(s, g, eta, "natural_gradient_step");
  std::vector<double> mu(s.dim()), tau(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const auto m = gaussian_metric(s.spatial(i));
    mu[i] = s.spatial(i).mu() - eta * g.mu[i] / m.g11;
    tau[i] = s.spatial(i).tau() - eta * g.tau[i] / m.g22;
  }
  const auto vm = vonmises_metric(s.temporal().kappa());
  const bool skip = !(vm.g11 > 0.0);
  const double phi = skip ? s.temporal().phi() : s.temporal().phi() - eta * g.phi / vm.g11;
  const double kappa = s.temporal().kappa() - eta * g.kappa / vm.g22;
  return {detail::assemble(s, mu, tau, phi, kappa), skip};
}

}  // namespace beds
