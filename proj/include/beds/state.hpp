#pragma once

// Product belief state: d independent Gaussian factors (mu_i, tau_i) and one
// von Mises factor (phi, kappa).

#include <cmath>
#include <utility>
#include <vector>

#include "beds/error.hpp"
#include "beds/geometry.hpp"
#include "beds/vonmises_path.hpp"

namespace beds {

class BedsState {
 public:
  BedsState(std::vector<GaussianBelief> spatial, VonMisesBelief temporal)
      : spatial_(std::move(spatial)), temporal_(temporal) {
    if (spatial_.empty()) fail(ErrorKind::dimension, "BedsState: need at least one spatial factor");
  }

  /// Scalar (d = 1) state.
  BedsState(double mu, double tau, double phi, double kappa) : BedsState({GaussianBelief(mu, tau)}, {phi, kappa}) {}

  std::size_t dim() const noexcept { return spatial_.size(); }
  const std::vector<GaussianBelief>& spatial() const noexcept { return spatial_; }
  const GaussianBelief& spatial(std::size_t i) const { return spatial_.at(i); }
  const VonMisesBelief& temporal() const noexcept { return temporal_; }

  friend bool operator==(const BedsState&, const BedsState&) = default;

 private:
  std::vector<GaussianBelief> spatial_;
  VonMisesBelief temporal_;
};

/// Geometric mean of the spatial precisions.
inline double mean_precision(const BedsState& s) {
  double acc = 0.0;
  for (const auto& g : s.spatial()) acc += std::log(g.tau());
  return std::exp(acc / static_cast<double>(s.dim()));
}

inline double beds_product_distance(const BedsState& a, const BedsState& b, const VonMisesPathOptions& opt = {}) {
  if (a.dim() != b.dim()) fail(ErrorKind::dimension, "beds_product_distance: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = gaussian_fr_distance(a.spatial(i), b.spatial(i));
    sq += d * d;
  }
  const double dt = vonmises_fr_distance(a.temporal(), b.temporal(), opt);
  return std::sqrt(sq + dt * dt);
}

}  // namespace beds
