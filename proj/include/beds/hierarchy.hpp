#pragma once

// Recursive crystallization: level-n posteriors become level-(n+1) priors, and
// dissipation decays geometrically up the stack, gamma_n = gamma_0 r^n.

#include <cmath>
#include <vector>

#include "beds/error.hpp"
#include "beds/geometry.hpp"
#include "beds/state.hpp"

namespace beds {

struct HierarchyLevel {
  BedsState prior;
  double gamma = 0.0;
};

class Hierarchy {
 public:
  Hierarchy(std::vector<BedsState> priors, double gamma0, double r, double e0) : r_(r), e0_(e0) {
    if (priors.empty()) fail(ErrorKind::domain, "Hierarchy: need at least one level");
    if (!(gamma0 >= 0.0)) fail(ErrorKind::domain, "Hierarchy: gamma0 must be >= 0");
    if (!(r > 0.0)) fail(ErrorKind::domain, "Hierarchy: r must be > 0");
    if (!(r < 1.0)) fail(ErrorKind::divergence, "Hierarchy: r must be < 1 for a bounded total");
    if (!(e0 > 0.0)) fail(ErrorKind::domain, "Hierarchy: E0 must be > 0");
    double g = gamma0;
    for (auto& p : priors) {
      levels_.push_back({std::move(p), g});
      g *= r;
    }
  }

  const std::vector<HierarchyLevel>& levels() const noexcept { return levels_; }
  double r() const noexcept { return r_; }
  double e0() const noexcept { return e0_; }

 private:
  std::vector<HierarchyLevel> levels_;
  double r_;
  double e0_;
};

/// p_{n+1}(theta) = p_n(theta | D_n): the posteriors are carried over verbatim.
inline std::vector<GaussianBelief> crystallize_level(const std::vector<GaussianBelief>& posterior) {
  if (posterior.empty()) fail(ErrorKind::domain, "crystallize_level: empty posterior list");
  return posterior;
}

struct MaintenanceEnergy {
  double partial_sum = 0.0;
  double bound = 0.0;
  double gap = 0.0;  // bound - partial_sum in closed form, E0 r^n / (1 - r)
  bool satisfied = false;
};

/// E0 sum_{n < n_levels} r^n against E0 / (1 - r).
inline MaintenanceEnergy total_maintenance_energy(double e0, double r, int n_levels) {
  if (!(r < 1.0)) fail(ErrorKind::divergence, "total_maintenance_energy: r >= 1, the series diverges");
  if (!(r > 0.0)) fail(ErrorKind::domain, "total_maintenance_energy: r must be > 0");
  if (!(e0 > 0.0)) fail(ErrorKind::domain, "total_maintenance_energy: E0 must be > 0");
  if (n_levels < 1) fail(ErrorKind::domain, "total_maintenance_energy: n_levels must be >= 1");
  MaintenanceEnergy out;
  // Closed forms: a running sum of rounded terms can overshoot the rounded
  // bound, while 1 - r^n <= 1 keeps this quotient at or below it.
  const double rn = std::pow(r, n_levels);
  out.partial_sum = e0 * (1.0 - rn) / (1.0 - r);
  out.bound = e0 / (1.0 - r);
  out.gap = e0 * rn / (1.0 - r);
  // The rounded partial sum can reach the rounded bound long before the exact
  // gap is below one ulp; strictness is read off the closed-form gap.
  out.satisfied = out.gap > 0.0;
  return out;
}

inline MaintenanceEnergy total_maintenance_energy(const Hierarchy& h, int n_levels) {
  return total_maintenance_energy(h.e0(), h.r(), n_levels);
}

}  // namespace beds
