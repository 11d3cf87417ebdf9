#pragma once

// Landauer-style energy floors. Energies are in units of kT unless a physical
// kT (joules) is passed in.

#include <cmath>
#include <numbers>

#include "beds/error.hpp"
#include "beds/geometry.hpp"

namespace beds {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K, exact SI value

inline double thermal_energy(double kelvin) {
  if (!(kelvin > 0.0)) fail(ErrorKind::domain, "thermal_energy: temperature must be > 0");
  return kBoltzmann * kelvin;
}

inline double landauer_cost(double bits, double kT) {
  if (!(bits >= 0.0)) fail(ErrorKind::domain, "landauer_cost: bits must be >= 0");
  if (!(kT > 0.0)) fail(ErrorKind::domain, "landauer_cost: kT must be > 0");
  return bits * kT * std::numbers::ln2;
}

/// kT ln2 KL(q || q_star).
inline double min_erasure_energy(const GaussianBelief& q, const GaussianBelief& q_star, double kT) {
  if (!(kT > 0.0)) fail(ErrorKind::domain, "min_erasure_energy: kT must be > 0");
  return kT * std::numbers::ln2 * gaussian_kl(q, q_star);
}

/// gamma tau* / (2 ln 2) bits per unit time.
inline double min_information_rate(double gamma, double tau_star) {
  if (!(gamma >= 0.0)) fail(ErrorKind::domain, "min_information_rate: gamma must be >= 0");
  if (!(tau_star > 0.0)) fail(ErrorKind::domain, "min_information_rate: tau_star must be > 0");
  return gamma * tau_star / (2.0 * std::numbers::ln2);
}

/// gamma tau* kT / 2; reduces to gamma kT / 2 at tau* = 1.
inline double min_maintenance_power(double gamma, double tau_star, double kT) {
  if (!(gamma >= 0.0)) fail(ErrorKind::domain, "min_maintenance_power: gamma must be >= 0");
  if (!(tau_star > 0.0)) fail(ErrorKind::domain, "min_maintenance_power: tau_star must be > 0");
  if (!(kT > 0.0)) fail(ErrorKind::domain, "min_maintenance_power: kT must be > 0");
  return gamma * tau_star * kT / 2.0;
}

inline double thermo_efficiency(double bits_erased, double e_actual, double kT) {
  if (!(e_actual > 0.0)) fail(ErrorKind::domain, "thermo_efficiency: actual energy must be > 0");
  const double floor = landauer_cost(bits_erased, kT);
  if (e_actual < floor)
    fail(ErrorKind::physical_violation, "thermo_efficiency: actual energy is below the Landauer floor");
  return floor / e_actual;
}

}  // namespace beds
