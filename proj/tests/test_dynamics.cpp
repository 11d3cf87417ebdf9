#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <numbers>

#include "beds/dynamics.hpp"
#include "beds/rng.hpp"
#include "beds/taxonomy.hpp"
#include "beds/thermo.hpp"

using namespace beds;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double tau_of(const BedsState& s) { return s.spatial(0).tau(); }

Trajectory synthetic(const std::function<double(double)>& tau, const std::function<double(double)>& kappa,
                     int n = 400, double dt = 0.1) {
  Trajectory tr;
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    tr.push(t, BedsState(0.0, tau(t), 0.0, kappa(t)));
  }
  return tr;
}

// Settles from `from` to `to`; oscillates around `base` with relative amplitude `amp`.
auto settle(double from, double to) {
  return [=](double t) { return to + (from - to) * std::exp(-0.5 * t); };
}
auto wobble(double base, double amp) {
  return [=](double t) { return base * (1.0 + amp * std::sin(t)); };
}
auto constant(double v) {
  return [=](double) { return v; };
}

}  // namespace

TEST_CASE("dissipation parameters are validated", "[dynamics]") {
  const BedsState s(0.0, 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(dissipate_closed_form(s, {-1.0, 0.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(dissipate_closed_form(s, {0.0, -1.0, 1.0}, 1.0), Error);
  CHECK_THROWS_AS(dissipate_closed_form(s, {0.0, 0.0, 0.0}, 1.0), Error);
  CHECK_THROWS_AS(dissipate_closed_form(s, {0.0, 0.0, 1.0}, -1.0), Error);
  CHECK_THROWS_AS(dissipate_rk4(s, {0.1, 0.1, 1.0}, 1.0, 2.0), Error);
  CHECK_THROWS_AS(dissipate_rk4(s, {0.1, 0.1, 1.0}, 1.0, 0.0), Error);
}

TEST_CASE("closed-form dissipation", "[dynamics]") {
  const BedsState s(0.7, 4.0, 1.2, 10.0);
  CHECK(dissipate_closed_form(s, {0.0, 0.0, 1.0}, 3.0) == s);

  const auto a = dissipate_closed_form(s, {0.5, 0.0, 1.0}, 1.0);
  CHECK_THAT(tau_of(a), WithinRel(4.0 * std::exp(-1.0), 1e-15));
  CHECK_THAT(tau_of(a), WithinAbs(1.471518, 1e-6));
  CHECK(a.spatial(0).mu() == 0.7);
  CHECK(a.temporal().phi() == s.temporal().phi());

  const auto b = dissipate_closed_form(s, {0.0, 1.0, 1.0}, std::log(10.0));
  CHECK_THAT(b.temporal().kappa(), WithinRel(1.0, 1e-14));

  const BedsState multi({{0.0, 1.0}, {1.0, 9.0}}, {0.0, 1.0});
  const auto m = dissipate_closed_form(multi, {0.25, 0.0, 1.0}, 2.0);
  CHECK_THAT(m.spatial(1).tau(), WithinRel(9.0 * std::exp(-1.0), 1e-15));
}

TEST_CASE("RK4 dissipation", "[dynamics]") {
  const BedsState s(0.0, 4.0, 0.5, 2.0);
  const DissipationParams p{0.5, 0.3, 1.0};
  const auto tr = dissipate_rk4(s, p, 1.0, 1e-3);
  REQUIRE(tr.size() == 1001);
  CHECK(tr.times().back() == 1.0);
  CHECK(std::abs(tau_of(tr.back()) - 4.0 * std::exp(-1.0)) / (4.0 * std::exp(-1.0)) < 1e-8);

  const auto still = dissipate_rk4(s, {0.0, 0.0, 1.0}, 2.0, 0.1);
  for (const auto& st : still.states()) CHECK(st == s);

  auto err = [&](double dt) {
    const auto t = dissipate_rk4(s, p, 2.0, dt);
    return std::abs(tau_of(t.back()) - tau_of(dissipate_closed_form(s, p, 2.0)));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK_THAT(ratio, WithinRel(16.0, 0.1));

  auto rng = SplitMix64::stream(1, "dynamics/rk4");
  for (int i = 0; i < 100; ++i) {
    const BedsState s0(rng.uniform(-1, 1), rng.log_uniform(0.1, 10), rng.uniform(0, 6), rng.log_uniform(0.1, 10));
    const DissipationParams q{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), 1.0};
    const double t_end = rng.uniform(0.5, 5.0);
    const auto num = dissipate_rk4(s0, q, t_end, 1e-3).back();
    const auto ref = dissipate_closed_form(s0, q, t_end);
    CHECK_THAT(tau_of(num), WithinRel(tau_of(ref), 1e-8));
    CHECK_THAT(num.temporal().kappa(), WithinRel(ref.temporal().kappa(), 1e-8));
  }
}

TEST_CASE("crystallization index", "[dynamics]") {
  CHECK(crystallization_index({0.0, 1.0, 0.0, 1.0}) == 1.0);
  CHECK_THAT(crystallization_index({0.0, 10.0, 0.0, 10.0}), WithinRel(100.0, 1e-15));
  CHECK_THAT(crystallization_index(BedsState({{0, 2.0}, {0, 8.0}}, {0, 3.0})), WithinRel(12.0, 1e-15));

  const BedsState s(0.0, 3.0, 0.0, 2.0);
  const DissipationParams p{0.2, 0.3, 1.0};
  const auto tr = dissipate_rk4(s, p, 5.0, 1e-3);
  const auto& d = tr.diagnostics();
  for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k].crystallization < d[k - 1].crystallization);
  const double slope = (std::log(d.back().crystallization) - std::log(d.front().crystallization)) / 5.0;
  CHECK_THAT(slope, WithinAbs(-(2 * p.gamma + p.gamma_kappa), 1e-6));
  const double mid = (std::log(d[2500].crystallization) - std::log(d[1000].crystallization)) / (tr.times()[2500] - tr.times()[1000]);
  CHECK_THAT(mid, WithinAbs(-(2 * p.gamma + p.gamma_kappa), 1e-6));
}

TEST_CASE("regimes and thresholds", "[dynamics]") {
  CHECK(classify_regime(0.01, 0.1) == Regime::fluid);
  CHECK(classify_regime(1.0) == Regime::transition);
  CHECK(classify_regime(1000.0, 0.1) == Regime::crystallized);
  CHECK(classify_regime(0.1) == Regime::transition);
  CHECK(classify_regime(10.0) == Regime::transition);
  CHECK_THROWS_AS(classify_regime(1.0, 1.0), Error);
  CHECK_THROWS_AS(classify_regime(1.0, 0.0), Error);

  CHECK(crystallization_flags({0, 2.0, 0, 0.5}, 1.0, 1.0) == CrystalFlags::position);
  CHECK(crystallization_flags({0, 0.5, 0, 2.0}, 1.0, 1.0) == CrystalFlags::phase);
  CHECK(crystallization_flags({0, 2.0, 0, 2.0}, 1.0, 1.0) == CrystalFlags::complete);
  CHECK(crystallization_flags({0, 0.5, 0, 0.5}, 1.0, 1.0) == CrystalFlags::none);
  // Position needs every spatial precision above threshold.
  CHECK(crystallization_flags(BedsState({{0, 2.0}, {0, 0.5}}, {0, 2.0}), 1.0, 1.0) == CrystalFlags::phase);
  CHECK_THROWS_AS(crystallization_flags({0, 1, 0, 1}, 0.0, 1.0), Error);
}

TEST_CASE("trajectory invariants", "[dynamics]") {
  Trajectory tr;
  tr.push(0.0, {0, 1, 0, 1});
  CHECK_THROWS_AS(tr.push(0.0, {0, 1, 0, 1}), Error);
  CHECK_THROWS_AS(tr.push(-1.0, {0, 1, 0, 1}), Error);
  CHECK_THROWS_AS(tr.push(1.0, BedsState({{0, 1}, {0, 1}}, {0, 1})), Error);
  tr.push(1.0, {0, 20, 0, 1});
  CHECK(tr.size() == 2);
  CHECK(tr.times().size() == tr.states().size());
  CHECK(tr.diagnostics().size() == tr.states().size());
  CHECK(tr.diagnostics()[1].regime == Regime::crystallized);
}

TEST_CASE("thermodynamic bounds", "[dynamics]") {
  CHECK(landauer_cost(0.0, 1.0) == 0.0);
  CHECK_THAT(landauer_cost(1.0, 1.0), WithinRel(std::numbers::ln2, 1e-15));
  CHECK_THAT(landauer_cost(1.0, 4.14e-21), WithinRel(2.87e-21, 0.01));
  CHECK_THAT(landauer_cost(1.0, thermal_energy(300.0)), WithinRel(2.87e-21, 0.01));

  const GaussianBelief q(0.0, 1.0), q1(1.0, 1.0);
  CHECK(min_erasure_energy(q, q, 1.0) == 0.0);
  CHECK_THAT(min_erasure_energy(q, q1, 1.0), WithinRel(0.5 * std::numbers::ln2, 1e-14));
  CHECK_THAT(min_erasure_energy(q, q1, 3.0), WithinRel(3.0 * min_erasure_energy(q, q1, 1.0), 1e-15));

  CHECK(min_information_rate(0.0, 1.0) == 0.0);
  CHECK_THAT(min_information_rate(2.0 * std::numbers::ln2, 1.0), WithinRel(1.0, 1e-15));
  CHECK_THAT(min_information_rate(1.0, 4.0), WithinRel(2.0 / std::numbers::ln2, 1e-15));

  CHECK(min_maintenance_power(2.0, 1.0, 1.0) == 1.0);
  CHECK(min_maintenance_power(0.0, 1.0, 1.0) == 0.0);
  auto rng = SplitMix64::stream(2, "dynamics/thermo");
  for (int i = 0; i < 100; ++i) {
    const double g = rng.uniform(0.0, 10.0), kt = rng.log_uniform(1e-22, 10.0), ts = rng.log_uniform(0.1, 10.0);
    CHECK(min_maintenance_power(g, 1.0, kt) == g * kt / 2.0);
    CHECK_THAT(min_maintenance_power(g, ts, kt), WithinRel(min_information_rate(g, ts) * landauer_cost(1.0, kt), 1e-14));
  }

  CHECK(thermo_efficiency(1.0, landauer_cost(1.0, 1.0), 1.0) == 1.0);
  CHECK_THAT(thermo_efficiency(1.0, 2.0 * std::numbers::ln2, 1.0), WithinRel(0.5, 1e-15));
  try {
    (void)thermo_efficiency(1.0, 0.5 * std::numbers::ln2, 1.0);
    FAIL("expected a physical violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::physical_violation);
  }
}

TEST_CASE("coherence mappings", "[dynamics]") {
  CHECK(ema_coherence(0.0) == 1.0);
  CHECK_THAT(ema_coherence(0.99), WithinRel(100.0, 1e-12));
  CHECK_THAT(ema_coherence(0.996), WithinRel(250.0, 1e-12));
  CHECK_THROWS_AS(ema_coherence(1.0), Error);
  CHECK_THROWS_AS(ema_coherence(-0.1), Error);
  CHECK(sac_coherence(1.0) == 1.0);
  CHECK(sac_coherence(0.1) == 10.0);
  CHECK(sac_coherence(10.0) == 0.1);
  CHECK_THROWS_AS(sac_coherence(0.0), Error);
}

TEST_CASE("taxonomy assembly table", "[dynamics]") {
  using R = ComponentRegime;
  using T = TaxonomyClass;
  for (auto dom : {Dominance::tau, Dominance::kappa}) {
    CHECK(assemble_class(R::crystallizable, R::crystallizable, dom) == T::c_full);
    CHECK(assemble_class(R::maintainable, R::maintainable, dom) == T::m_full);
  }
  CHECK(assemble_class(R::crystallizable, R::maintainable, Dominance::tau) == T::c_tau);
  CHECK(assemble_class(R::crystallizable, R::maintainable, Dominance::kappa) == T::m_kappa);
  CHECK(assemble_class(R::maintainable, R::crystallizable, Dominance::tau) == T::m_tau);
  CHECK(assemble_class(R::maintainable, R::crystallizable, Dominance::kappa) == T::c_kappa);
  CHECK(to_string(T::c_tau) == "C-tau");
  CHECK(to_string(T::m_full) == "M-full");
}

TEST_CASE("trajectory taxonomy", "[dynamics]") {
  using R = ComponentRegime;
  using T = TaxonomyClass;

  const auto full_c = classify_trajectory(synthetic(constant(2.0), constant(3.0)));
  CHECK(full_c == TaxonomyLabel{R::crystallizable, R::crystallizable, T::c_full});

  const auto osc_tau = classify_trajectory(synthetic([](double t) { return 1.0 + std::sin(t); }, constant(1.0)));
  CHECK(osc_tau.tau_regime == R::maintainable);
  CHECK(osc_tau.kappa_regime == R::crystallizable);
  CHECK(osc_tau.cls == T::m_tau);

  CHECK(classify_trajectory(synthetic(wobble(1.0, 0.5), wobble(2.0, 0.3))).cls == T::m_full);
  CHECK(classify_trajectory(synthetic(settle(10.0, 1.0), wobble(1.0, 0.05))).cls == T::c_tau);
  CHECK(classify_trajectory(synthetic(settle(1.2, 1.0), wobble(1.0, 0.8))).cls == T::m_kappa);
  CHECK(classify_trajectory(synthetic(wobble(1.0, 0.8), settle(1.2, 1.0))).cls == T::m_tau);
  CHECK(classify_trajectory(synthetic(wobble(1.0, 0.05), settle(10.0, 1.0))).cls == T::c_kappa);

  // Relative spread does not depend on the units of tau.
  const auto base = synthetic(settle(10.0, 1.0), wobble(1.0, 0.05));
  for (double c : {1e-1, 1e2, 1e4}) {
    Trajectory scaled;
    for (std::size_t k = 0; k < base.size(); ++k) {
      const auto& s = base.states()[k];
      scaled.push(base.times()[k], BedsState(0.0, c * tau_of(s), 0.0, s.temporal().kappa()));
    }
    CHECK(classify_trajectory(scaled) == classify_trajectory(base));
  }

  Trajectory dissipated = dissipate_rk4({0, 1, 0, 1}, {0.0, 0.0, 1.0}, 10.0, 0.1);
  CHECK(classify_trajectory(dissipated).cls == T::c_full);

  CHECK_THROWS_AS(classify_trajectory(synthetic(constant(1), constant(1), 99)), Error);
  try {
    (void)classify_trajectory(synthetic(constant(1), constant(1), 60), 50, 1e-3);
    FAIL("expected insufficient data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}
