#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "beds/gnc.hpp"
#include "beds/optimizer.hpp"
#include "beds/regularizers.hpp"
#include "beds/rng.hpp"

using namespace beds;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BedsState random_state(SplitMix64& rng, std::size_t d = 1) {
  std::vector<GaussianBelief> sp;
  for (std::size_t i = 0; i < d; ++i) sp.emplace_back(rng.uniform(-2, 2), rng.log_uniform(0.2, 5.0));
  return {std::move(sp), {rng.uniform(0.0, kTwoPi), rng.log_uniform(0.2, 5.0)}};
}

double total(const BedsState& s, const BedsTarget& t) { return beds_loss(s, t, 1.0, 0.0).total; }

BedsState with_mu(const BedsState& s, std::size_t i, double v) {
  auto sp = s.spatial();
  sp[i] = {v, sp[i].tau()};
  return {sp, s.temporal()};
}
BedsState with_tau(const BedsState& s, std::size_t i, double v) {
  auto sp = s.spatial();
  sp[i] = {sp[i].mu(), v};
  return {sp, s.temporal()};
}
BedsState with_phi(const BedsState& s, double v) { return {s.spatial(), {v, s.temporal().kappa()}}; }
BedsState with_kappa(const BedsState& s, double v) { return {s.spatial(), {s.temporal().phi(), v}}; }

// Test-side Gaussian smoothing of (theta^2 - 1)^2 with standard deviation s.
double smoothed_well(double th, double s) {
  const double v = s * s;
  return th * th * th * th + (6 * v - 2) * th * th + 3 * v * v - 2 * v + 1;
}

}  // namespace

TEST_CASE("BEDS loss terms", "[regularizers]") {
  const BedsState t(0.0, 4.0, 1.0, 2.0);
  const BedsTarget target{t};
  const auto zero = beds_loss(t, target, 1.0, 0.0);
  CHECK(zero.spatial_mu == 0.0);
  CHECK(zero.spatial_tau == 0.0);
  CHECK(zero.temporal_phi == 0.0);
  CHECK(zero.temporal_kappa == 0.0);
  CHECK(zero.total == 0.0);

  const auto mu = beds_loss({1.0, 4.0, 1.0, 2.0}, target, 1.0, 0.0);
  CHECK(mu.spatial_mu == 4.0);
  CHECK(mu.spatial_tau + mu.temporal_phi + mu.temporal_kappa == 0.0);

  const auto ph = beds_loss({0.0, 4.0, 1.0 + std::numbers::pi, 2.0}, target, 1.0, 0.0);
  CHECK_THAT(ph.temporal_phi, WithinRel(4.0, 1e-14));

  const auto data = beds_loss({0.5, 2.0, 0.3, 3.0}, target, 2.5, 0.7);
  CHECK(data.lambda == 2.5);
  CHECK(data.data == 0.7);
  CHECK_THAT(data.total, WithinAbs(data.spatial_mu + data.spatial_tau + data.temporal_phi + data.temporal_kappa + 2.5 * 0.7, 1e-12));
  CHECK_THAT(data.spatial_tau, WithinRel(4.0 / 16.0, 1e-14));     // (2-4)^2 / (2 * 2 * 4)
  CHECK_THAT(data.temporal_kappa, WithinRel(1.0 / 12.0, 1e-14));  // (3-2)^2 / (2 * 3 * 2)

  CHECK_THROWS_AS(beds_loss(t, target, 0.0, 0.0), Error);
  CHECK_THROWS_AS(beds_loss(BedsState({{0, 1}, {0, 1}}, {0, 1}), target, 1.0, 0.0), Error);
}

TEST_CASE("degenerate coherence", "[regularizers]") {
  const BedsTarget target{{0.0, 1.0, 0.0, 1.0}};
  try {
    (void)beds_loss({0.0, 1.0, 0.0, 0.0}, target, 1.0, 0.0);
    FAIL("expected degenerate coherence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_coherence);
  }
  CHECK_THROWS_AS(beds_loss({0.0, 1.0, 0.0, 1.0}, BedsTarget{{0.0, 1.0, 0.0, 0.0}}, 1.0, 0.0), Error);
  const auto pen = beds_loss({0.0, 1.0, 0.0, 0.0}, target, 1.0, 0.0, DegeneratePolicy::penalty);
  CHECK(pen.temporal_kappa == kDegenerateKappaPenalty);
  CHECK(std::isfinite(pen.total));
}

TEST_CASE("BEDS loss is positive off the diagonal", "[regularizers]") {
  auto rng = SplitMix64::stream(1, "reg/positive");
  for (int i = 0; i < 1000; ++i) {
    const auto s = random_state(rng, 2), t = random_state(rng, 2);
    CHECK(total(s, BedsTarget{t}) > 0.0);
    CHECK(total(t, BedsTarget{t}) == 0.0);
  }
}

TEST_CASE("BEDS loss gradient", "[regularizers]") {
  const BedsTarget target{{0.0, 4.0, 0.0, 1.0}};
  const auto at_min = beds_loss_gradient(target.state_star, target, 1.0);
  CHECK(at_min.mu[0] == 0.0);
  CHECK(at_min.phi == 0.0);
  CHECK(beds_loss_gradient({1.0, 4.0, 0.0, 1.0}, target, 1.0).mu[0] == 8.0);

  auto rng = SplitMix64::stream(2, "reg/grad");
  constexpr double h = 1e-6;
  auto near = [](double a, double fd) { return std::abs(a - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3); };
  for (int n = 0; n < 100; ++n) {
    const auto s = random_state(rng, 2), t = random_state(rng, 2);
    const BedsTarget tg{t};
    const auto g = beds_loss_gradient(s, tg, 1.0);
    for (std::size_t i = 0; i < 2; ++i) {
      const double mu = s.spatial(i).mu(), tau = s.spatial(i).tau();
      const double fd_mu = (total(with_mu(s, i, mu + h), tg) - total(with_mu(s, i, mu - h), tg)) / (2 * h);
      const double fd_tau = (total(with_tau(s, i, tau + h), tg) - total(with_tau(s, i, tau - h), tg)) / (2 * h);
      CHECK(near(g.mu[i], fd_mu));
      CHECK(near(g.tau[i], fd_tau));
    }
    const double phi = s.temporal().phi(), k = s.temporal().kappa();
    const double fd_phi = (total(with_phi(s, phi + h), tg) - total(with_phi(s, phi - h), tg)) / (2 * h);
    const double fd_k = (total(with_kappa(s, k + h), tg) - total(with_kappa(s, k - h), tg)) / (2 * h);
    CHECK(near(g.phi, fd_phi));
    CHECK(near(g.kappa, fd_k));
  }

  // The data gradient enters scaled by lambda.
  auto dg = BedsGradient::zeros(1);
  dg.mu[0] = 1.0;
  dg.kappa = -2.0;
  const auto with_data = beds_loss_gradient({1.0, 4.0, 0.0, 1.0}, target, 3.0, dg);
  CHECK(with_data.mu[0] == 8.0 + 3.0);
  CHECK(with_data.kappa == -6.0);
  CHECK_THROWS_AS(beds_loss_gradient({1.0, 4.0, 0.0, 1.0}, target, 1.0, BedsGradient::zeros(2)), Error);
}

TEST_CASE("ridge and the Euclidean ratio", "[regularizers]") {
  CHECK(ridge_loss({1, 2}, {1, 2}, 2.0, 0.5) == 1.0);
  CHECK(ridge_loss({1, 1}, {0, 0}, 0.0, 0.0) == 2.0);
  CHECK_THROWS_AS(ridge_loss({1}, {1, 2}, 1.0, 0.0), Error);

  for (double tau : {0.01, 1.0, 100.0}) {
    const double dmu = 1e-4;
    const double de2 = ridge_loss({dmu}, {0.0}, 0.0, 0.0);
    const double df = gaussian_fr_distance({0.0, tau}, {dmu, tau});
    CHECK_THAT(de2 / (df * df), WithinRel(1.0 / tau, 1e-6));
  }
}

TEST_CASE("SIGReg loss and proxy", "[regularizers]") {
  CHECK(sigreg_loss({1, 1, 1}, 0.3) == 0.0);
  CHECK_THAT(sigreg_loss({std::numbers::e}, 1.0), WithinAbs(1.952492, 1e-6));
  CHECK(sigreg_loss({1e-12}, 1.0) > 20.0);
  CHECK(sigreg_loss({1e6}, 1.0) > 1e11);
  CHECK_THROWS_AS(sigreg_loss({1.0, 0.0}, 1.0), Error);

  // -ln s + a (s - 1)^2 is stationary where 2a s^2 - 2a s - 1 = 0, slightly
  // above 1, with a positive second derivative; at s = 1 the slope is -1.
  const double h = 1e-4;
  for (double a : {0.1, 1.0, 10.0}) {
    const double star = 0.5 * (1.0 + std::sqrt(1.0 + 2.0 / a));
    const double fp = sigreg_loss({star + h, 1}, a), f0 = sigreg_loss({star, 1}, a), fm = sigreg_loss({star - h, 1}, a);
    CHECK(std::abs(fp - fm) / (2 * h) < 1e-7);
    CHECK((fp - 2 * f0 + fm) / (h * h) > 0.0);
    CHECK(f0 < sigreg_loss({1, 1}, a));
    CHECK_THAT((sigreg_loss({1 + h, 1}, a) - sigreg_loss({1 - h, 1}, a)) / (2 * h), WithinAbs(-1.0, 1e-7));
  }

  // The four sign patterns, scaled so the unbiased covariance is exactly I.
  std::vector<std::vector<double>> white = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (auto& r : white)
    for (auto& x : r) x *= std::sqrt(3.0 / 4.0);
  CHECK_THAT(sigreg_proxy(white), WithinAbs(0.0, 1e-14));

  const std::vector<std::vector<double>> same = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  CHECK_THAT(sigreg_proxy(same), WithinRel(3.0 + 14.0, 1e-15));
  CHECK_THROWS_AS(sigreg_proxy({{1, 2}}), Error);

  auto rng = SplitMix64::stream(3, "reg/sigreg");
  std::vector<std::vector<double>> rows(20, std::vector<double>(3));
  for (auto& r : rows)
    for (auto& x : r) x = rng.normal(0.3, 1.5);
  auto brute = [](const std::vector<std::vector<double>>& m) {
    const std::size_t n = m.size(), k = m[0].size();
    double out = 0.0;
    std::vector<double> mean(k);
    for (std::size_t j = 0; j < k; ++j) {
      for (const auto& r : m) mean[j] += r[j] / static_cast<double>(n);
      out += mean[j] * mean[j];
    }
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) {
        double sab = 0.0;
        for (const auto& r : m) sab += r[a] * r[b];
        const double cov = (sab - n * mean[a] * mean[b]) / static_cast<double>(n - 1);
        out += (cov - (a == b)) * (cov - (a == b));
      }
    return out;
  };
  CHECK_THAT(sigreg_proxy(rows), WithinRel(brute(rows), 1e-12));
  auto doubled = rows;
  for (auto& r : doubled)
    for (auto& x : r) x *= 2.0;
  CHECK_THAT(sigreg_proxy(doubled), WithinRel(brute(doubled), 1e-12));
}

TEST_CASE("plain and natural descent steps", "[regularizers]") {
  const BedsState s(1.0, 4.0, 0.5, 2.0);
  CHECK(gradient_step(s, BedsGradient::zeros(1), 0.1) == BedsState(1.0, 4.0, 0.5, 2.0));
  CHECK(natural_gradient_step(s, BedsGradient::zeros(1), 0.1).state == s);

  auto g = BedsGradient::zeros(1);
  g.mu[0] = 2.0;
  CHECK_THAT(gradient_step(s, g, 0.1).spatial(0).mu(), WithinAbs(0.8, 1e-15));
  CHECK_THAT(natural_gradient_step(s, g, 0.1).state.spatial(0).mu(), WithinAbs(1.0 - 0.1 * 2.0 / 4.0, 1e-15));

  g = BedsGradient::zeros(1);
  g.tau[0] = 100.0;
  CHECK(gradient_step(s, g, 0.1).spatial(0).tau() == kPositiveFloor);
  g = BedsGradient::zeros(1);
  g.kappa = 100.0;
  CHECK(gradient_step(s, g, 0.1).temporal().kappa() == kPositiveFloor);

  g = BedsGradient::zeros(1);
  g.phi = 100.0;
  const double phi = gradient_step(s, g, 0.1).temporal().phi();
  CHECK((phi >= 0.0 && phi < kTwoPi));
  CHECK_THAT(phi, WithinAbs(wrap_phase(0.5 - 10.0), 1e-12));

  const auto uniform = natural_gradient_step({0.0, 1.0, 0.5, 0.0}, g, 0.1);
  CHECK(uniform.phi_skipped);
  CHECK(uniform.state.temporal().phi() == 0.5);
  CHECK_THROWS_AS(gradient_step(s, g, 0.0), Error);
  g.mu.push_back(0.0);
  CHECK_THROWS_AS(natural_gradient_step(s, g, 0.1), Error);
}

TEST_CASE("natural step agrees across charts to second order", "[regularizers]") {
  auto rng = SplitMix64::stream(4, "reg/chart");
  for (int i = 0; i < 50; ++i) {
    const double tau = rng.log_uniform(0.5, 2.0), tau_star = rng.log_uniform(0.5, 2.0);
    const double dmu = rng.uniform(-0.5, 0.5);
    const BedsState s(dmu, tau, 0.0, 1.0);
    const BedsTarget t{{0.0, tau_star, 0.0, 1.0}};
    const auto g = beds_loss_gradient(s, t, 1.0);
    auto gap = [&](double eta) {
      const auto a = natural_gradient_step(s, g, eta).state.spatial(0);
      // Same step with l = ln tau: g_l = tau g_tau, metric 1/2.
      const double l = std::log(tau) - eta * 2.0 * tau * g.tau[0];
      return gaussian_fr_distance(a, {dmu - eta * g.mu[0] / tau, std::exp(l)});
    };
    const double r = gap(0.1) / gap(0.05);
    CHECK_THAT(r, WithinRel(4.0, 0.2));
  }
}

TEST_CASE("optimizer", "[regularizers]") {
  const BedsTarget target{{0.0, 1.0, 0.0, 2.0}};
  const BedsState init(3.0, 0.2, 2.0, 0.5);
  OptimizeOptions o;
  o.steps = 500;
  o.eta = 0.05;
  const auto res = optimize(init, target, {}, o);
  REQUIRE(res.trajectory.size() == 501);
  REQUIRE(res.losses.size() == 501);
  const double d0 = beds_product_distance(init, target.state_star);
  CHECK(beds_product_distance(res.trajectory.back(), target.state_star) < 1e-3 * d0);
  for (std::size_t k = 1; k < res.losses.size(); ++k) CHECK(res.losses[k].total <= res.losses[k - 1].total + 1e-15);

  // Static at the target: only the data term remains.
  DataObjective flat{[](const BedsState&) { return 0.25; }, {}};
  const auto still = optimize(target.state_star, target, flat, {2.0, 0.05, 20, Method::natural});
  for (const auto& lb : still.losses) CHECK(lb.total == 0.5);
  for (const auto& st : still.trajectory.states()) CHECK(st == target.state_star);

  // Ill-conditioned: precision far from the target on both sides.
  auto steps_to = [&](Method m, const BedsState& start, const BedsTarget& tg, double eta) {
    const auto r = optimize(start, tg, {}, {1.0, eta, 4000, m});
    for (std::size_t k = 0; k < r.trajectory.size(); ++k)
      if (beds_product_distance(r.trajectory.states()[k], tg.state_star) < 0.01) return static_cast<int>(k);
    return 1 << 30;
  };
  const BedsTarget ill{BedsState({{0.0, 1e-2}, {0.0, 1e2}}, {0.0, 1.0})};
  const BedsState ill_init({{1.0, 2e-2}, {0.1, 50.0}}, {0.5, 1.5});
  const int natural = steps_to(Method::natural, ill_init, ill, 0.05);
  const int plain = steps_to(Method::plain, ill_init, ill, 0.005);
  INFO("natural " << natural << " plain " << plain);
  CHECK(natural < plain);

  CHECK_THROWS_AS(optimize(init, target, {}, {1.0, 0.05, 0, Method::natural}), Error);
  DataObjective bad{[](const BedsState&) { return std::nan(""); }, {}};
  try {
    (void)optimize(init, target, bad, o);
    FAIL("expected numeric failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric_failure);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("argmin is unchanged when data and lambda are rescaled inversely", "[regularizers]") {
  // Synthetic estimation task: quadratic data term pulling mu towards 1.5.
  const BedsTarget target{{0.0, 1.0, 0.0, 1.0}};
  auto task = [](double scale) {
    return DataObjective{[scale](const BedsState& s) {
                           const double e = s.spatial(0).mu() - 1.5;
                           return scale * 0.5 * e * e;
                         },
                         [scale](const BedsState& s) {
                           auto g = BedsGradient::zeros(1);
                           g.mu[0] = scale * (s.spatial(0).mu() - 1.5);
                           return g;
                         }};
  };
  const BedsState init(-1.0, 0.5, 1.0, 3.0);
  const auto a = optimize(init, target, task(1.0), {2.0, 0.05, 300, Method::natural}).trajectory.back();
  for (double c : {0.5, 4.0, 10.0}) {
    const auto b = optimize(init, target, task(c), {2.0 / c, 0.05, 300, Method::natural}).trajectory.back();
    CHECK_THAT(b.spatial(0).mu(), WithinAbs(a.spatial(0).mu(), 1e-9));
    CHECK_THAT(b.spatial(0).tau(), WithinAbs(a.spatial(0).tau(), 1e-9));
    CHECK_THAT(b.temporal().kappa(), WithinAbs(a.temporal().kappa(), 1e-9));
  }
}

TEST_CASE("GNC objective and schedule", "[regularizers]") {
  const ScalarObjective smooth = [](double x) { return x * x; };
  const ScalarObjective well = [](double x) { return (x * x - 1) * (x * x - 1); };
  CHECK(gnc_objective(0.7, 0.0, smooth, well) == smooth(0.7));
  CHECK(gnc_objective(0.7, 1.0, smooth, well) == well(0.7));
  CHECK(gnc_objective(1.0, 0.5, smooth, well) == 0.5);
  CHECK_THROWS_AS(gnc_objective(1.0, 1.5, smooth, well), Error);

  CHECK(effective_temperature(1.0) == 1.0);
  CHECK(effective_temperature(4.0) == 0.25);
  CHECK(effective_temperature(0.1) == 10.0);
  CHECK_THROWS_AS(effective_temperature(0.0), Error);

  const auto sch = GncSchedule::coupled(11, 0.01, 0.1);
  CHECK_NOTHROW(sch.validate());
  CHECK(sch.alpha.front() == 0.0);
  CHECK(sch.alpha.back() == 1.0);
  CHECK_THAT(sch.beta.back(), WithinRel(0.1, 1e-15));
  CHECK_THROWS_AS((GncSchedule{{0.1, 1.0}, {1.0, 1.0}}.validate()), Error);
  CHECK_THROWS_AS((GncSchedule{{0.0, 0.9}, {1.0, 1.0}}.validate()), Error);
  CHECK_THROWS_AS((GncSchedule{{0.0, 1.0}, {1.0, 0.0}}.validate()), Error);
  CHECK_THROWS_AS((GncSchedule{{0.0, 0.6, 0.5, 1.0}, {1, 1, 1, 1}}.validate()), Error);
  CHECK_THROWS_AS((GncSchedule{{0.0}, {1.0}}.validate()), Error);
}

TEST_CASE("Gauss-Hermite expectations", "[regularizers]") {
  const GaussianBelief q(0.3, 4.0);
  const double v = 0.25;
  CHECK_THAT(gaussian_expectation(q, [](double) { return 1.0; }), WithinRel(1.0, 1e-14));
  CHECK_THAT(gaussian_expectation(q, [](double x) { return x; }), WithinRel(0.3, 1e-14));
  CHECK_THAT(gaussian_expectation(q, [](double x) { return (x - 0.3) * (x - 0.3); }), WithinRel(v, 1e-13));
  CHECK_THAT(gaussian_expectation(q, [](double x) { return std::pow(x - 0.3, 4); }), WithinRel(3 * v * v, 1e-13));
  // Degree 30 is still integrated exactly: E z^30 = 29!!.
  double dfact = 1.0;
  for (int k = 29; k > 1; k -= 2) dfact *= k;
  CHECK_THAT(gaussian_expectation({0.0, 1.0}, [](double x) { return std::pow(x, 30); }), WithinRel(dfact, 1e-10));
  // Smoothing the double well with sd 1/sqrt(tau) reproduces the closed form.
  CHECK_THAT(gaussian_expectation({0.8, 1.0 / (0.5 * 0.5)}, [](double x) { return (x * x - 1) * (x * x - 1); }),
             WithinRel(smoothed_well(0.8, 0.5), 1e-13));
  CHECK_THROWS_AS(gaussian_expectation(q, [](double) { return std::nan(""); }), Error);
}

TEST_CASE("annealed descent", "[regularizers]") {
  const ScalarObjective well = [](double x) { return (x * x - 1) * (x * x - 1); };
  const ScalarObjective surrogate = [](double x) { return smoothed_well(x, 0.5); };
  const auto sch = GncSchedule::coupled(20, 0.01, 0.1);
  const GaussianBelief prior(0.0, 1.0);

  for (double sign : {1.0, -1.0}) {
    const auto stages = run_gnc({0.5 * sign, 25.0}, sch, prior, well, surrogate);
    REQUIRE(stages.size() == 20);
    const double m = stages.back().q.mu();
    INFO("final mean " << m);
    CHECK(std::abs(m - sign) < 0.05);
    CHECK(stages.back().temperature == effective_temperature(stages.back().beta));
  }

  // Overwhelming dissipation pins q to the prior.
  GncSchedule pin{{0.0, 0.5, 1.0}, {1e6, 1e6, 1e6}};
  const auto pinned = run_gnc({0.7, 9.0}, pin, {0.2, 2.0}, well, surrogate);
  CHECK(gaussian_fr_distance(pinned.back().q, {0.2, 2.0}) < 0.01);

  // Bowl and prior share the minimiser. A schedule must reach alpha = 1, so the
  // bowl serves as both surrogate and target, which makes alpha irrelevant.
  const ScalarObjective bowl = [](double x) { return x * x; };
  GncOptions o;
  o.steps_per_stage = 200;
  const auto bowl_run = run_gnc({1.5, 1.0}, GncSchedule::coupled(5, 0.5, 0.5), prior, bowl, bowl, o);
  CHECK(std::abs(bowl_run.back().q.mu()) < 1e-3);
}
