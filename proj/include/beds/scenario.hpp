#pragma once

// Scenario dispatch for the command-line front end: runs one configured
// pipeline, writes its CSV artifacts and a versioned report.json.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "beds/config.hpp"
#include "beds/csv.hpp"
#include "beds/dynamics.hpp"
#include "beds/error.hpp"
#include "beds/geometry.hpp"
#include "beds/gnc.hpp"
#include "beds/hierarchy.hpp"
#include "beds/network.hpp"
#include "beds/optimizer.hpp"
#include "beds/rng.hpp"
#include "beds/state.hpp"
#include "beds/taxonomy.hpp"
#include "beds/thermo.hpp"
#include "beds/vonmises_path.hpp"

namespace beds {

inline constexpr int kReportSchemaVersion = 1;

struct RunError {
  ErrorKind kind = ErrorKind::numeric_failure;
  std::string message;
  std::optional<double> residual;
};

struct RunReport {
  ScenarioKind kind = ScenarioKind::dissipate;
  std::string config_text;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> notes;
  std::vector<std::string> artifacts;  // file names relative to out_dir
  double wall_time_s = 0.0;
  std::optional<RunError> error;

  bool ok() const noexcept { return !error.has_value(); }

  nlohmann::json to_json(const ScenarioConfig& cfg) const {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["scenario"] = std::string(to_string(kind));
    j["status"] = ok() ? "ok" : "error";
    nlohmann::json echo;
    echo["seed"] = cfg.seed;
    echo["out_dir"] = cfg.out_dir;
    for (const auto& [k, v] : cfg.params) std::visit([&, &key = k](const auto& x) { echo["params"][key] = x; }, v);
    j["config"] = echo;
    j["config_text"] = config_text;
    j["metrics"] = metrics;
    j["notes"] = notes;
    j["artifacts"] = artifacts;
    j["wall_time_s"] = wall_time_s;
    if (error) {
      nlohmann::json e;
      e["kind"] = std::string(to_string(error->kind));
      e["message"] = error->message;
      if (error->residual) e["residual"] = *error->residual;
      j["error"] = e;
    }
    return j;
  }
};

/// CLI exit status for a failed run.
constexpr int exit_code(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::config: return 2;
    case ErrorKind::io: return 4;
    default: return 3;
  }
}

// ---------------------------------------------------------------------------
// CSV layouts

inline std::vector<std::string> trajectory_schema(std::size_t d) {
  std::vector<std::string> s{"t"};
  auto indexed = [d](const char* base, std::size_t i) {
    return d == 1 ? std::string(base) : std::string(base) + "_" + std::to_string(i);
  };
  for (std::size_t i = 0; i < d; ++i) s.push_back(indexed("mu", i));
  for (std::size_t i = 0; i < d; ++i) s.push_back(indexed("tau", i));
  for (const char* c : {"phi", "kappa", "C", "regime"}) s.emplace_back(c);
  return s;
}

inline CsvRow trajectory_row(const Trajectory& tr, std::size_t k) {
  const auto& s = tr.states()[k];
  CsvRow row{tr.times()[k]};
  for (const auto& g : s.spatial()) row.emplace_back(g.mu());
  for (const auto& g : s.spatial()) row.emplace_back(g.tau());
  row.emplace_back(s.temporal().phi());
  row.emplace_back(s.temporal().kappa());
  row.emplace_back(tr.diagnostics()[k].crystallization);
  row.emplace_back(std::string(to_string(tr.diagnostics()[k].regime)));
  return row;
}

inline std::vector<CsvRow> trajectory_rows(const Trajectory& tr) {
  std::vector<CsvRow> rows;
  rows.reserve(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) rows.push_back(trajectory_row(tr, k));
  return rows;
}

inline std::vector<std::string> network_history_schema(std::size_t n_agents) {
  std::vector<std::string> s{"round", "E_data", "E_interact", "E_prior", "E_total", "edge_count"};
  for (std::size_t i = 0; i < n_agents; ++i) {
    s.push_back("mu_" + std::to_string(i));
    s.push_back("tau_" + std::to_string(i));
  }
  return s;
}

inline std::vector<CsvRow> network_history_rows(const std::vector<NetworkSnapshot>& hist) {
  std::vector<CsvRow> rows;
  rows.reserve(hist.size());
  for (const auto& h : hist) {
    CsvRow r{static_cast<std::int64_t>(h.round), h.energy.data, h.energy.interact, h.energy.prior, h.energy.total,
             static_cast<std::int64_t>(h.edge_count)};
    for (const auto& b : h.beliefs) {
      r.emplace_back(b.mu());
      r.emplace_back(b.tau());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Scenario builders shared with the tests

struct TwoClusterParams {
  int agents_per_cluster = 3;
  double cluster_mu = 5.0;
  double jitter = 0.1;
  double prior_tau = 0.01;
  double data_tau = 0.05;
  double psi0 = 0.5;
  std::size_t window = 32;
};

/// Agents 0..n-1 observe data near -cluster_mu, n..2n-1 near +cluster_mu;
/// every pair starts coupled at psi0 and every belief starts at the prior.
inline AgentGraph two_cluster_graph(std::uint64_t seed, const TwoClusterParams& p = {}) {
  auto rng = SplitMix64::stream(seed, "network/data");
  AgentGraph g(p.window);
  const int n = 2 * p.agents_per_cluster;
  const GaussianBelief prior(0.0, p.prior_tau);
  for (int i = 0; i < n; ++i) {
    const double centre = i < p.agents_per_cluster ? -p.cluster_mu : p.cluster_mu;
    g.add_agent({i, prior, prior, {centre + p.jitter * rng.normal(), p.data_tau}});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j, p.psi0);
  return g;
}

/// E over N(theta, s^2) noise of the double well (theta^2 - 1)^2.
inline double smoothed_double_well(double theta, double s) {
  const double s2 = s * s;
  const double t2 = theta * theta;
  return t2 * t2 + (6.0 * s2 - 2.0) * t2 + 3.0 * s2 * s2 - 2.0 * s2 + 1.0;
}

inline double double_well(double theta) { return (theta * theta - 1.0) * (theta * theta - 1.0); }

enum class SignalMode { constant, settle, oscillate, drift };

inline SignalMode parse_signal_mode(const std::string& s) {
  if (s == "settle") return SignalMode::settle;
  if (s == "oscillate") return SignalMode::oscillate;
  if (s == "drift") return SignalMode::drift;
  return SignalMode::constant;
}

/// Positive synthetic signal base * exp(amp * shape(t)).
inline double synthetic_signal(SignalMode m, double base, double amp, double t, double t_end, double period,
                               double relax) {
  switch (m) {
    case SignalMode::constant: return base;
    case SignalMode::settle: return base * std::exp(amp * std::exp(-t / relax));
    case SignalMode::oscillate: return base * std::exp(amp * std::sin(2.0 * std::numbers::pi * t / period));
    case SignalMode::drift: return base * std::exp(amp * t / t_end);
  }
  return base;
}

// ---------------------------------------------------------------------------

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, RunReport& report) : dir_(std::move(dir)), report_(report) {}

  void csv(const std::string& name, const std::vector<std::string>& schema, const std::vector<CsvRow>& rows) {
    emit_csv(dir_ / name, schema, rows);
    report_.artifacts.push_back(name);
  }

  void text(const std::string& name, std::string_view body) {
    write_text_file(dir_ / name, body);
    report_.artifacts.push_back(name);
  }

 private:
  std::filesystem::path dir_;
  RunReport& report_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorKind::config, msg);
}

inline void run_geodesic(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  const GaussianBelief a(c.real("mu_a"), c.real("tau_a"));
  const GaussianBelief b(c.real("mu_b"), c.real("tau_b"));
  const auto n = c.integer("samples");
  require(n >= 2, "geodesic: samples must be >= 2");
  const double d = gaussian_fr_distance(a, b);
  std::vector<CsvRow> rows;
  double worst = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    const auto p = gaussian_geodesic(a, b, s);
    const double da = gaussian_fr_distance(a, p);
    worst = std::max(worst, std::abs(da - s * d));
    rows.push_back({s, p.mu(), p.tau(), da});
  }
  out.csv("geodesic.csv", {"s", "mu", "tau", "d_from_a"}, rows);

  VonMisesPathOptions vo;
  vo.segments = static_cast<int>(c.integer("vm_segments"));
  vo.max_iterations = static_cast<int>(c.integer("vm_max_iterations"));
  vo.tolerance = c.real("vm_tolerance");
  require(vo.segments >= 2, "geodesic: vm_segments must be >= 2");
  const VonMisesBelief va(c.real("phi_a"), c.real("kappa_a"));
  const VonMisesBelief vb(c.real("phi_b"), c.real("kappa_b"));
  const auto path = vonmises_fr_path(va, vb, vo);
  std::vector<CsvRow> vrows;
  for (std::size_t k = 0; k < path.nodes.size(); ++k)
    vrows.push_back({static_cast<std::int64_t>(k), path.nodes[k].phi(), path.nodes[k].kappa()});
  out.csv("vonmises_path.csv", {"node", "phi", "kappa"}, vrows);

  const double dt = path.distance;
  rep.metrics["d_spatial"] = d;
  rep.metrics["d_temporal"] = dt;
  rep.metrics["d_product"] = std::sqrt(d * d + dt * dt);
  rep.metrics["kl_ab"] = gaussian_kl(a, b);
  rep.metrics["kl_ba"] = gaussian_kl(b, a);
  rep.metrics["max_arc_length_error"] = worst;
  rep.metrics["vm_iterations"] = path.iterations;
  rep.metrics["vm_residual"] = path.residual;
}

inline void run_dissipate(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  require(c.real("dt") <= c.real("t_end"), "dissipate: dt must be <= t_end");
  const BedsState s0(c.real("mu0"), c.real("tau0"), c.real("phi0"), c.real("kappa0"));
  const DissipationParams p{c.real("gamma"), c.real("gamma_kappa"), c.real("kT")};
  const auto tr = dissipate_rk4(s0, p, c.real("t_end"), c.real("dt"), c.real("eps"));
  out.csv("trajectory.csv", trajectory_schema(1), trajectory_rows(tr));

  const auto exact = dissipate_closed_form(s0, p, c.real("t_end"));
  const auto& fin = tr.back();
  rep.metrics["initial_C"] = tr.diagnostics().front().crystallization;
  rep.metrics["final_C"] = tr.diagnostics().back().crystallization;
  rep.metrics["final_regime"] = std::string(to_string(tr.diagnostics().back().regime));
  rep.metrics["final_tau"] = fin.spatial(0).tau();
  rep.metrics["final_kappa"] = fin.temporal().kappa();
  rep.metrics["rk4_rel_error_tau"] =
      std::abs(fin.spatial(0).tau() - exact.spatial(0).tau()) / exact.spatial(0).tau();
  rep.metrics["rk4_rel_error_kappa"] =
      exact.temporal().kappa() > 0.0
          ? std::abs(fin.temporal().kappa() - exact.temporal().kappa()) / exact.temporal().kappa()
          : std::abs(fin.temporal().kappa());
  rep.metrics["final_flags"] =
      std::string(to_string(crystallization_flags(fin, c.real("tau_crit"), c.real("kappa_crit"))));
  rep.metrics["steps"] = tr.size() - 1;
}

inline void run_optimize(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  const BedsState init(c.real("mu0"), c.real("tau0"), c.real("phi0"), c.real("kappa0"));
  const BedsTarget target{BedsState(c.real("mu_star"), c.real("tau_star"), c.real("phi_star"), c.real("kappa_star"))};
  OptimizeOptions o;
  o.lambda = c.real("lambda");
  o.eta = c.real("eta");
  o.steps = static_cast<int>(c.integer("steps"));
  o.method = c.text("method") == "plain" ? Method::plain : Method::natural;

  DataObjective data;
  const double dtau = c.real("data_tau");
  const double dmu = c.real("data_mu");
  if (dtau > 0.0) {
    // Gaussian log-likelihood of an observation at data_mu with precision data_tau.
    data.loss = [=](const BedsState& s) {
      const double r = s.spatial(0).mu() - dmu;
      return 0.5 * dtau * r * r;
    };
    data.gradient = [=](const BedsState& s) {
      auto g = BedsGradient::zeros(1);
      g.mu[0] = dtau * (s.spatial(0).mu() - dmu);
      return g;
    };
  }
  const auto res = optimize(init, target, data, o);

  auto schema = trajectory_schema(1);
  for (const char* k : {"spatial_mu", "spatial_tau", "temporal_phi", "temporal_kappa", "data", "total"})
    schema.emplace_back(k);
  auto rows = trajectory_rows(res.trajectory);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& l = res.losses[k];
    for (double v : {l.spatial_mu, l.spatial_tau, l.temporal_phi, l.temporal_kappa, l.data, l.total})
      rows[k].emplace_back(v);
  }
  out.csv("optimize.csv", schema, rows);

  rep.metrics["method"] = std::string(to_string(o.method));
  rep.metrics["initial_d_F"] = beds_product_distance(init, target.state_star);
  rep.metrics["final_d_F"] = beds_product_distance(res.trajectory.back(), target.state_star);
  rep.metrics["initial_total"] = res.losses.front().total;
  rep.metrics["final_total"] = res.losses.back().total;
  rep.metrics["final_C"] = res.trajectory.diagnostics().back().crystallization;
  rep.metrics["phi_skips"] = res.phi_skips;
}

inline void run_gnc_scenario(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  const auto stages = c.integer("stages");
  require(stages >= 2, "gnc: stages must be >= 2");
  const double s = c.real("smoothing");
  const auto sched = GncSchedule::coupled(static_cast<std::size_t>(stages), c.real("beta0"), c.real("beta1"));
  GncOptions o;
  o.steps_per_stage = static_cast<int>(c.integer("steps_per_stage"));
  o.eta = c.real("eta");
  o.max_step = c.real("max_step");
  const auto trace = run_gnc({c.real("mu0"), c.real("tau0")}, sched, {c.real("prior_mu"), c.real("prior_tau")},
                             double_well, [s](double t) { return smoothed_double_well(t, s); }, o);
  std::vector<CsvRow> rows;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& st = trace[k];
    rows.push_back({static_cast<std::int64_t>(k), st.alpha, st.beta, st.temperature, st.q.mu(), st.q.tau(),
                    st.objective});
  }
  out.csv("gnc.csv", {"stage", "alpha", "beta", "T_eff", "mu", "tau", "objective"}, rows);
  const auto& fin = trace.back().q;
  const double well = fin.mu() >= 0.0 ? 1.0 : -1.0;
  rep.metrics["final_mu"] = fin.mu();
  rep.metrics["final_tau"] = fin.tau();
  rep.metrics["nearest_well"] = well;
  rep.metrics["distance_to_well"] = std::abs(fin.mu() - well);
  rep.metrics["final_objective"] = trace.back().objective;
  rep.metrics["final_T_eff"] = trace.back().temperature;
}

inline void run_network_scenario(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  TwoClusterParams p;
  p.agents_per_cluster = static_cast<int>(c.integer("agents_per_cluster"));
  p.cluster_mu = c.real("cluster_mu");
  p.jitter = c.real("jitter");
  p.prior_tau = c.real("prior_tau");
  p.data_tau = c.real("data_tau");
  p.psi0 = c.real("psi0");
  p.window = static_cast<std::size_t>(c.integer("window"));
  NetworkSchedule sc;
  sc.rounds = static_cast<int>(c.integer("rounds"));
  sc.potential_every = static_cast<int>(c.integer("potential_every"));
  sc.prune_every = static_cast<int>(c.integer("prune_every"));
  sc.eta_psi = c.real("eta_psi");
  sc.eps_prune = c.real("eps_prune");
  sc.temperature = c.real("temperature");
  require(sc.potential_every <= sc.prune_every, "network: potential_every must be <= prune_every");

  const auto g0 = two_cluster_graph(static_cast<std::uint64_t>(c.seed), p);
  const auto run = run_network(g0, sc);
  const auto n = g0.agents().size();
  out.csv("network_history.csv", network_history_schema(n), network_history_rows(run.history));
  out.text("edges.txt", edge_list(run.final_graph));

  int inter = 0, intra_a = 0, intra_b = 0;
  for (const auto& e : run.final_graph.potentials()) {
    const bool ia = e.i < p.agents_per_cluster, ja = e.j < p.agents_per_cluster;
    if (ia != ja) ++inter;
    else if (ia) ++intra_a;
    else ++intra_b;
  }
  const auto diag = topology_diagnostics(run.final_graph);
  const auto& e = run.history.back().energy;
  rep.metrics["E_data"] = e.data;
  rep.metrics["E_interact"] = e.interact;
  rep.metrics["E_prior"] = e.prior;
  rep.metrics["E_total"] = e.total;
  rep.metrics["edge_count"] = run.final_graph.potentials().size();
  rep.metrics["inter_cluster_edges"] = inter;
  rep.metrics["intra_cluster_edges"] = {intra_a, intra_b};
  rep.metrics["sparsity"] = diag.sparsity;
  rep.metrics["mean_clustering"] = diag.mean_clustering;
  rep.metrics["degree_histogram"] = diag.degree_histogram;
  rep.notes.push_back(
      "belief rounds restart from prior (+) data (+) psi-weighted neighbour evidence; messages carry the "
      "sender's local evidence rather than its current belief, which keeps precision bounded");
}

inline void run_taxonomy_scenario(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  const auto n = c.integer("samples");
  const auto w = c.integer("window");
  require(w >= 2, "taxonomy: window must be >= 2");
  require(n >= 2 * w, "taxonomy: samples must be >= 2 * window");
  const double dt = c.real("dt");
  const double t_end = dt * static_cast<double>(n - 1);
  const auto tm = parse_signal_mode(c.text("tau_mode"));
  const auto km = parse_signal_mode(c.text("kappa_mode"));
  Trajectory tr;
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    const double tau = synthetic_signal(tm, c.real("tau_base"), c.real("tau_amp"), t, t_end, c.real("period"),
                                        c.real("relax"));
    const double kappa = synthetic_signal(km, c.real("kappa_base"), c.real("kappa_amp"), t, t_end,
                                          c.real("period"), c.real("relax"));
    tr.push(t, BedsState(0.0, tau, 0.0, kappa));
  }
  out.csv("taxonomy_trajectory.csv", trajectory_schema(1), trajectory_rows(tr));
  const auto label = classify_trajectory(tr, static_cast<std::size_t>(w), c.real("tol"));
  rep.metrics["tau_regime"] = std::string(to_string(label.tau_regime));
  rep.metrics["kappa_regime"] = std::string(to_string(label.kappa_regime));
  rep.metrics["cls"] = std::string(to_string(label.cls));
}

inline void run_bounds(const ScenarioConfig& c, RunReport& rep, ArtifactWriter& out) {
  const double kT = c.has("temperature_K") ? thermal_energy(c.real("temperature_K")) : c.real("kT");
  const double gamma = c.real("gamma");
  const double tau_star = c.real("tau_star");
  const double bits = c.real("bits");
  rep.metrics["kT"] = kT;
  rep.metrics["p_min"] = min_maintenance_power(gamma, tau_star, kT);
  rep.metrics["min_information_rate"] = min_information_rate(gamma, tau_star);
  rep.metrics["landauer_cost"] = landauer_cost(bits, kT);
  if (c.has("e_actual")) rep.metrics["efficiency"] = thermo_efficiency(bits, c.real("e_actual"), kT);

  const auto levels = c.integer("levels");
  const double r = c.real("r");
  const double e0 = c.real("e0");
  std::vector<CsvRow> rows;
  bool all = true;
  for (std::int64_t n = 1; n <= levels; ++n) {
    const auto m = total_maintenance_energy(e0, r, static_cast<int>(n));
    all = all && m.satisfied;
    rows.push_back({n, m.partial_sum, m.bound, m.gap});
  }
  out.csv("bounds.csv", {"levels", "partial_sum", "bound", "gap"}, rows);
  const auto fin = total_maintenance_energy(e0, r, static_cast<int>(levels));
  rep.metrics["partial_sum"] = fin.partial_sum;
  rep.metrics["bound"] = fin.bound;
  rep.metrics["gap"] = fin.gap;
  rep.metrics["bound_satisfied"] = all;
}

}  // namespace detail

/// Runs the scenario into cfg.out_dir. Module errors are captured in the
/// report rather than thrown; report.json is written whenever the output
/// directory is usable.
inline RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport rep;
  rep.kind = cfg.kind;
  rep.config_text = render(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const std::filesystem::path dir(cfg.out_dir);

  bool dir_ok = false;
  try {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
      throw Error(ErrorKind::io, "cannot create output directory " + dir.string());
    dir_ok = true;
    detail::ArtifactWriter out(dir, rep);
    switch (cfg.kind) {
      case ScenarioKind::geodesic: detail::run_geodesic(cfg, rep, out); break;
      case ScenarioKind::dissipate: detail::run_dissipate(cfg, rep, out); break;
      case ScenarioKind::optimize: detail::run_optimize(cfg, rep, out); break;
      case ScenarioKind::gnc: detail::run_gnc_scenario(cfg, rep, out); break;
      case ScenarioKind::network: detail::run_network_scenario(cfg, rep, out); break;
      case ScenarioKind::taxonomy: detail::run_taxonomy_scenario(cfg, rep, out); break;
      case ScenarioKind::bounds: detail::run_bounds(cfg, rep, out); break;
    }
  } catch (const Error& e) {
    rep.error = RunError{e.kind(), std::string(to_string(cfg.kind)) + " scenario: " + e.what(), e.residual()};
  } catch (const std::exception& e) {
    rep.error = RunError{ErrorKind::numeric_failure, std::string(to_string(cfg.kind)) + " scenario: " + e.what(), {}};
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (dir_ok) {
    try {
      write_text_file(dir / "report.json", rep.to_json(cfg).dump(2) + "\n");
    } catch (const Error& e) {
      if (!rep.error) rep.error = RunError{e.kind(), e.what(), {}};
    }
  }
  return rep;
}

}  // namespace beds
