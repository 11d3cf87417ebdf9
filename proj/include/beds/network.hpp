#pragma once

// Multi-agent BEDS on a Gaussian MRF.
//
//   E = sum_i KL(q_i || p_i^data) + sum_(ij) psi_ij d_F(q_i, q_j)^2 + sum_i KL(q_i || pi_i)
//
// Three timescales: belief rounds (fusion), potential updates (Hebbian-style
// agreement minus baseline), and topology pruning.
//
// Message model: each round restarts every agent from its local evidence
// e_i = pi_i (+) p_i^data and fuses in the neighbours' evidence with precision
// scaled by psi_ij. Messages carry the sender's evidence, not its current
// belief, so a belief never re-absorbs its own information through a
// neighbour and precision stays bounded by the sum of evidence.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "beds/error.hpp"
#include "beds/geometry.hpp"

namespace beds {

/// Product of two Gaussian densities, renormalized.
inline GaussianBelief fuse(const GaussianBelief& a, const GaussianBelief& b) {
  const double tau = a.tau() + b.tau();
  return {(a.tau() * a.mu() + b.tau() * b.mu()) / tau, tau};
}

struct Agent {
  int id = 0;
  GaussianBelief belief{0.0, 1.0};
  GaussianBelief prior{0.0, 1.0};
  GaussianBelief data{0.0, 1.0};

  GaussianBelief evidence() const { return fuse(prior, data); }
};

/// Fixed-capacity ring of agreement values, oldest dropped first.
class AgreementHistory {
 public:
  explicit AgreementHistory(std::size_t capacity = 32) : capacity_(capacity) {
    if (capacity_ == 0) fail(ErrorKind::domain, "AgreementHistory: capacity must be >= 1");
  }

  void push(double v) {
    if (values_.size() == capacity_) values_.pop_front();
    values_.push_back(v);
  }

  bool empty() const noexcept { return values_.empty(); }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  double back() const { return values_.back(); }

  double mean() const {
    if (values_.empty()) fail(ErrorKind::insufficient_history, "AgreementHistory: empty");
    double acc = 0.0;
    for (double v : values_) acc += v;
    return acc / static_cast<double>(values_.size());
  }

  friend bool operator==(const AgreementHistory&, const AgreementHistory&) = default;

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

struct Potential {
  int i = 0;
  int j = 0;
  double psi = 0.0;
  AgreementHistory history;
};

struct NetworkEnergy {
  double data = 0.0;
  double interact = 0.0;
  double prior = 0.0;
  double total = 0.0;
  double log_gibbs_weight = 0.0;  // -total / T
};

class AgentGraph {
 public:
  AgentGraph() = default;
  explicit AgentGraph(std::size_t history_capacity) : capacity_(history_capacity) {}

  void add_agent(const Agent& a) {
    if (index_.count(a.id)) fail(ErrorKind::domain, "AgentGraph: duplicate agent id " + std::to_string(a.id));
    index_[a.id] = agents_.size();
    agents_.push_back(a);
  }

  void add_edge(int i, int j, double psi) {
    if (i == j) fail(ErrorKind::domain, "AgentGraph: self-loop on agent " + std::to_string(i));
    if (!index_.count(i) || !index_.count(j)) fail(ErrorKind::domain, "AgentGraph: edge references an unknown agent");
    if (!(psi >= 0.0) || !std::isfinite(psi)) fail(ErrorKind::domain, "AgentGraph: psi must be finite and >= 0");
    if (i > j) std::swap(i, j);
    for (const auto& p : potentials_)
      if (p.i == i && p.j == j)
        fail(ErrorKind::domain, "AgentGraph: duplicate edge " + std::to_string(i) + "-" + std::to_string(j));
    potentials_.push_back({i, j, psi, AgreementHistory(capacity_)});
  }

  const std::vector<Agent>& agents() const noexcept { return agents_; }
  std::vector<Agent>& agents() noexcept { return agents_; }
  const std::vector<Potential>& potentials() const noexcept { return potentials_; }
  std::vector<Potential>& potentials() noexcept { return potentials_; }
  const Agent& agent(int id) const { return agents_.at(position(id)); }
  std::size_t position(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::domain, "AgentGraph: unknown agent id " + std::to_string(id));
    return it->second;
  }
  std::size_t history_capacity() const noexcept { return capacity_; }
  int round() const noexcept { return round_; }
  void set_round(int r) noexcept { round_ = r; }

  friend bool operator==(const AgentGraph& a, const AgentGraph& b) {
    if (a.round_ != b.round_ || a.agents_.size() != b.agents_.size() || a.potentials_.size() != b.potentials_.size())
      return false;
    for (std::size_t k = 0; k < a.agents_.size(); ++k) {
      const auto &x = a.agents_[k], &y = b.agents_[k];
      if (x.id != y.id || !(x.belief == y.belief) || !(x.prior == y.prior) || !(x.data == y.data)) return false;
    }
    for (std::size_t k = 0; k < a.potentials_.size(); ++k) {
      const auto &x = a.potentials_[k], &y = b.potentials_[k];
      if (x.i != y.i || x.j != y.j || x.psi != y.psi || !(x.history == y.history)) return false;
    }
    return true;
  }

 private:
  std::vector<Agent> agents_;
  std::vector<Potential> potentials_;
  std::map<int, std::size_t> index_;
  std::size_t capacity_ = 32;
  int round_ = 0;
};

inline double agreement(const GaussianBelief& a, const GaussianBelief& b) {
  const double d = gaussian_fr_distance(a, b);
  return std::exp(-d * d);
}

inline NetworkEnergy network_energy(const AgentGraph& g, double temperature = 1.0) {
  if (!(temperature > 0.0)) fail(ErrorKind::domain, "network_energy: temperature must be > 0");
  NetworkEnergy e;
  for (const auto& a : g.agents()) {
    e.data += gaussian_kl(a.belief, a.data);
    e.prior += gaussian_kl(a.belief, a.prior);
  }
  for (const auto& p : g.potentials()) {
    const double d = gaussian_fr_distance(g.agent(p.i).belief, g.agent(p.j).belief);
    e.interact += p.psi * d * d;
  }
  e.total = e.data + e.interact + e.prior;
  e.log_gibbs_weight = -e.total / temperature;
  return e;
}

/// Appends exp(-d_F^2) of the current beliefs to every edge's history.
inline void record_agreement(AgentGraph& g) {
  for (auto& p : g.potentials()) p.history.push(agreement(g.agent(p.i).belief, g.agent(p.j).belief));
}

/// One synchronous fusion round; every agent reads the pre-round graph.
inline AgentGraph belief_round(const AgentGraph& g) {
  AgentGraph next = g;
  std::vector<GaussianBelief> fused;
  fused.reserve(g.agents().size());
  for (const auto& a : g.agents()) fused.push_back(a.evidence());
  for (const auto& p : g.potentials()) {
    if (p.psi == 0.0) continue;
    const std::size_t pi = g.position(p.i), pj = g.position(p.j);
    const GaussianBelief ei = g.agents()[pi].evidence();
    const GaussianBelief ej = g.agents()[pj].evidence();
    fused[pi] = fuse(fused[pi], {ej.mu(), p.psi * ej.tau()});
    fused[pj] = fuse(fused[pj], {ei.mu(), p.psi * ei.tau()});
  }
  for (std::size_t k = 0; k < fused.size(); ++k) next.agents()[k].belief = fused[k];
  next.set_round(g.round() + 1);
  record_agreement(next);
  return next;
}

enum class BaselineMode { running_mean };

/// psi <- max(0, psi + eta_psi (agreement - baseline)), baseline the running
/// mean of the edge's recorded agreement.
inline AgentGraph potential_update(const AgentGraph& g, double eta_psi,
                                   BaselineMode mode = BaselineMode::running_mean) {
  (void)mode;
  if (!(eta_psi >= 0.0)) fail(ErrorKind::domain, "potential_update: eta_psi must be >= 0");
  AgentGraph next = g;
  for (auto& p : next.potentials()) {
    if (p.history.empty())
      fail(ErrorKind::insufficient_history, "potential_update: edge " + std::to_string(p.i) + "-" +
                                                std::to_string(p.j) + " has no recorded agreement");
    const double now = agreement(next.agent(p.i).belief, next.agent(p.j).belief);
    p.psi = std::max(0.0, p.psi + eta_psi * (now - p.history.mean()));
  }
  return next;
}

inline AgentGraph prune_topology(const AgentGraph& g, double eps_prune) {
  if (!(eps_prune > 0.0)) fail(ErrorKind::domain, "prune_topology: eps_prune must be > 0");
  AgentGraph next = g;
  auto& ps = next.potentials();
  ps.erase(std::remove_if(ps.begin(), ps.end(), [&](const Potential& p) { return p.psi < eps_prune; }), ps.end());
  return next;
}

struct NetworkSnapshot {
  int round = 0;
  NetworkEnergy energy;
  std::size_t edge_count = 0;
  std::vector<GaussianBelief> beliefs;
};

struct NetworkSchedule {
  int rounds = 100;
  int potential_every = 5;
  int prune_every = 50;
  double eta_psi = 1.0;
  double eps_prune = 0.05;
  double temperature = 1.0;
};

struct NetworkRun {
  std::vector<NetworkSnapshot> history;  // round 0 first
  AgentGraph final_graph;
};

inline NetworkSnapshot snapshot(const AgentGraph& g, double temperature) {
  NetworkSnapshot s;
  s.round = g.round();
  s.energy = network_energy(g, temperature);
  s.edge_count = g.potentials().size();
  for (const auto& a : g.agents()) s.beliefs.push_back(a.belief);
  return s;
}

/// Belief rounds every step, potential updates every `potential_every`
/// rounds, pruning every `prune_every` rounds, energies recorded each round.
inline NetworkRun run_network(const AgentGraph& g0, const NetworkSchedule& sc) {
  if (sc.rounds < 0) fail(ErrorKind::config, "run_network: rounds must be >= 0");
  if (sc.potential_every < 1 || sc.prune_every < 1)
    fail(ErrorKind::config, "run_network: potential_every and prune_every must be >= 1");
  if (sc.potential_every > sc.prune_every)
    fail(ErrorKind::config, "run_network: timescale ordering requires potential_every <= prune_every");

  NetworkRun out;
  AgentGraph g = g0;
  record_agreement(g);
  out.history.push_back(snapshot(g, sc.temperature));
  for (int r = 1; r <= sc.rounds; ++r) {
    g = belief_round(g);
    if (r % sc.potential_every == 0) g = potential_update(g, sc.eta_psi);
    if (r % sc.prune_every == 0) g = prune_topology(g, sc.eps_prune);
    out.history.push_back(snapshot(g, sc.temperature));
  }
  out.final_graph = std::move(g);
  return out;
}

struct TopologyDiagnostics {
  double sparsity = 0.0;
  std::vector<std::size_t> degree_histogram;  // index = degree
  double mean_clustering = 0.0;
};

inline TopologyDiagnostics topology_diagnostics(const AgentGraph& g) {
  TopologyDiagnostics out;
  const std::size_t n = g.agents().size();
  if (n < 2) return out;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& p : g.potentials()) {
    const auto a = g.position(p.i), b = g.position(p.j);
    adj[a][b] = adj[b][a] = true;
  }
  out.sparsity = static_cast<double>(g.potentials().size()) / (0.5 * static_cast<double>(n) * (n - 1));
  double cc = 0.0;
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> nb;
    for (std::size_t u = 0; u < n; ++u)
      if (adj[v][u]) nb.push_back(u);
    degree[v] = nb.size();
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t x = 0; x < nb.size(); ++x)
      for (std::size_t y = x + 1; y < nb.size(); ++y) links += adj[nb[x]][nb[y]] ? 1 : 0;
    cc += 2.0 * static_cast<double>(links) / (static_cast<double>(nb.size()) * (nb.size() - 1));
  }
  out.mean_clustering = cc / static_cast<double>(n);
  out.degree_histogram.assign(*std::max_element(degree.begin(), degree.end()) + 1, 0);
  for (auto d : degree) ++out.degree_histogram[d];
  return out;
}

/// One "i j psi" line per edge, LF terminated, psi at 17 significant digits.
inline std::string edge_list(const AgentGraph& g) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& p : g.potentials()) os << p.i << ' ' << p.j << ' ' << p.psi << '\n';
  return os.str();
}

}  // namespace beds
