#pragma once

// Scenario configuration: a line-oriented "key = value" file with exactly one
// [kind] section header. Blank lines and lines starting with '#' are ignored.
//
//   # two-cluster run
//   [network]
//   seed = 7
//   rounds = 400
//
// Every kind has a typed schema; missing optional keys take their defaults.
// Parsing collects every problem it finds, each tagged with a line number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "beds/csv.hpp"
#include "beds/error.hpp"

namespace beds {

enum class ScenarioKind { geodesic, dissipate, optimize, gnc, network, taxonomy, bounds };

inline constexpr std::string_view kScenarioKinds[] = {"geodesic", "dissipate", "optimize", "gnc",
                                                      "network",  "taxonomy",  "bounds"};

constexpr std::string_view to_string(ScenarioKind k) noexcept { return kScenarioKinds[static_cast<int>(k)]; }

inline std::optional<ScenarioKind> parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kScenarioKinds); ++i)
    if (kScenarioKinds[i] == s) return static_cast<ScenarioKind>(i);
  return std::nullopt;
}

using ParamValue = std::variant<double, std::int64_t, std::string>;

enum class ParamType { real, integer, text };
enum class Constraint { any, nonnegative, positive, unit_open, choice };

struct ParamSpec {
  std::string_view name;
  ParamType type = ParamType::real;
  bool required = false;
  std::optional<ParamValue> fallback;  // default when not required; absent means optional
  Constraint constraint = Constraint::any;
  std::vector<std::string_view> choices = {};
};

namespace detail {

inline ParamSpec req(std::string_view n, Constraint c = Constraint::any) { return {n, ParamType::real, true, {}, c}; }
inline ParamSpec real(std::string_view n, double d, Constraint c = Constraint::any) {
  return {n, ParamType::real, false, ParamValue{d}, c};
}
inline ParamSpec opt_real(std::string_view n, Constraint c) { return {n, ParamType::real, false, {}, c}; }
inline ParamSpec integer(std::string_view n, std::int64_t d, Constraint c = Constraint::positive) {
  return {n, ParamType::integer, false, ParamValue{d}, c};
}
inline ParamSpec choice(std::string_view n, std::string d, std::vector<std::string_view> options) {
  return {n, ParamType::text, false, ParamValue{std::move(d)}, Constraint::choice, std::move(options)};
}

}  // namespace detail

/// Kind-specific keys; `seed` and `out_dir` are common to every kind.
inline const std::vector<ParamSpec>& schema(ScenarioKind kind) {
  using C = Constraint;
  using namespace detail;
  static const std::vector<ParamSpec> geodesic = {
      req("mu_a"), req("tau_a", C::positive), req("mu_b"), req("tau_b", C::positive),
      real("phi_a", 0.0), real("kappa_a", 1.0, C::nonnegative), real("phi_b", 0.0), real("kappa_b", 1.0, C::nonnegative),
      integer("samples", 11), integer("vm_segments", 256), integer("vm_max_iterations", 10000),
      real("vm_tolerance", 1e-8, C::positive)};
  static const std::vector<ParamSpec> dissipate = {
      req("tau0", C::positive), req("kappa0", C::nonnegative), req("gamma", C::nonnegative),
      req("gamma_kappa", C::nonnegative), req("t_end", C::positive), req("dt", C::positive),
      real("mu0", 0.0), real("phi0", 0.0), real("kT", 1.0, C::positive), real("eps", 0.1, C::unit_open),
      real("tau_crit", 1.0, C::positive), real("kappa_crit", 1.0, C::positive)};
  static const std::vector<ParamSpec> optimize = {
      req("mu0"), req("tau0", C::positive), req("phi0"), req("kappa0", C::positive),
      req("mu_star"), req("tau_star", C::positive), req("phi_star"), req("kappa_star", C::positive),
      real("lambda", 1.0, C::positive), real("eta", 0.05, C::positive), integer("steps", 500),
      choice("method", "natural", {"natural", "plain"}), real("data_mu", 0.0), real("data_tau", 0.0, C::nonnegative),
      real("eps", 0.1, C::unit_open)};
  static const std::vector<ParamSpec> gnc = {
      real("mu0", 0.5), real("tau0", 25.0, C::positive), real("prior_mu", 0.0), real("prior_tau", 1.0, C::positive),
      integer("stages", 20), integer("steps_per_stage", 50), real("beta0", 0.01, C::positive),
      real("beta1", 0.1, C::positive), real("eta", 0.5, C::positive), real("smoothing", 0.5, C::positive),
      real("max_step", 0.25, C::positive)};
  static const std::vector<ParamSpec> network = {
      integer("agents_per_cluster", 3), real("cluster_mu", 5.0, C::positive), real("jitter", 0.1, C::nonnegative),
      real("prior_tau", 0.01, C::positive), real("data_tau", 0.05, C::positive), real("psi0", 0.5, C::nonnegative),
      real("eta_psi", 1.0, C::nonnegative), integer("window", 32), integer("rounds", 400, C::nonnegative),
      integer("potential_every", 5), integer("prune_every", 100), real("eps_prune", 0.05, C::positive),
      real("temperature", 1.0, C::positive)};
  static const std::vector<ParamSpec> taxonomy = {
      choice("tau_mode", "constant", {"constant", "settle", "oscillate", "drift"}),
      choice("kappa_mode", "constant", {"constant", "settle", "oscillate", "drift"}),
      integer("samples", 400), real("dt", 0.1, C::positive), real("tau_base", 1.0, C::positive),
      real("kappa_base", 1.0, C::positive), real("tau_amp", 0.5, C::nonnegative), real("kappa_amp", 0.5, C::nonnegative),
      real("period", 10.0, C::positive), real("relax", 2.0, C::positive), integer("window", 50),
      real("tol", 1e-3, C::positive)};
  static const std::vector<ParamSpec> bounds = {
      req("gamma", C::nonnegative), real("tau_star", 1.0, C::positive), real("kT", 1.0, C::positive),
      opt_real("temperature_K", C::positive), real("bits", 1.0, C::nonnegative), opt_real("e_actual", C::positive),
      real("r", 0.5, C::unit_open), real("e0", 1.0, C::positive), integer("levels", 20)};
  switch (kind) {
    case ScenarioKind::geodesic: return geodesic;
    case ScenarioKind::dissipate: return dissipate;
    case ScenarioKind::optimize: return optimize;
    case ScenarioKind::gnc: return gnc;
    case ScenarioKind::network: return network;
    case ScenarioKind::taxonomy: return taxonomy;
    case ScenarioKind::bounds: return bounds;
  }
  return bounds;
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::dissipate;
  std::int64_t seed = 0;
  std::string out_dir = "out";
  std::map<std::string, ParamValue, std::less<>> params;

  bool has(std::string_view key) const { return params.find(key) != params.end(); }

  double real(std::string_view key) const { return std::get<double>(at(key)); }
  std::int64_t integer(std::string_view key) const { return std::get<std::int64_t>(at(key)); }
  const std::string& text(std::string_view key) const { return std::get<std::string>(at(key)); }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

 private:
  const ParamValue& at(std::string_view key) const {
    auto it = params.find(key);
    if (it == params.end()) fail(ErrorKind::config, "config key '" + std::string(key) + "' is not set");
    return it->second;
  }
};

struct ConfigIssue {
  int line = 0;  // 0 when the problem is not tied to a line
  std::string message;
};

struct ConfigParse {
  std::optional<ScenarioConfig> config;
  std::vector<ConfigIssue> issues;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

// Shortest text that parses back to the same double.
inline std::string shortest_real(double d) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return ec == std::errc{} ? std::string(buf, p) : format_real(d);
}

inline std::string describe(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return shortest_real(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

inline std::optional<std::string> check_constraint(const ParamSpec& spec, const ParamValue& v) {
  double x = 0.0;
  if (const auto* d = std::get_if<double>(&v)) x = *d;
  else if (const auto* i = std::get_if<std::int64_t>(&v)) x = static_cast<double>(*i);
  switch (spec.constraint) {
    case Constraint::any: return std::nullopt;
    case Constraint::nonnegative:
      if (x >= 0.0) return std::nullopt;
      return "must be >= 0";
    case Constraint::positive:
      if (x > 0.0) return std::nullopt;
      return "must be > 0";
    case Constraint::unit_open:
      if (x > 0.0 && x < 1.0) return std::nullopt;
      return "must lie in (0, 1)";
    case Constraint::choice: {
      const auto& s = std::get<std::string>(v);
      if (std::find(spec.choices.begin(), spec.choices.end(), s) != spec.choices.end()) return std::nullopt;
      std::string opts;
      for (auto c : spec.choices) opts += (opts.empty() ? "" : ", ") + std::string(c);
      return "must be one of {" + opts + "}";
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses and validates; never throws for malformed input.
inline ConfigParse parse_config_checked(std::string_view text) {
  using detail::trim;
  ConfigParse out;
  auto issue = [&](int line, std::string msg) { out.issues.push_back({line, std::move(msg)}); };

  struct Entry {
    int line;
    std::string value;
  };
  std::optional<ScenarioKind> kind;
  int section_line = 0;
  bool bad_section = false;
  std::map<std::string, Entry, std::less<>> entries;

  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        issue(lineno, "malformed section header '" + std::string(line) + "'");
        bad_section = true;
        continue;
      }
      const auto name = trim(line.substr(1, line.size() - 2));
      if (section_line != 0) {
        issue(lineno, "second section header '[" + std::string(name) + "]' (first on line " +
                          std::to_string(section_line) + "); one scenario per file");
        continue;
      }
      section_line = lineno;
      kind = parse_kind(name);
      if (!kind) {
        std::string opts;
        for (auto k : kScenarioKinds) opts += (opts.empty() ? "" : ", ") + std::string(k);
        issue(lineno, "unknown scenario kind '" + std::string(name) + "' (expected one of " + opts + ")");
        bad_section = true;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      issue(lineno, "expected 'key = value', got '" + std::string(line) + "'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      issue(lineno, "missing key before '='");
      continue;
    }
    if (section_line == 0) {
      issue(lineno, "key '" + std::string(key) + "' appears before the [kind] section header");
      continue;
    }
    if (auto it = entries.find(key); it != entries.end()) {
      issue(lineno, "duplicate key '" + std::string(key) + "' (lines " + std::to_string(it->second.line) + " and " +
                        std::to_string(lineno) + ")");
      continue;
    }
    entries.emplace(std::string(key), Entry{lineno, std::string(value)});
  }

  if (section_line == 0 && !bad_section) issue(0, "missing [kind] section header");
  if (!kind) return out;

  ScenarioConfig cfg;
  cfg.kind = *kind;
  const auto& specs = schema(*kind);

  auto take_common = [&](std::string_view key, auto apply) {
    auto it = entries.find(key);
    if (it == entries.end()) return;
    apply(it->second);
    entries.erase(it);
  };
  take_common("seed", [&](const Entry& e) {
    auto v = detail::parse_number<std::int64_t>(e.value);
    if (!v) issue(e.line, "key 'seed' expects an integer, got '" + e.value + "'");
    else if (*v < 0) issue(e.line, "key 'seed' must be >= 0 (got " + e.value + ")");
    else cfg.seed = *v;
  });
  take_common("out_dir", [&](const Entry& e) {
    if (e.value.empty()) issue(e.line, "key 'out_dir' must not be empty");
    else cfg.out_dir = e.value;
  });

  for (const auto& spec : specs) {
    auto it = entries.find(spec.name);
    if (it == entries.end()) {
      if (spec.required)
        issue(section_line, "missing required key '" + std::string(spec.name) + "' for [" +
                                std::string(to_string(*kind)) + "]");
      else if (spec.fallback)
        cfg.params.emplace(std::string(spec.name), *spec.fallback);
      continue;
    }
    const Entry e = it->second;
    entries.erase(it);
    std::optional<ParamValue> v;
    switch (spec.type) {
      case ParamType::real:
        if (auto d = detail::parse_number<double>(e.value); d && std::isfinite(*d)) v = *d;
        else issue(e.line, "key '" + std::string(spec.name) + "' expects a finite real number, got '" + e.value + "'");
        break;
      case ParamType::integer:
        if (auto i = detail::parse_number<std::int64_t>(e.value)) v = *i;
        else issue(e.line, "key '" + std::string(spec.name) + "' expects an integer, got '" + e.value + "'");
        break;
      case ParamType::text:
        v = e.value;
        break;
    }
    if (!v) continue;
    if (auto why = detail::check_constraint(spec, *v)) {
      issue(e.line, "key '" + std::string(spec.name) + "' " + *why + " (got " + detail::describe(*v) + ")");
      continue;
    }
    cfg.params.emplace(std::string(spec.name), std::move(*v));
  }
  for (const auto& [key, e] : entries)
    issue(e.line, "unknown key '" + key + "' for [" + std::string(to_string(*kind)) + "]");

  std::stable_sort(out.issues.begin(), out.issues.end(),
                   [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  if (out.issues.empty()) out.config = std::move(cfg);
  return out;
}

inline std::string format_issues(const std::vector<ConfigIssue>& issues) {
  std::string msg;
  for (const auto& i : issues) {
    if (!msg.empty()) msg += '\n';
    msg += i.line > 0 ? "line " + std::to_string(i.line) + ": " + i.message : i.message;
  }
  return msg;
}

/// Throws Error(config) listing every issue.
inline ScenarioConfig parse_config(std::string_view text) {
  auto r = parse_config_checked(text);
  if (!r.config) throw Error(ErrorKind::config, format_issues(r.issues));
  return std::move(*r.config);
}

/// Inverse of parse_config for every valid config.
inline std::string render(const ScenarioConfig& cfg) {
  std::string out = "[" + std::string(to_string(cfg.kind)) + "]\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "out_dir = " + cfg.out_dir + "\n";
  for (const auto& spec : schema(cfg.kind)) {
    auto it = cfg.params.find(spec.name);
    if (it == cfg.params.end()) continue;
    out += std::string(spec.name) + " = " + detail::describe(it->second) + "\n";
  }
  return out;
}

}  // namespace beds
