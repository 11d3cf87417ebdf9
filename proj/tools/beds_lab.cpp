// beds-lab: run one scenario described by a config file.
//
//   beds_lab --config scenarios/dissipate.cfg [--out-dir DIR] [--seed N] [--quiet]
//
// Exit status: 0 success, 2 config error, 3 numeric failure, 4 I/O error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "beds/config.hpp"
#include "beds/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"beds-lab: information-geometric belief dynamics scenarios"};
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "Scenario config file")->required();
  app.add_option("--out-dir", out_dir, "Output directory (overrides out_dir in the config)");
  app.add_option("--seed", seed, "Random seed (overrides seed in the config)")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "Only print errors");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "beds_lab: cannot read config " << config_path << "\n";
    return beds::exit_code(beds::ErrorKind::io);
  }
  std::ostringstream text;
  text << in.rdbuf();

  auto parsed = beds::parse_config_checked(text.str());
  if (!parsed.config) {
    std::cerr << config_path << ": invalid config\n" << beds::format_issues(parsed.issues) << "\n";
    return beds::exit_code(beds::ErrorKind::config);
  }
  beds::ScenarioConfig cfg = std::move(*parsed.config);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.seed = seed;

  const auto report = beds::run_scenario(cfg);
  if (!report.ok()) {
    std::cerr << "beds_lab: " << beds::to_string(report.error->kind) << ": " << report.error->message << "\n";
    return beds::exit_code(report.error->kind);
  }
  if (!quiet) {
    std::cout << beds::to_string(cfg.kind) << " scenario finished in " << report.wall_time_s << " s\n";
    for (const auto& [k, v] : report.metrics.items()) std::cout << "  " << k << " = " << v.dump() << "\n";
    for (const auto& n : report.notes) std::cout << "  note: " << n << "\n";
    std::cout << "artifacts in " << cfg.out_dir << ":";
    for (const auto& a : report.artifacts) std::cout << " " << a;
    std::cout << " report.json\n";
  }
  return 0;
}
