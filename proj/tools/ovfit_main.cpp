#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ovfit/config.hpp"
#include "ovfit/error.hpp"
#include "ovfit/harness.hpp"
#include "ovfit/image_io.hpp"

#ifndef OVFIT_DATA_DIR
#define OVFIT_DATA_DIR "data/universes"
#endif

namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  bool quick = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "base seed (overrides base_seed)");
  cmd->add_option("--runs", f.runs, "number of runs (overrides runs)")->check(CLI::PositiveNumber);
  cmd->add_flag("--quick", f.quick, "fewer runs and training steps; gates stay enforced");
}

ovfit::ExperimentConfig resolve(const Flags& f, ovfit::Experiment experiment) {
  ovfit::ExperimentConfig cfg = f.config.empty() ? ovfit::ExperimentConfig{} : ovfit::load_config(f.config);
  cfg.experiment = experiment;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.base_seed = *f.seed;
  if (f.runs) {
    cfg.runs = *f.runs;
    std::erase_if(cfg.n_model_bins, [&](int n) { return n > cfg.runs; });
    if (cfg.n_model_bins.empty()) cfg.n_model_bins = {1};
  }
  if (f.quick) ovfit::apply_quick(cfg);
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
  if (!out) throw ovfit::Error(ovfit::ErrorKind::Io, "cannot write " + path.string());
}

void print_summary(const ovfit::Summary& summary) {
  std::printf("%-12s %10s %6s %10s %10s %10s %9s %9s\n", "scenario", "epsilon", "runs", "mean_p", "median_p",
              "R_S", "pw_rej", "basic_rej");
  for (const auto& r : summary.rows) {
    std::printf("%-12s %10.4g %6zu %10.4g %10.4g %10.4g %9.3f %9.3f\n", r.scenario.c_str(), r.epsilon, r.runs,
                r.mean_p, r.median_p, r.r_hat_s.mean, r.pairwise_reject_rate, r.basic_reject_rate);
  }
}

void emit_all(const ovfit::ExperimentConfig& cfg, const std::vector<ovfit::CellResult>& cells) {
  std::vector<ovfit::RunRecord> records;
  for (const auto& c : cells) records.push_back(c.record);
  ovfit::emit_csv(records, cfg.output_dir / "records.csv");
  const ovfit::Summary summary = ovfit::aggregate(cells, cfg.n_model_bins);
  ovfit::emit_csv(summary, cfg.output_dir);
  ovfit::emit_plot_data(summary, cfg.output_dir / "plot");
  print_summary(summary);
}

int run_synthetic(const Flags& f) {
  const ovfit::ExperimentConfig cfg = resolve(f, ovfit::Experiment::Synthetic);
  write_text(cfg.output_dir / "config.json", ovfit::dump_config(cfg));
  const auto cells = ovfit::run_sweep(cfg);
  std::size_t g1 = 0, g2 = 0;
  for (const auto& c : cells) {
    g1 += c.g1_violations;
    g2 += c.g2_violations;
  }
  emit_all(cfg, cells);
  if (g1 + g2 > 0) {
    std::fprintf(stderr, "error: AEG audit found %zu G1 and %zu G2 violations\n", g1, g2);
    return 2;
  }
  return 0;
}

int run_report(const Flags& f) {
  const ovfit::ExperimentConfig cfg = resolve(f, ovfit::Experiment::Synthetic);
  emit_all(cfg, ovfit::load_sweep(cfg));
  return 0;
}

int run_oracle(const Flags& f) {
  ovfit::ExperimentConfig cfg = resolve(f, ovfit::Experiment::TranslationalOracle);
  if (cfg.universes.empty()) cfg.universes.push_back(OVFIT_DATA_DIR);
  const auto paths = ovfit::expand_universe_paths(cfg.universes);
  if (paths.empty()) throw ovfit::Error(ovfit::ErrorKind::Config, "universes: no fixture files found");
  std::vector<ovfit::UniverseCheck> checks;
  for (const auto& p : paths) {
    const auto fixture = ovfit::translational::load_universe_fixture(p);
    checks.push_back(ovfit::check_universe(fixture, cfg.base_seed));
    const auto& c = checks.back();
    std::printf("%s %s (%zu images, epsilon %d)\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.universe_size,
                c.epsilon);
    for (const auto& v : c.variants) {
      std::printf("  %-9s entries %5zu  max|h - oracle| %.3g  t in [%.3g, %.3g]  successful %zu  G1/G2 %zu/%zu\n",
                  ovfit::translational::to_string(v.variant), v.entries, v.max_abs_diff, v.t_min, v.t_max,
                  v.successful, v.g1_violations, v.g2_violations);
    }
  }
  ovfit::emit_oracle_csv(checks, cfg.output_dir / "translational_oracle.csv");
  for (const auto& c : checks) {
    if (!c.pass()) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overfitting detection with importance-weighted adversarial examples"};
  app.require_subcommand(1);
  Flags synth_flags, oracle_flags, report_flags;
  auto* synth = app.add_subcommand("synthetic", "run the synthetic linear sweep");
  auto* oracle = app.add_subcommand("translational-oracle", "check translational density weights against brute force");
  auto* report = app.add_subcommand("report", "re-aggregate a finished synthetic sweep");
  add_flags(synth, synth_flags);
  add_flags(oracle, oracle_flags);
  add_flags(report, report_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*synth) return run_synthetic(synth_flags);
    if (*oracle) return run_oracle(oracle_flags);
    if (*report) return run_report(report_flags);
  } catch (const ovfit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ovfit::ErrorKind::Config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
