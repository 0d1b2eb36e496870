#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ovfit/synthetic_linear.hpp"

namespace ovfit {

enum class Experiment { Synthetic, TranslationalOracle };

const char* to_string(Experiment e);

/// 21 log-spaced values from 1e-2 to 1e2, decades included exactly.
std::vector<double> default_epsilon_grid();

struct ExperimentConfig {
  Experiment experiment = Experiment::Synthetic;
  synthetic::Scenario scenario = synthetic::Scenario::Dependent;
  std::vector<double> epsilon_grid = default_epsilon_grid();
  int runs = 100;
  std::vector<int> n_model_bins = {1, 2, 10, 25, 100};
  std::uint64_t base_seed = 0;
  int steps = 50000;
  int batch_size = 100;
  double learning_rate = 0.01;
  int workers = 0;  // 0: OpenMP default
  std::filesystem::path output_dir = "out";
  std::vector<std::filesystem::path> universes;  // translational-oracle fixtures or directories

  /// Throws ErrorKind::Config naming the offending field.
  void validate() const;
  synthetic::ScenarioOptions scenario_options() const;
};

/// Unknown keys are rejected. Missing keys keep their defaults.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& cfg);

/// Fewer runs and training steps; every gate stays enforced.
void apply_quick(ExperimentConfig& cfg);

}  // namespace ovfit
