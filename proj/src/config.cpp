#include "ovfit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ovfit/error.hpp"

namespace ovfit {

namespace {

using json = nlohmann::json;

Experiment experiment_from_string(const std::string& s) {
  if (s == "synthetic") return Experiment::Synthetic;
  if (s == "translational-oracle") return Experiment::TranslationalOracle;
  throw Error(ErrorKind::Config, "experiment: expected 'synthetic' or 'translational-oracle', got '" + s + "'");
}

template <class T>
T field(const json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string(name) + ": " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(ErrorKind::Config, where + key + ": unknown key");
  }
}

}  // namespace

const char* to_string(Experiment e) { return e == Experiment::Synthetic ? "synthetic" : "translational-oracle"; }

std::vector<double> default_epsilon_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) {
    // Round to 12 significant digits so decades come out exact.
    std::ostringstream os;
    os.precision(12);
    os << std::pow(10.0, -2.0 + 0.2 * k);
    grid.push_back(std::stod(os.str()));
  }
  return grid;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw Error(ErrorKind::Config, "runs: must be >= 1");
  if (n_model_bins.empty()) throw Error(ErrorKind::Config, "n_model_bins: must not be empty");
  for (int n : n_model_bins) {
    if (n < 1) throw Error(ErrorKind::Config, "n_model_bins: entries must be >= 1");
  }
  const int largest = *std::max_element(n_model_bins.begin(), n_model_bins.end());
  if (runs < largest) {
    throw Error(ErrorKind::Config, "runs: " + std::to_string(runs) + " is smaller than the largest N-model bin " +
                                       std::to_string(largest));
  }
  if (experiment == Experiment::Synthetic) {
    if (epsilon_grid.empty()) throw Error(ErrorKind::Config, "epsilon_grid: must not be empty");
    for (double e : epsilon_grid) {
      if (!(e > 0.0 && std::isfinite(e))) throw Error(ErrorKind::Config, "epsilon_grid: values must be positive");
    }
  }
  if (steps < 1) throw Error(ErrorKind::Config, "train.steps: must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::Config, "train.batch_size: must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::Config, "train.learning_rate: must be > 0");
  if (workers < 0) throw Error(ErrorKind::Config, "workers: must be >= 0");
  if (output_dir.empty()) throw Error(ErrorKind::Config, "output_dir: must not be empty");
}

synthetic::ScenarioOptions ExperimentConfig::scenario_options() const {
  synthetic::ScenarioOptions opts;
  opts.train.steps = steps;
  opts.train.batch_size = batch_size;
  opts.train.learning_rate = learning_rate;
  return opts;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Config, "top level must be a JSON object");
  reject_unknown(j,
                 {"experiment", "scenario", "epsilon_grid", "runs", "n_model_bins", "base_seed", "train", "workers",
                  "output_dir", "universes"},
                 "");

  ExperimentConfig cfg;
  if (j.contains("experiment")) cfg.experiment = experiment_from_string(field<std::string>(j, "experiment"));
  if (j.contains("scenario")) {
    try {
      cfg.scenario = synthetic::scenario_from_string(field<std::string>(j, "scenario"));
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string("scenario: ") + e.what());
    }
  }
  if (j.contains("epsilon_grid")) cfg.epsilon_grid = field<std::vector<double>>(j, "epsilon_grid");
  if (j.contains("runs")) cfg.runs = field<int>(j, "runs");
  if (j.contains("n_model_bins")) cfg.n_model_bins = field<std::vector<int>>(j, "n_model_bins");
  if (j.contains("base_seed")) cfg.base_seed = field<std::uint64_t>(j, "base_seed");
  if (j.contains("workers")) cfg.workers = field<int>(j, "workers");
  if (j.contains("output_dir")) cfg.output_dir = field<std::string>(j, "output_dir");
  if (j.contains("universes")) {
    cfg.universes.clear();
    for (const auto& p : field<std::vector<std::string>>(j, "universes")) cfg.universes.emplace_back(p);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    if (!t.is_object()) throw Error(ErrorKind::Config, "train: must be an object");
    reject_unknown(t, {"steps", "batch_size", "learning_rate"}, "train.");
    if (t.contains("steps")) cfg.steps = field<int>(t, "steps");
    if (t.contains("batch_size")) cfg.batch_size = field<int>(t, "batch_size");
    if (t.contains("learning_rate")) cfg.learning_rate = field<double>(t, "learning_rate");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = to_string(cfg.experiment);
  j["scenario"] = synthetic::to_string(cfg.scenario);
  j["epsilon_grid"] = cfg.epsilon_grid;
  j["runs"] = cfg.runs;
  j["n_model_bins"] = cfg.n_model_bins;
  j["base_seed"] = cfg.base_seed;
  j["train"] = {{"steps", cfg.steps}, {"batch_size", cfg.batch_size}, {"learning_rate", cfg.learning_rate}};
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir.string();
  std::vector<std::string> universes;
  for (const auto& p : cfg.universes) universes.push_back(p.string());
  j["universes"] = universes;
  return j.dump(2) + "\n";
}

void apply_quick(ExperimentConfig& cfg) {
  cfg.runs = std::min(cfg.runs, 10);
  cfg.steps = std::min(cfg.steps, 10000);
  if (cfg.epsilon_grid == default_epsilon_grid()) cfg.epsilon_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::erase_if(cfg.n_model_bins, [&](int n) { return n > cfg.runs; });
  if (cfg.n_model_bins.empty()) cfg.n_model_bins = {1};
}

}  // namespace ovfit
