#pragma once

// Seeded sweeps over (epsilon, run) cells, aggregation across runs and N-model
// bins, CSV / plot-data emission, and the translational oracle suite.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ovfit/config.hpp"
#include "ovfit/image_io.hpp"
#include "ovfit/run_record.hpp"
#include "ovfit/translational_aeg.hpp"

namespace ovfit {

struct CellResult {
  std::size_t epsilon_index = 0;
  std::size_t run_index = 0;
  RunRecord record;
  std::vector<double> t_values;
  std::size_t g1_violations = 0;
  std::size_t g2_violations = 0;
  std::size_t audited = 0;
};

/// Seed of one sweep cell.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t epsilon_index, std::size_t run_index);

/// Runs every (epsilon, run) cell of a synthetic config, ordered by epsilon
/// index then run index. Each finished cell is written under
/// output_dir/cells; existing cell files with matching parameters are reused.
std::vector<CellResult> run_sweep(const ExperimentConfig& cfg);

/// Loads the persisted cells of a finished sweep; throws Io if any is missing.
std::vector<CellResult> load_sweep(const ExperimentConfig& cfg);

inline constexpr std::size_t kHistogramBins = 20;
using Histogram = std::array<std::size_t, kHistogramBins>;

/// Counts over 20 equal-width bins on [0, 1]; 1 falls in the last bin.
Histogram p_value_histogram(std::span<const double> p_values);

/// Linear interpolation between order statistics of sorted data, q in [0, 1].
double percentile(std::span<const double> sorted, double q);

struct Band {
  double mean = 0.0;
  double lo = 0.0;  // 2.5th percentile over runs
  double hi = 0.0;  // 97.5th percentile over runs
};

struct NModelCell {
  int n = 1;
  std::vector<double> p_values;  // one per consecutive bin of n runs
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  Histogram histogram{};
};

struct SummaryRow {
  std::string scenario;
  double epsilon = 0.0;
  std::size_t runs = 0;
  double mean_p = 0.0;
  double p_lo = 0.0;
  double p_hi = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  double median_p = 0.0;
  double pairwise_reject_rate = 0.0;
  double basic_reject_rate = 0.0;
  Band r_hat_s;
  Band r_hat_g;
  Band r_hat_s_prime;
  Band true_risk;
  Band weight_misclassified;      // runs with an empty set are skipped
  Band weight_successful_adv;
  Histogram histogram{};
  std::vector<NModelCell> n_model;
};

struct Summary {
  std::vector<SummaryRow> rows;
};

/// Groups cells by (scenario, epsilon) in first-appearance order and runs the
/// N-model test on consecutive disjoint bins in run-index order.
Summary aggregate(std::span<const CellResult> cells, std::span<const int> n_model_bins, double range_u = 2.0,
                  double delta = 0.05);

extern const char* const kRecordCsvHeader;

void write_records_csv(std::ostream& out, std::span<const RunRecord> records);
void emit_csv(std::span<const RunRecord> records, const std::filesystem::path& path);
std::vector<RunRecord> read_records_csv(std::istream& in);
std::vector<RunRecord> load_records_csv(const std::filesystem::path& path);

/// summary.csv (one row per epsilon) and nmodel.csv (one row per bin).
void emit_csv(const Summary& summary, const std::filesystem::path& dir);

/// One whitespace-separated file per figure panel.
void emit_plot_data(const Summary& summary, const std::filesystem::path& dir);

struct VariantCheck {
  translational::Variant variant = translational::Variant::Strongest;
  std::size_t entries = 0;             // misclassified points compared against the oracle
  double max_abs_diff = 0.0;
  std::size_t examples = 0;
  std::size_t successful = 0;          // correctly classified, adversarial copy misclassified
  double max_weight_successful = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double unweighted_adv_error = 0.0;
  std::size_t g1_violations = 0;
  std::size_t g2_violations = 0;
  bool pass = false;
};

struct UniverseCheck {
  std::string name;
  std::size_t universe_size = 0;
  int epsilon = 0;
  std::vector<VariantCheck> variants;

  bool pass() const;
};

inline constexpr double kOracleTolerance = 1e-12;

/// Compares density_weight with brute_force_pushforward for all four variants
/// on the orbit universe of radius pad - epsilon, and checks t-value ranges and
/// G1/G2 on every view with |offset| + 3 epsilon <= pad.
UniverseCheck check_universe(const translational::UniverseFixture& fixture, std::uint64_t seed);

/// Files are taken as-is; directories contribute their *.txt files in name order.
std::vector<std::filesystem::path> expand_universe_paths(std::span<const std::filesystem::path> paths);

void emit_oracle_csv(std::span<const UniverseCheck> checks, const std::filesystem::path& path);

}  // namespace ovfit
