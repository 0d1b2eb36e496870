#pragma once

// Separable linear toy problem: two truncated isotropic Gaussians split by a
// margin on the first coordinate, a linear classifier trained with RMSProp on
// cross-entropy, and the one-step L2 gradient AEG with exact density weights.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ovfit/aeg_framework.hpp"
#include "ovfit/run_record.hpp"

namespace ovfit::synthetic {

using Point = Eigen::VectorXd;
using Example = LabeledExample<Point>;

struct MixtureSpec {
  int dim = 500;
  double sigma = 22.360679774997898;  // sqrt(500)
  double mean_offset = 1.0;
  double margin = 0.025;

  void validate() const;
  /// log P(component sample lands outside the margin band), identical for both classes.
  double log_truncated_mass() const;
};

/// sgn(x_1) with sgn(0) = +1.
int ground_truth(const Point& x);

/// Draws one point; the first coordinate is rejection-sampled from the
/// one-sided truncated normal of a class chosen with probability 1/2.
Point sample_point(const MixtureSpec& spec, std::mt19937_64& rng);

/// Deterministic in (spec, m, seed).
std::vector<Example> sample_dataset(const MixtureSpec& spec, std::size_t m, std::uint64_t seed);

/// Log of the mixture density; -inf inside |x_1| <= margin.
double log_density(const MixtureSpec& spec, const Point& x);

class LinearModel final : public Classifier<Point> {
 public:
  LinearModel() = default;
  LinearModel(Eigen::VectorXd w, double b) : w_(std::move(w)), b_(b) {}

  double score(const Point& x) const { return w_.dot(x) + b_; }
  /// sgn(w.x + b) with sgn(0) = +1.
  int predict(const Point& x) const override { return score(x) >= 0.0 ? 1 : -1; }

  const Eigen::VectorXd& w() const { return w_; }
  double b() const { return b_; }

 private:
  Eigen::VectorXd w_;
  double b_ = 0.0;
};

struct TrainConfig {
  int steps = 50000;
  int batch_size = 100;
  double learning_rate = 0.01;
  double penalty_coefficient = 0.0;  // multiplies w_1^2
  std::uint64_t seed = 0;
  double decay = 0.9;
  double stabilizer = 1e-10;
  bool stabilizer_inside_sqrt = true;  // sqrt(acc + eps) rather than sqrt(acc) + eps
  double initial_accumulator = 1.0;
  double init_std = 0.01;

  void validate() const;
};

struct TrainResult {
  LinearModel model;
  double penalized_loss = 0.0;  // mean cross-entropy + penalty over the full training set
  double train_accuracy = 0.0;
};

/// Mean ln(1 + exp(-y (w.x + b))) plus penalty * w_1^2.
double penalized_loss(const LinearModel& model, std::span<const Example> data, double penalty);

/// Minibatch RMSProp; deterministic given cfg.seed.
TrainResult train(std::span<const Example> data, const TrainConfig& cfg);

/// x' = x - eps * y * w / |w|, applied only to correctly classified points whose
/// true label survives the move.
class GradientAeg final : public AdversarialGenerator<Point> {
 public:
  GradientAeg(LinearModel model, MixtureSpec spec, double epsilon);

  Point perturb(const Point& x) const override;
  /// rho(x') / (rho(x') + rho(z) [z maps to x']) with z = x' + eps * y * w / |w|.
  double density_weight(const Point& x_prime) const override;
  AegDescriptor descriptor() const override { return {"gradient-l2", epsilon_, 2.0}; }

  const LinearModel& model() const { return model_; }

 private:
  LinearModel model_;
  MixtureSpec spec_;
  double epsilon_;
  Eigen::VectorXd direction_;  // w / |w|
};

enum class Scenario { Independent, Dependent };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct ScenarioOptions {
  MixtureSpec spec;
  TrainConfig train;             // penalty_coefficient is set per scenario
  double dependent_penalty = 1e4;
  std::size_t train_size = 500;  // independent scenario
  std::size_t independent_test_size = 10000;
  std::size_t dependent_test_size = 1000;
  std::size_t holdout_size = 100000;
  double pairwise_range = 2.0;
  double pairwise_delta = 0.05;
  double basic_delta = 0.025;    // per interval; overall confidence 1 - 2 delta
  bool enforce_train_gate = true;
  bool parallel = true;
};

/// Data and trained model shared by every attack strength of one run.
struct PreparedScenario {
  Scenario scenario = Scenario::Independent;
  std::uint64_t seed = 0;
  MixtureSpec spec;
  LinearModel model;
  std::vector<Example> test;
  double train_accuracy = 0.0;
  double train_loss = 0.0;
  double true_risk = 0.0;
};

struct RunResult {
  RunRecord record;
  std::vector<double> t_values;
  ViolationReport audit;
};

/// Samples data and trains. Throws ErrorKind::TrainGate when the gate is
/// enforced and training accuracy is below 100%.
PreparedScenario prepare_scenario(Scenario scenario, std::uint64_t seed, const ScenarioOptions& opts);

RunResult evaluate_epsilon(const PreparedScenario& prepared, double epsilon, const ScenarioOptions& opts);

RunResult run_scenario(Scenario scenario, double epsilon, std::uint64_t seed, const ScenarioOptions& opts);

}  // namespace ovfit::synthetic
