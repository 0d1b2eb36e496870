#include "ovfit/synthetic_linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ovfit/error.hpp"
#include "ovfit/kernels.hpp"
#include "ovfit/seed.hpp"

namespace ovfit::synthetic {

namespace {

// Stable ln(1 + exp(-s)).
double softplus_neg(double s) {
  return s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

// d/ds ln(1 + exp(-s)) = -1 / (1 + exp(s)).
double softplus_neg_grad(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(s));
}

double mean_or_nan(double sum, std::size_t n) {
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

}  // namespace

void MixtureSpec::validate() const {
  if (dim < 1) throw Error(ErrorKind::InvalidParameter, "dim must be >= 1");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma must be > 0");
  if (!(margin >= 0.0 && margin < mean_offset)) {
    throw Error(ErrorKind::InvalidParameter, "margin must satisfy 0 <= margin < mean_offset");
  }
}

double MixtureSpec::log_truncated_mass() const {
  // P(N(mean_offset, sigma^2) > margin) = Phi((mean_offset - margin) / sigma).
  const double z = (mean_offset - margin) / sigma;
  return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

int ground_truth(const Point& x) { return x[0] >= 0.0 ? 1 : -1; }

Point sample_point(const MixtureSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const int cls = coin(rng) ? 1 : -1;
  Point x(spec.dim);
  for (;;) {
    const double v = cls * spec.mean_offset + spec.sigma * normal(rng);
    if (cls * v > spec.margin) {
      x[0] = v;
      break;
    }
  }
  for (int j = 1; j < spec.dim; ++j) x[j] = spec.sigma * normal(rng);
  return x;
}

std::vector<Example> sample_dataset(const MixtureSpec& spec, std::size_t m, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<Example> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Point x = sample_point(spec, rng);
    const int y = ground_truth(x);
    out.push_back({std::move(x), y});
  }
  return out;
}

double log_density(const MixtureSpec& spec, const Point& x) {
  if (std::abs(x[0]) <= spec.margin) return -std::numeric_limits<double>::infinity();
  const double mu = x[0] > 0.0 ? spec.mean_offset : -spec.mean_offset;
  const double d0 = x[0] - mu;
  const double sq = d0 * d0 + x.tail(x.size() - 1).squaredNorm();
  const double s2 = spec.sigma * spec.sigma;
  const double log_norm = -0.5 * static_cast<double>(spec.dim) * std::log(2.0 * std::numbers::pi * s2);
  // Each class has weight 1/2 and is renormalized by its truncated mass.
  return std::log(0.5) + log_norm - sq / (2.0 * s2) - spec.log_truncated_mass();
}

void TrainConfig::validate() const {
  if (steps < 1) throw Error(ErrorKind::InvalidParameter, "steps must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::InvalidParameter, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidParameter, "learning_rate must be > 0");
  if (!(penalty_coefficient >= 0.0)) throw Error(ErrorKind::InvalidParameter, "penalty must be >= 0");
  if (!(decay >= 0.0 && decay < 1.0)) throw Error(ErrorKind::InvalidParameter, "decay must lie in [0, 1)");
  if (!(stabilizer >= 0.0)) throw Error(ErrorKind::InvalidParameter, "stabilizer must be >= 0");
  if (!(initial_accumulator >= 0.0)) throw Error(ErrorKind::InvalidParameter, "initial_accumulator must be >= 0");
  if (!(init_std >= 0.0)) throw Error(ErrorKind::InvalidParameter, "init_std must be >= 0");
  if (stabilizer == 0.0 && initial_accumulator == 0.0) {
    throw Error(ErrorKind::InvalidParameter, "zero stabilizer with zero accumulator divides by zero");
  }
}

double penalized_loss(const LinearModel& model, std::span<const Example> data, double penalty) {
  if (data.empty()) throw Error(ErrorKind::EmptySample, "empty training set");
  double sum = 0.0;
  for (const auto& ex : data) sum += softplus_neg(ex.label * model.score(ex.input));
  const double w1 = model.w()[0];
  return sum / static_cast<double>(data.size()) + penalty * w1 * w1;
}

TrainResult train(std::span<const Example> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(ErrorKind::EmptySample, "empty training set");
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto dim = data.front().input.size();

  // Column-major: one example per column.
  Eigen::MatrixXd xs(dim, n);
  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xs.col(i) = data[static_cast<std::size_t>(i)].input;
    ys[i] = data[static_cast<std::size_t>(i)].label;
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, cfg.init_std);
  Eigen::VectorXd w(dim);
  for (Eigen::Index j = 0; j < dim; ++j) w[j] = init(rng);
  double b = 0.0;

  Eigen::VectorXd acc_w = Eigen::VectorXd::Constant(dim, cfg.initial_accumulator);
  double acc_b = cfg.initial_accumulator;
  Eigen::VectorXd grad_w(dim);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::size_t cursor = order.size();

  const double rho = cfg.decay;
  const double lr = cfg.learning_rate;
  for (int step = 0; step < cfg.steps; ++step) {
    grad_w.setZero();
    double grad_b = 0.0;
    double batch_loss = 0.0;
    for (int k = 0; k < cfg.batch_size; ++k) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const Eigen::Index i = order[cursor++];
      const double s = ys[i] * (w.dot(xs.col(i)) + b);
      batch_loss += softplus_neg(s);
      const double coef = softplus_neg_grad(s) * ys[i];
      grad_w.noalias() += coef * xs.col(i);
      grad_b += coef;
    }
    const double inv = 1.0 / cfg.batch_size;
    grad_w *= inv;
    grad_b *= inv;
    grad_w[0] += 2.0 * cfg.penalty_coefficient * w[0];
    batch_loss = batch_loss * inv + cfg.penalty_coefficient * w[0] * w[0];
    if (!std::isfinite(batch_loss)) {
      throw Error(ErrorKind::Divergence, "non-finite training loss at step " + std::to_string(step));
    }

    acc_w = rho * acc_w + (1.0 - rho) * grad_w.cwiseAbs2();
    acc_b = rho * acc_b + (1.0 - rho) * grad_b * grad_b;
    if (cfg.stabilizer_inside_sqrt) {
      w.array() -= lr * grad_w.array() / (acc_w.array() + cfg.stabilizer).sqrt();
      b -= lr * grad_b / std::sqrt(acc_b + cfg.stabilizer);
    } else {
      w.array() -= lr * grad_w.array() / (acc_w.array().sqrt() + cfg.stabilizer);
      b -= lr * grad_b / (std::sqrt(acc_b) + cfg.stabilizer);
    }
  }

  TrainResult result;
  result.model = LinearModel(std::move(w), b);
  result.penalized_loss = penalized_loss(result.model, data, cfg.penalty_coefficient);
  if (!std::isfinite(result.penalized_loss)) throw Error(ErrorKind::Divergence, "non-finite final loss");
  std::size_t correct = 0;
  for (const auto& ex : data) correct += result.model.predict(ex.input) == ex.label ? 1 : 0;
  result.train_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return result;
}

GradientAeg::GradientAeg(LinearModel model, MixtureSpec spec, double epsilon)
    : model_(std::move(model)), spec_(spec), epsilon_(epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be >= 0");
  const double norm = model_.w().norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::Precondition, "zero weight vector");
  direction_ = model_.w() / norm;
}

Point GradientAeg::perturb(const Point& x) const {
  const int y = ground_truth(x);
  if (model_.predict(x) != y) return x;
  Point candidate = x - (epsilon_ * y) * direction_;
  if (ground_truth(candidate) != y) return x;
  return candidate;
}

double GradientAeg::density_weight(const Point& x_prime) const {
  const int y = ground_truth(x_prime);
  if (model_.predict(x_prime) == y) {
    throw Error(ErrorKind::Precondition, "density weight queried at a correctly classified point");
  }
  // The only other point g can send to x' is its translation preimage z, and
  // only if z is correctly classified and keeps the label of x'.
  const Point z = x_prime + (epsilon_ * y) * direction_;
  const bool z_maps_here = model_.predict(z) == ground_truth(z) && ground_truth(z) == y;
  if (!z_maps_here) return 1.0;
  const double log_z = log_density(spec_, z);
  if (log_z == -std::numeric_limits<double>::infinity()) return 1.0;
  const double log_x = log_density(spec_, x_prime);
  if (log_x == -std::numeric_limits<double>::infinity()) return 0.0;
  // rho(x') / (rho(x') + rho(z)) = 1 / (1 + exp(log_z - log_x))
  const double d = log_z - log_x;
  return d > 0.0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
}

const char* to_string(Scenario s) { return s == Scenario::Independent ? "independent" : "dependent"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "independent") return Scenario::Independent;
  if (s == "dependent") return Scenario::Dependent;
  throw Error(ErrorKind::Config, "scenario must be 'independent' or 'dependent', got '" + s + "'");
}

PreparedScenario prepare_scenario(Scenario scenario, std::uint64_t seed, const ScenarioOptions& opts) {
  opts.spec.validate();
  PreparedScenario out;
  out.scenario = scenario;
  out.seed = seed;
  out.spec = opts.spec;

  TrainConfig tc = opts.train;
  tc.seed = derive_seed(seed, {3});
  std::vector<Example> train_set;
  if (scenario == Scenario::Independent) {
    tc.penalty_coefficient = 0.0;
    train_set = sample_dataset(opts.spec, opts.train_size, derive_seed(seed, {1}));
    out.test = sample_dataset(opts.spec, opts.independent_test_size, derive_seed(seed, {2}));
  } else {
    tc.penalty_coefficient = opts.dependent_penalty;
    out.test = sample_dataset(opts.spec, opts.dependent_test_size, derive_seed(seed, {2}));
    const std::size_t half = out.test.size() / 2;
    train_set.assign(out.test.begin(), out.test.begin() + static_cast<std::ptrdiff_t>(half));
  }

  TrainResult tr = train(train_set, tc);
  if (opts.enforce_train_gate && tr.train_accuracy < 1.0) {
    throw Error(ErrorKind::TrainGate, std::string(to_string(scenario)) + " model reached training accuracy " +
                                          std::to_string(tr.train_accuracy) + " (seed " + std::to_string(seed) +
                                          ", " + std::to_string(tc.steps) + " steps)");
  }
  out.model = std::move(tr.model);
  out.train_accuracy = tr.train_accuracy;
  out.train_loss = tr.penalized_loss;
  const auto exec = opts.parallel ? kernels::Exec::Parallel : kernels::Exec::Serial;
  out.true_risk = kernels::holdout_error_rate(opts.spec, out.model, opts.holdout_size, derive_seed(seed, {4}), exec);
  return out;
}

RunResult evaluate_epsilon(const PreparedScenario& prepared, double epsilon, const ScenarioOptions& opts) {
  const GradientAeg aeg(prepared.model, prepared.spec, epsilon);
  const auto exec = opts.parallel ? kernels::Exec::Parallel : kernels::Exec::Serial;
  const std::span<const Example> test(prepared.test);
  const auto outcomes = kernels::adversarial_outcomes<Point>(prepared.model, aeg, test, exec);

  const std::size_t m = outcomes.size();
  RunResult result;
  result.t_values.resize(m);
  std::vector<double> original(m), weighted(m);
  double sum_s = 0.0, sum_g = 0.0, sum_sp = 0.0;
  double w_mis = 0.0, w_succ = 0.0;
  std::size_t n_mis = 0, n_succ = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& o = outcomes[i];
    const PairedObservation p = o.paired();
    result.t_values[i] = p.t_value;
    original[i] = p.original_loss;
    weighted[i] = p.weighted_adv_loss;
    sum_s += o.original_loss;
    sum_g += p.weighted_adv_loss;
    sum_sp += o.adv_loss;
    if (o.original_loss == 1.0) {
      w_mis += o.weight;
      ++n_mis;
    } else if (o.adv_loss == 1.0) {
      w_succ += o.weight;
      ++n_succ;
    }
  }

  const TestVerdict pairwise = pairwise_test(std::span<const double>(result.t_values), opts.pairwise_range,
                                             opts.pairwise_delta);
  const TestVerdict basic = basic_interval_test(original, weighted, opts.basic_delta);

  RunRecord& r = result.record;
  r.scenario = to_string(prepared.scenario);
  r.epsilon = epsilon;
  r.seed = prepared.seed;
  r.p_value = pairwise.p_value;
  r.basic_test_reject = basic.reject;
  r.r_hat_s = sum_s / static_cast<double>(m);
  r.r_hat_g = sum_g / static_cast<double>(m);
  r.r_hat_s_prime = sum_sp / static_cast<double>(m);
  r.sigma_t2 = pairwise.sigma_t2;
  r.avg_weight_misclassified = mean_or_nan(w_mis, n_mis);
  r.avg_weight_successful_adv = mean_or_nan(w_succ, n_succ);
  r.true_risk_estimate = prepared.true_risk;

  const GroundTruth<Point> truth = [](const Point& x) { return ground_truth(x); };
  const InputEquals<Point> equal = [](const Point& a, const Point& b) { return a == b; };
  result.audit = verify_aeg_conditions<Point>(prepared.model, truth, aeg, test, equal);
  return result;
}

RunResult run_scenario(Scenario scenario, double epsilon, std::uint64_t seed, const ScenarioOptions& opts) {
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be >= 0");
  return evaluate_epsilon(prepare_scenario(scenario, seed, opts), epsilon, opts);
}

}  // namespace ovfit::synthetic
