#pragma once

// Concentration bounds and the independence tests built on them.
//
// All functions are pure; the variance estimates use population (1/m)
// normalization throughout.

#include <cstddef>
#include <span>
#include <vector>

namespace ovfit {

struct BernsteinParams {
  std::size_t m = 1;
  double sigma2 = 0.0;  // empirical variance
  double delta = 0.05;  // confidence parameter in (0, 1]
  double range_u = 1.0; // range of the summed variables
};

/// Empirical Bernstein deviation radius
///   sqrt(2 sigma2 ln(3/delta) / m) + 3 U ln(3/delta) / m.
double bernstein_radius(const BernsteinParams& p);

/// One test point: its 0/1 loss, its importance-weighted adversarial loss, and
/// their difference.
struct PairedObservation {
  double original_loss = 0.0;
  double weighted_adv_loss = 0.0;
  double t_value = 0.0;

  static PairedObservation make(double original_loss, double weighted_adv_loss) {
    return {original_loss, weighted_adv_loss, weighted_adv_loss - original_loss};
  }
};

struct PairedStats {
  double t_mean = 0.0;
  double sigma_t2 = 0.0;
};

struct TestVerdict {
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::size_t m = 0;
  double sigma_t2 = 0.0;
};

PairedStats paired_statistics(std::span<const PairedObservation> obs);
PairedStats paired_statistics(std::span<const double> t_values);

/// Smallest delta at which the pairwise test rejects, capped at 1. This is the
/// closed-form inverse of bernstein_radius in delta at radius abs_t.
double pairwise_p_value(double abs_t, double sigma_t, std::size_t m, double range_u);

/// Exponent E with p = min(1, 3 exp(-E)); evaluated without cancellation.
double pairwise_exponent(double abs_t, double sigma_t, std::size_t m, double range_u);

/// Pairwise test on paired observations. t-values must lie in [-1, range_u - 1].
TestVerdict pairwise_test(std::span<const PairedObservation> obs, double range_u, double delta);
TestVerdict pairwise_test(std::span<const double> t_values, double range_u, double delta);

enum class BasicPValueMode {
  LevelLabel,  // p = 2 delta on rejection, 1 otherwise
  Continuous,  // p = 2 delta* where the two intervals touch, found by bisection
};

/// Interval test: rejects when the two Bernstein confidence intervals (range 1,
/// each at delta) around the original and adversarial risk estimates are
/// disjoint. Overall confidence is 1 - 2 delta.
TestVerdict basic_interval_test(std::span<const double> original_losses,
                                std::span<const double> weighted_adv_losses, double delta,
                                BasicPValueMode mode = BasicPValueMode::LevelLabel);

/// Column means of an N x m matrix; row j holds the t-values of model j.
std::vector<double> n_model_average(std::span<const std::vector<double>> t_matrix);

/// Pairwise test applied to the column-averaged t-values.
TestVerdict n_model_test(std::span<const std::vector<double>> t_matrix, double range_u, double delta);

}  // namespace ovfit
