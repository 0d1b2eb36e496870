#include "ovfit/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ovfit/error.hpp"

namespace ovfit {

namespace {

const double kLn3 = std::log(3.0);

// ln(3 / delta) without forming the quotient.
double log_three_over(double delta) { return kLn3 - std::log(delta); }

constexpr double kRangeSlack = 1e-12;

void check_t_range(std::span<const double> t_values, double range_u) {
  const double lo = -1.0 - kRangeSlack;
  const double hi = range_u - 1.0 + kRangeSlack;
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    const double t = t_values[i];
    if (!(t >= lo && t <= hi)) {
      throw Error(ErrorKind::RangeViolation, "t-value " + std::to_string(t) + " at index " +
                                                 std::to_string(i) + " outside [-1, " +
                                                 std::to_string(range_u - 1.0) + "]");
    }
  }
}

void check_delta_open(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "delta must lie in (0, 1)");
  }
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};

MeanVar mean_var(std::span<const double> xs) {
  // Two-pass; population normalization.
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size())};
}

}  // namespace

double bernstein_radius(const BernsteinParams& p) {
  if (p.m < 1) throw Error(ErrorKind::InvalidParameter, "m must be >= 1");
  if (!(p.sigma2 >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma2 must be >= 0");
  if (!(p.delta > 0.0 && p.delta <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "delta must lie in (0, 1]");
  }
  if (!(p.range_u > 0.0)) throw Error(ErrorKind::InvalidParameter, "range_u must be > 0");
  const double m = static_cast<double>(p.m);
  const double l = log_three_over(p.delta);
  return std::sqrt(2.0 * p.sigma2 * l / m) + 3.0 * p.range_u * l / m;
}

PairedStats paired_statistics(std::span<const double> t_values) {
  if (t_values.empty()) throw Error(ErrorKind::EmptySample, "no paired observations");
  const MeanVar mv = mean_var(t_values);
  return {mv.mean, mv.var};
}

PairedStats paired_statistics(std::span<const PairedObservation> obs) {
  std::vector<double> t(obs.size());
  std::transform(obs.begin(), obs.end(), t.begin(), [](const auto& o) { return o.t_value; });
  return paired_statistics(std::span<const double>(t));
}

double pairwise_exponent(double abs_t, double sigma_t, std::size_t m, double range_u) {
  if (!(abs_t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "|T| must be >= 0");
  if (!(sigma_t >= 0.0)) throw Error(ErrorKind::InvalidParameter, "sigma_T must be >= 0");
  if (m < 1) throw Error(ErrorKind::InvalidParameter, "m must be >= 1");
  if (!(range_u > 0.0)) throw Error(ErrorKind::InvalidParameter, "range_u must be > 0");
  // (m / 9U^2)(s^2 + 3U|T| - s sqrt(s^2 + 6U|T|)) rewritten as
  // 2 m T^2 / (s + sqrt(s^2 + 6U|T|))^2, which has no subtraction.
  const double root = std::sqrt(sigma_t * sigma_t + 6.0 * range_u * abs_t);
  const double denom = sigma_t + root;
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(m) * (abs_t / denom) * (abs_t / denom);
}

double pairwise_p_value(double abs_t, double sigma_t, std::size_t m, double range_u) {
  const double e = pairwise_exponent(abs_t, sigma_t, m, range_u);
  if (e <= kLn3) return 1.0;
  return 3.0 * std::exp(-e);
}

TestVerdict pairwise_test(std::span<const double> t_values, double range_u, double delta) {
  check_delta_open(delta);
  if (!(range_u > 0.0)) throw Error(ErrorKind::InvalidParameter, "range_u must be > 0");
  const PairedStats st = paired_statistics(t_values);
  check_t_range(t_values, range_u);

  TestVerdict v;
  v.m = t_values.size();
  v.sigma_t2 = st.sigma_t2;
  v.statistic = std::abs(st.t_mean);
  v.threshold = bernstein_radius({v.m, st.sigma_t2, delta, range_u});
  v.p_value = pairwise_p_value(v.statistic, std::sqrt(st.sigma_t2), v.m, range_u);
  v.reject = v.statistic > v.threshold;
  return v;
}

TestVerdict pairwise_test(std::span<const PairedObservation> obs, double range_u, double delta) {
  std::vector<double> t(obs.size());
  std::transform(obs.begin(), obs.end(), t.begin(), [](const auto& o) { return o.t_value; });
  return pairwise_test(std::span<const double>(t), range_u, delta);
}

TestVerdict basic_interval_test(std::span<const double> original_losses,
                                std::span<const double> weighted_adv_losses, double delta,
                                BasicPValueMode mode) {
  if (original_losses.size() != weighted_adv_losses.size()) {
    throw Error(ErrorKind::LengthMismatch, "original and adversarial loss sequences differ in length");
  }
  if (original_losses.empty()) throw Error(ErrorKind::EmptySample, "no losses");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorKind::InvalidParameter, "delta must lie in (0, 1/2)");
  }
  const std::size_t m = original_losses.size();
  const MeanVar s = mean_var(original_losses);
  const MeanVar g = mean_var(weighted_adv_losses);

  auto total_radius = [&](double d) {
    return bernstein_radius({m, s.var, d, 1.0}) + bernstein_radius({m, g.var, d, 1.0});
  };

  TestVerdict v;
  v.m = m;
  v.statistic = std::abs(g.mean - s.mean);
  v.threshold = total_radius(delta);
  v.reject = v.statistic > v.threshold;

  std::vector<double> diff(m);
  for (std::size_t i = 0; i < m; ++i) diff[i] = weighted_adv_losses[i] - original_losses[i];
  v.sigma_t2 = mean_var(diff).var;

  if (mode == BasicPValueMode::LevelLabel) {
    v.p_value = v.reject ? 2.0 * delta : 1.0;
    return v;
  }
  // Radius is decreasing in delta; find where it meets the statistic.
  if (v.statistic <= total_radius(1.0)) {
    v.p_value = 1.0;
    return v;
  }
  double lo = std::log(1e-300);
  double hi = 0.0;
  if (v.statistic > total_radius(std::exp(lo))) {
    v.p_value = 2e-300;
    return v;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_radius(std::exp(mid)) > v.statistic) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  v.p_value = std::min(1.0, 2.0 * std::exp(0.5 * (lo + hi)));
  return v;
}

std::vector<double> n_model_average(std::span<const std::vector<double>> t_matrix) {
  if (t_matrix.empty()) throw Error(ErrorKind::EmptySample, "no models");
  const std::size_t m = t_matrix.front().size();
  if (m == 0) throw Error(ErrorKind::EmptySample, "empty t-value row");
  for (std::size_t j = 0; j < t_matrix.size(); ++j) {
    if (t_matrix[j].size() != m) {
      throw Error(ErrorKind::RaggedMatrix, "row " + std::to_string(j) + " has " +
                                               std::to_string(t_matrix[j].size()) +
                                               " entries, expected " + std::to_string(m));
    }
  }
  std::vector<double> avg(m, 0.0);
  for (const auto& row : t_matrix) {
    for (std::size_t i = 0; i < m; ++i) avg[i] += row[i];
  }
  const double n = static_cast<double>(t_matrix.size());
  for (double& a : avg) a /= n;
  return avg;
}

TestVerdict n_model_test(std::span<const std::vector<double>> t_matrix, double range_u, double delta) {
  const std::vector<double> avg = n_model_average(t_matrix);
  return pairwise_test(std::span<const double>(avg), range_u, delta);
}

}  // namespace ovfit
