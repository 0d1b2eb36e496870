#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ovfit {

/// One experiment run at one attack strength. Averages over empty sets are NaN.
struct RunRecord {
  std::string scenario;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double p_value = 1.0;
  bool basic_test_reject = false;
  double r_hat_s = 0.0;
  double r_hat_g = 0.0;
  double r_hat_s_prime = 0.0;
  double sigma_t2 = 0.0;
  double avg_weight_misclassified = 0.0;
  double avg_weight_successful_adv = 0.0;
  double true_risk_estimate = 0.0;
};

}  // namespace ovfit
