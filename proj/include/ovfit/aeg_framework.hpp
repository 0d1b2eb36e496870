#pragma once

// Classifier / adversarial-example-generator capabilities and the
// importance-weighted risk estimators built on them.
//
// An AEG g must satisfy
//   G1  ground_truth(g(x)) == ground_truth(x),
//   G2  g(x) == x whenever the classifier errs on x,
// and supplies the importance weight h_g = dP/dP_g on the error set, which is
// bounded by 1 there.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovfit/error.hpp"
#include "ovfit/stats_core.hpp"

namespace ovfit {

template <class Input>
struct LabeledExample {
  Input input;
  int label = 0;
};

template <class Input>
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int predict(const Input& x) const = 0;
  /// Per-class scores; classifiers without scores return nullopt.
  virtual std::optional<std::vector<double>> logits(const Input&) const { return std::nullopt; }
};

/// Index of the maximal entry, lowest index on ties.
inline int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

struct AegDescriptor {
  std::string variant;
  double strength = 0.0;
  double range_bound = 2.0;  // U such that every t-value lies in [-1, U - 1]
};

template <class Input>
class AdversarialGenerator {
 public:
  virtual ~AdversarialGenerator() = default;
  virtual Input perturb(const Input& x) const = 0;
  /// h_g at a point the classifier errs on; behaviour elsewhere is unspecified.
  virtual double density_weight(const Input& x_adv) const = 0;
  virtual AegDescriptor descriptor() const = 0;
};

template <class Input>
using GroundTruth = std::function<int(const Input&)>;

template <class Input>
using InputEquals = std::function<bool(const Input&, const Input&)>;

template <class Input>
double empirical_error_rate(const Classifier<Input>& f, std::span<const LabeledExample<Input>> s) {
  if (s.empty()) throw Error(ErrorKind::EmptySample, "empty dataset");
  std::size_t errors = 0;
  for (const auto& ex : s) errors += f.predict(ex.input) != ex.label ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(s.size());
}

/// Losses of one example before and after the AEG, with the importance weight
/// (zero unless the adversarial loss is 1).
struct AdversarialOutcome {
  double original_loss = 0.0;
  double adv_loss = 0.0;
  double weight = 0.0;

  PairedObservation paired() const { return PairedObservation::make(original_loss, adv_loss * weight); }
};

/// The weight is queried only where the adversarial loss is 1.
template <class Input>
AdversarialOutcome evaluate_adversarial(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                        const LabeledExample<Input>& ex) {
  AdversarialOutcome out;
  out.original_loss = f.predict(ex.input) != ex.label ? 1.0 : 0.0;
  const Input adv = g.perturb(ex.input);
  if (f.predict(adv) != ex.label) {
    const double h = g.density_weight(adv);
    if (!(h >= 0.0 && h <= 1.0)) {
      throw Error(ErrorKind::WeightOutOfRange, "density weight " + std::to_string(h) + " outside [0, 1]");
    }
    out.adv_loss = 1.0;
    out.weight = h;
  }
  return out;
}

template <class Input>
PairedObservation paired_observation(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                     const LabeledExample<Input>& ex) {
  return evaluate_adversarial(f, g, ex).paired();
}

template <class Input>
std::vector<PairedObservation> build_paired_sample(const Classifier<Input>& f,
                                                   const AdversarialGenerator<Input>& g,
                                                   std::span<const LabeledExample<Input>> s) {
  if (s.empty()) throw Error(ErrorKind::EmptySample, "empty dataset");
  std::vector<PairedObservation> out;
  out.reserve(s.size());
  for (const auto& ex : s) out.push_back(paired_observation(f, g, ex));
  return out;
}

inline double adversarial_risk_estimate(std::span<const PairedObservation> obs) {
  if (obs.empty()) throw Error(ErrorKind::EmptySample, "no paired observations");
  double sum = 0.0;
  for (const auto& o : obs) sum += o.weighted_adv_loss;
  return sum / static_cast<double>(obs.size());
}

template <class Input>
double unweighted_adversarial_error_rate(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                         std::span<const LabeledExample<Input>> s) {
  if (s.empty()) throw Error(ErrorKind::EmptySample, "empty dataset");
  std::size_t errors = 0;
  for (const auto& ex : s) errors += f.predict(g.perturb(ex.input)) != ex.label ? 1 : 0;
  return static_cast<double>(errors) / static_cast<double>(s.size());
}

enum class Condition { G1, G2, G3 };

struct ConditionViolation {
  Condition condition;
  std::size_t index;
  std::string detail;
};

struct ViolationReport {
  std::vector<ConditionViolation> violations;
  std::size_t checked = 0;

  bool ok() const { return violations.empty(); }
  std::size_t count(Condition c) const {
    std::size_t n = 0;
    for (const auto& v : violations) n += v.condition == c ? 1 : 0;
    return n;
  }
  void merge(const ViolationReport& other, std::size_t index_offset = 0) {
    for (auto v : other.violations) {
      v.index += index_offset;
      violations.push_back(std::move(v));
    }
    checked += other.checked;
  }
};

/// Audits G1 and G2 on every example, and G3 when a density evaluator is
/// supplied (|rho(x) - rho(g(x))| <= g3_tolerance on perturbed points).
template <class Input>
ViolationReport verify_aeg_conditions(const Classifier<Input>& f, const GroundTruth<Input>& ground_truth,
                                      const AdversarialGenerator<Input>& g,
                                      std::span<const LabeledExample<Input>> s, const InputEquals<Input>& equals,
                                      const std::function<double(const Input&)>& density = {},
                                      double g3_tolerance = 0.0) {
  ViolationReport report;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Input& x = s[i].input;
    const Input gx = g.perturb(x);
    const int y = ground_truth(x);
    if (ground_truth(gx) != y) {
      report.violations.push_back({Condition::G1, i, "label changed by perturbation"});
    }
    const bool moved = !equals(gx, x);
    if (f.predict(x) != y && moved) {
      report.violations.push_back({Condition::G2, i, "misclassified point was perturbed"});
    }
    if (density && moved) {
      const double a = density(x);
      const double b = density(gx);
      if (!(std::abs(a - b) <= g3_tolerance)) {
        report.violations.push_back({Condition::G3, i, "density changed by perturbation"});
      }
    }
    ++report.checked;
  }
  return report;
}

}  // namespace ovfit
