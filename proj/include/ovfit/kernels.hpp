#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; both produce bit-identical results for any thread count.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <vector>

#include "ovfit/aeg_framework.hpp"
#include "ovfit/synthetic_linear.hpp"

namespace ovfit::kernels {

enum class Exec { Serial, Parallel };

namespace serial {

template <class Input>
std::vector<AdversarialOutcome> adversarial_outcomes(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                                     std::span<const LabeledExample<Input>> s) {
  std::vector<AdversarialOutcome> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = evaluate_adversarial(f, g, s[i]);
  return out;
}

/// Error count of a linear model over n fresh draws, in chunks of chunk_size
/// with per-chunk seeds.
std::uint64_t holdout_errors(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model,
                             std::size_t n, std::uint64_t seed);

}  // namespace serial

namespace omp {

template <class Input>
std::vector<AdversarialOutcome> adversarial_outcomes(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                                     std::span<const LabeledExample<Input>> s) {
  std::vector<AdversarialOutcome> out(s.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = evaluate_adversarial(f, g, s[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(ovfit_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::uint64_t holdout_errors(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model,
                             std::size_t n, std::uint64_t seed);

}  // namespace omp

inline constexpr std::size_t kHoldoutChunk = 4096;

template <class Input>
std::vector<AdversarialOutcome> adversarial_outcomes(const Classifier<Input>& f, const AdversarialGenerator<Input>& g,
                                                     std::span<const LabeledExample<Input>> s, Exec exec) {
  if (s.empty()) throw Error(ErrorKind::EmptySample, "empty dataset");
  return exec == Exec::Parallel ? omp::adversarial_outcomes(f, g, s) : serial::adversarial_outcomes(f, g, s);
}

/// Fresh-sample error rate of a linear model. Only the score w.x + b and x_1
/// matter, so each draw samples x_1 from its truncated normal and the remaining
/// projection from its exact N(0, sigma^2 |w_{2:}|^2) law.
double holdout_error_rate(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model, std::size_t n,
                          std::uint64_t seed, Exec exec);

}  // namespace ovfit::kernels
