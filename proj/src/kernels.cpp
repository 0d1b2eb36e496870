#include "ovfit/kernels.hpp"

#include <algorithm>
#include <random>

#include "ovfit/seed.hpp"

namespace ovfit::kernels {

namespace {

struct ProjectedModel {
  double w1;
  double b;
  double rest_scale;  // sigma * |w_{2:}|
};

ProjectedModel project(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model) {
  const auto& w = model.w();
  return {w[0], model.b(), spec.sigma * w.tail(w.size() - 1).norm()};
}

std::uint64_t chunk_errors(const synthetic::MixtureSpec& spec, const ProjectedModel& pm, std::size_t count,
                           std::uint64_t chunk_seed) {
  std::mt19937_64 rng(chunk_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const int cls = coin(rng) ? 1 : -1;
    double x1;
    do {
      x1 = cls * spec.mean_offset + spec.sigma * normal(rng);
    } while (!(cls * x1 > spec.margin));
    const double score = pm.w1 * x1 + pm.rest_scale * normal(rng) + pm.b;
    const int predicted = score >= 0.0 ? 1 : -1;
    errors += predicted != cls ? 1 : 0;
  }
  return errors;
}

std::size_t chunk_count(std::size_t n) { return (n + kHoldoutChunk - 1) / kHoldoutChunk; }

std::size_t chunk_size(std::size_t n, std::size_t c) { return std::min(kHoldoutChunk, n - c * kHoldoutChunk); }

}  // namespace

namespace serial {

std::uint64_t holdout_errors(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model,
                             std::size_t n, std::uint64_t seed) {
  const ProjectedModel pm = project(spec, model);
  std::uint64_t errors = 0;
  for (std::size_t c = 0; c < chunk_count(n); ++c) {
    errors += chunk_errors(spec, pm, chunk_size(n, c), derive_seed(seed, {c}));
  }
  return errors;
}

}  // namespace serial

namespace omp {

std::uint64_t holdout_errors(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model,
                             std::size_t n, std::uint64_t seed) {
  const ProjectedModel pm = project(spec, model);
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
  std::uint64_t errors = 0;
#pragma omp parallel for reduction(+ : errors) schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    errors += chunk_errors(spec, pm, chunk_size(n, cu), derive_seed(seed, {cu}));
  }
  return errors;
}

}  // namespace omp

double holdout_error_rate(const synthetic::MixtureSpec& spec, const synthetic::LinearModel& model, std::size_t n,
                          std::uint64_t seed, Exec exec) {
  if (n == 0) throw Error(ErrorKind::EmptySample, "holdout size must be positive");
  const std::uint64_t errors =
      exec == Exec::Parallel ? omp::holdout_errors(spec, model, n, seed) : serial::holdout_errors(spec, model, n, seed);
  return static_cast<double>(errors) / static_cast<double>(n);
}

}  // namespace ovfit::kernels
