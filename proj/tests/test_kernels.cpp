#include <gtest/gtest.h>
#include <omp.h>

#include <memory>
#include <vector>

#include "ovfit/image_io.hpp"
#include "ovfit/kernels.hpp"
#include "ovfit/translational_aeg.hpp"

namespace ovfit::kernels {
namespace {

class KernelEquality : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

void expect_same(const std::vector<AdversarialOutcome>& a, const std::vector<AdversarialOutcome>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].original_loss, b[i].original_loss) << i;
    EXPECT_EQ(a[i].adv_loss, b[i].adv_loss) << i;
    EXPECT_EQ(a[i].weight, b[i].weight) << i;
  }
}

synthetic::LinearModel random_model(const synthetic::MixtureSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd w(spec.dim);
  for (int j = 0; j < spec.dim; ++j) w[j] = n(rng);
  return {w, 0.3};
}

TEST_P(KernelEquality, SyntheticAdversarialOutcomes) {
  synthetic::MixtureSpec spec;
  spec.dim = 40;
  spec.sigma = 3.0;
  const auto data = synthetic::sample_dataset(spec, 3000, 8);
  const auto model = random_model(spec, 9);
  for (double eps : {0.5, 5.0, 50.0}) {
    const synthetic::GradientAeg aeg(model, spec, eps);
    const std::span<const synthetic::Example> s(data);
    expect_same(adversarial_outcomes<synthetic::Point>(model, aeg, s, Exec::Serial),
                adversarial_outcomes<synthetic::Point>(model, aeg, s, Exec::Parallel));
  }
}

TEST_P(KernelEquality, TranslationalAdversarialOutcomes) {
  const auto fx = translational::load_universe_fixture(std::string(OVFIT_DATA_DIR) + "/gray5_pad4_eps1.txt");
  std::vector<translational::Example> s;
  for (const auto& b : fx.bases) s.push_back({b, b.label()});
  for (auto v : {translational::Variant::Strongest, translational::Variant::Random2}) {
    const translational::TranslationalAeg aeg(fx.classifier, {v, fx.epsilon, 5});
    const std::span<const translational::Example> span(s);
    expect_same(adversarial_outcomes<translational::SourceImage>(*fx.classifier, aeg, span, Exec::Serial),
                adversarial_outcomes<translational::SourceImage>(*fx.classifier, aeg, span, Exec::Parallel));
  }
}

TEST_P(KernelEquality, HoldoutErrors) {
  const synthetic::MixtureSpec spec;
  const auto model = random_model(spec, 10);
  for (std::size_t n : {std::size_t{1}, kHoldoutChunk - 1, kHoldoutChunk, 3 * kHoldoutChunk + 17}) {
    EXPECT_EQ(serial::holdout_errors(spec, model, n, 12), omp::holdout_errors(spec, model, n, 12)) << n;
    EXPECT_EQ(holdout_error_rate(spec, model, n, 12, Exec::Serial), holdout_error_rate(spec, model, n, 12, Exec::Parallel));
  }
}

TEST_P(KernelEquality, ParallelFailurePropagates) {
  synthetic::MixtureSpec spec;
  spec.dim = 5;
  const auto data = synthetic::sample_dataset(spec, 200, 3);
  const auto model = random_model(spec, 4);
  // An AEG whose weight is out of range on every successful example.
  class Broken final : public AdversarialGenerator<synthetic::Point> {
   public:
    synthetic::Point perturb(const synthetic::Point& x) const override { return -x; }
    double density_weight(const synthetic::Point&) const override { return 2.0; }
    AegDescriptor descriptor() const override { return {"broken", 0.0, 2.0}; }
  };
  const std::span<const synthetic::Example> s(data);
  EXPECT_THROW(adversarial_outcomes<synthetic::Point>(model, Broken(), s, Exec::Parallel), Error);
  EXPECT_THROW(adversarial_outcomes<synthetic::Point>(model, Broken(), s, Exec::Serial), Error);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelEquality, ::testing::Values(1, 2, 4, 7));

// The projection trick reproduces the error rate of full-dimensional draws.
TEST(HoldoutErrorRate, MatchesFullDimensionalSampling) {
  const synthetic::MixtureSpec spec;
  const auto model = random_model(spec, 21);
  const std::size_t n = 40000;
  const double fast = holdout_error_rate(spec, model, n, 5, Exec::Serial);
  const auto data = synthetic::sample_dataset(spec, n, 6);
  std::size_t errors = 0;
  for (const auto& ex : data) errors += model.predict(ex.input) != ex.label ? 1 : 0;
  const double slow = static_cast<double>(errors) / static_cast<double>(n);
  const double se = std::sqrt(2.0 * 0.25 / static_cast<double>(n));
  EXPECT_NEAR(fast, slow, 4.0 * se);
}

}  // namespace
}  // namespace ovfit::kernels
