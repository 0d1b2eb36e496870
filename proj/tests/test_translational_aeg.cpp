#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "ovfit/error.hpp"
#include "ovfit/image_io.hpp"
#include "ovfit/translational_aeg.hpp"
#include "property.hpp"

namespace ovfit::translational {
namespace {

using ovfit::testing::for_all;
using ovfit::testing::Gen;

SourceImage random_image(Gen& g, int w, int h, int c, int pad, int label) {
  std::vector<float> px(static_cast<std::size_t>((w + 2 * pad) * (h + 2 * pad) * c));
  for (float& p : px) p = static_cast<float>(g.integer(0, 255)) / 255.0f;
  return SourceImage(w, h, c, pad, std::move(px), label);
}

// Logits chosen by crop offset; used where the test pins the whole neighborhood.
class OffsetClassifier final : public Classifier<SourceImage> {
 public:
  OffsetClassifier(std::vector<double> fallback, std::map<std::pair<int, int>, std::vector<double>> table)
      : fallback_(std::move(fallback)), table_(std::move(table)) {}

  std::optional<std::vector<double>> logits(const SourceImage& x) const override {
    const auto it = table_.find({x.offset().dx, x.offset().dy});
    return it == table_.end() ? fallback_ : it->second;
  }
  int predict(const SourceImage& x) const override { return argmax_lowest(*logits(x)); }

 private:
  std::vector<double> fallback_;
  std::map<std::pair<int, int>, std::vector<double>> table_;
};

class NoLogits final : public Classifier<SourceImage> {
 public:
  int predict(const SourceImage&) const override { return 0; }
};

TranslationalConfig config(Variant v, int eps, std::uint64_t seed = 0) { return {v, eps, seed}; }

const std::vector<Variant> kAllVariants{Variant::Strongest, Variant::Nearest, Variant::Random, Variant::Random2};

TEST(SourceImage, TranslateRoundTripIsBitExact) {
  for_all(200, 31, [](Gen& g) {
    const int pad = static_cast<int>(g.integer(2, 6));
    const SourceImage x = random_image(g, 4, 3, 2, pad, 1);
    const Shift v{static_cast<int>(g.integer(-pad, pad)), static_cast<int>(g.integer(-pad, pad))};
    const SourceImage back = x.translated(v).translated(-v);
    EXPECT_TRUE(back.same_view(x));
    EXPECT_EQ(back.view(), x.view());
    EXPECT_EQ(back.view_hash(), x.view_hash());
    EXPECT_TRUE(x.translated({0, 0}).same_view(x));
  });
}

TEST(SourceImage, TranslationsComposeAndMoveContent) {
  for_all(200, 32, [](Gen& g) {
    const SourceImage x = random_image(g, 5, 4, 1, 4, 0);
    const Shift a{static_cast<int>(g.integer(-2, 2)), static_cast<int>(g.integer(-2, 2))};
    const Shift b{static_cast<int>(g.integer(-2, 2)), static_cast<int>(g.integer(-2, 2))};
    EXPECT_TRUE(x.translated(a).translated(b).same_view(x.translated(a + b)));
    EXPECT_EQ(x.translated(a).label(), x.label());
  });
  Gen g(1);
  const SourceImage x = random_image(g, 5, 4, 1, 4, 0);
  // Content moves by v: the new pixel at (i + 1, j + 2) is the old pixel at (i, j).
  const SourceImage y = x.translated({1, 2});
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 4; ++i) EXPECT_EQ(y.at(i + 1, j + 2, 0), x.at(i, j, 0));
  }
}

TEST(SourceImage, OutOfPadAndValidation) {
  Gen g(2);
  const SourceImage x = random_image(g, 3, 3, 1, 2, 0);
  try {
    x.translated({3, 0});
    ADD_FAILURE() << "window left the pad";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfPad);
  }
  EXPECT_THROW(SourceImage(3, 3, 1, 1, std::vector<float>(24, 0.5f), 0), Error);
  EXPECT_THROW(SourceImage(3, 3, 1, 1, std::vector<float>(25, 1.5f), 0), Error);
  EXPECT_THROW(SourceImage(3, 3, 1, 1, std::vector<float>(25, -0.0f), 0), Error);
  EXPECT_THROW(x.at(3, 0, 0), Error);
}

TEST(SourceImage, EqualContentFromDistinctBuffersCompareEqual) {
  Gen g(3);
  const SourceImage x = random_image(g, 3, 3, 1, 1, 0);
  const auto px = x.padded_pixels();
  const SourceImage copy(3, 3, 1, 1, std::vector<float>(px.begin(), px.end()), 0);
  EXPECT_NE(copy.source_id(), x.source_id());
  EXPECT_TRUE(copy.same_view(x));
  EXPECT_EQ(copy.view_hash(), x.view_hash());
}

TEST(TranslationSet, SizeAndScanOrder) {
  const TranslationSet s1(1);
  ASSERT_EQ(s1.size(), 8u);
  EXPECT_EQ(s1.vectors().front(), (Shift{-1, -1}));
  EXPECT_EQ(s1.vectors()[1], (Shift{0, -1}));
  EXPECT_EQ(s1.vectors()[3], (Shift{-1, 0}));
  EXPECT_EQ(s1.vectors().back(), (Shift{1, 1}));
  EXPECT_EQ(TranslationSet(5).size(), 120u);
  EXPECT_THROW(TranslationSet(0), Error);
}

TEST(MaxValidEpsilon, Examples) {
  EXPECT_EQ(max_valid_epsilon(16), 5);
  EXPECT_EQ(max_valid_epsilon(2), 0);
  EXPECT_EQ(max_valid_epsilon(9), 3);
  EXPECT_THROW(max_valid_epsilon(-1), Error);
}

TEST(ExcessLogit, Examples) {
  Gen g(4);
  const SourceImage x = random_image(g, 3, 3, 1, 1, 0);
  LookupClassifier f(3, 9);
  f.set(x, {2.0, 1.0, 0.0});
  EXPECT_EQ(excess_logit(f, x, 0), 0.0);
  f.set(x, {0.0, 3.0, 1.0});
  EXPECT_EQ(excess_logit(f, x, 0), 3.0);
  f.set(x, {1.0, 1.0, 1.0});
  for (int y = 0; y < 3; ++y) EXPECT_EQ(excess_logit(f, x, y), 0.0);
  try {
    excess_logit(NoLogits(), x, 0);
    ADD_FAILURE() << "missing logits accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingLogits);
  }
}

TEST(RangeBound, PerVariant) {
  EXPECT_EQ(range_bound(config(Variant::Strongest, 1)), 1.5);
  EXPECT_EQ(range_bound(config(Variant::Nearest, 1)), 1.5);
  EXPECT_EQ(range_bound(config(Variant::Random, 1)), 2.0);
  EXPECT_EQ(range_bound(config(Variant::Random2, 1)), 2.0);
  for (Variant v : kAllVariants) EXPECT_EQ(variant_from_string(to_string(v)), v);
  EXPECT_THROW(variant_from_string("fastest"), Error);
}

TEST(Perturb, MisclassifiedInputIsFixedByEveryVariant) {
  for_all(100, 33, [](Gen& g) {
    const SourceImage x = random_image(g, 4, 4, 1, 3, static_cast<int>(g.integer(0, 2)));
    const LookupClassifier f(3, static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
    if (f.predict(x) == x.label()) return;
    for (Variant v : kAllVariants) EXPECT_TRUE(perturb(config(v, 1, 5), f, x).same_view(x));
  });
}

TEST(Perturb, AllNeighborsCorrectLeavesDeterministicVariantsFixed) {
  Gen g(5);
  const SourceImage x = random_image(g, 5, 5, 1, 3, 0);
  const OffsetClassifier f({5.0, 0.0, 0.0}, {});
  EXPECT_TRUE(perturb(config(Variant::Strongest, 1), f, x).same_view(x));
  EXPECT_TRUE(perturb(config(Variant::Nearest, 1), f, x).same_view(x));
}

TEST(Perturb, StrongestAndNearestDifferOnToyClassifier) {
  Gen g(6);
  const SourceImage x = random_image(g, 5, 5, 1, 3, 0);
  // Content shift v moves the crop to offset -v.
  const OffsetClassifier f({5.0, 0.0, 0.0}, {{{-1, 0}, {0.0, 1.0, 0.0}}, {{-1, -1}, {0.0, 0.0, 4.0}}});

  const TranslationSet set(1);
  std::optional<Shift> strongest, nearest;
  double best_excess = -1.0;
  int best_norm = 100;
  for (const Shift& v : set.vectors()) {
    const SourceImage c = x.translated(v);
    if (f.predict(c) == 0) continue;
    const double e = excess_logit(f, c, 0);
    if (e > best_excess) {
      best_excess = e;
      strongest = v;
    }
    if (v.squared_norm() < best_norm) {
      best_norm = v.squared_norm();
      nearest = v;
    }
  }
  ASSERT_TRUE(strongest && nearest);
  EXPECT_EQ(*strongest, (Shift{1, 1}));
  EXPECT_EQ(*nearest, (Shift{1, 0}));
  EXPECT_TRUE(perturb(config(Variant::Strongest, 1), f, x).same_view(x.translated(*strongest)));
  EXPECT_TRUE(perturb(config(Variant::Nearest, 1), f, x).same_view(x.translated(*nearest)));
}

TEST(Perturb, EpsilonAboveMaxValidIsRejected) {
  Gen g(7);
  const SourceImage x = random_image(g, 4, 4, 1, 16, 0);
  const LookupClassifier f(2, 1);
  EXPECT_NO_THROW(perturb(config(Variant::Strongest, 5), f, x));
  for (Variant v : kAllVariants) {
    try {
      perturb(config(v, 6), f, x);
      ADD_FAILURE() << "epsilon 6 accepted at pad 16";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EpsilonTooLarge);
    }
  }
}

TEST(Perturb, RandomVariantsStayInCandidateSetAndDependOnlyOnView) {
  for_all(100, 34, [](Gen& g) {
    const SourceImage x = random_image(g, 4, 4, 1, 6, 0);
    const OffsetClassifier f({1.0, 0.0}, {});
    const int eps = static_cast<int>(g.integer(1, 2));
    for (Variant v : {Variant::Random, Variant::Random2}) {
      const auto cfg = config(v, eps, static_cast<std::uint64_t>(g.integer(0, 1000)));
      const SourceImage out = perturb(cfg, f, x);
      const Shift moved = x.offset() - out.offset();
      EXPECT_LE(moved.max_norm(), eps);
      if (v == Variant::Random) {
        EXPECT_NE(moved, (Shift{0, 0}));
      }
      const auto px = x.padded_pixels();
      const SourceImage copy(4, 4, 1, 6, std::vector<float>(px.begin(), px.end()), 0);
      EXPECT_TRUE(perturb(cfg, f, copy).same_view(out));
    }
  });
}

TEST(NeighborCount, Examples) {
  Gen g(8);
  const SourceImage base = random_image(g, 5, 5, 1, 3, 0);
  {
    // Only x at offset (1, 1) is misclassified.
    const OffsetClassifier f({5.0, 0.0, 0.0}, {{{1, 1}, {0.0, 1.0, 0.0}}});
    const SourceImage x = base.at_offset({1, 1});
    EXPECT_EQ(neighbor_count(config(Variant::Strongest, 1), f, x), 8);
  }
  {
    const OffsetClassifier f({5.0, 0.0, 0.0}, {});
    const OffsetClassifier wrong_at_origin({5.0, 0.0, 0.0}, {{{0, 0}, {0.0, 3.0, 0.0}}});
    const SourceImage x = base.at_offset({0, 0});
    EXPECT_THROW(neighbor_count(config(Variant::Strongest, 1), f, x), Error);
    EXPECT_EQ(neighbor_count(config(Variant::Nearest, 1), wrong_at_origin, x), 8);
  }
  {
    // Every offset is misclassified except the origin, whose strongest attack
    // is x at offset (-1, -1): exactly one neighbor maps onto x.
    std::map<std::pair<int, int>, std::vector<double>> t{{{0, 0}, {5.0, 0.0, 0.0}}, {{-1, -1}, {0.0, 0.0, 4.0}}};
    const OffsetClassifier f({0.0, 1.0, 0.0}, t);
    const SourceImage x = base.at_offset({-1, -1});
    EXPECT_EQ(neighbor_count(config(Variant::Strongest, 1), f, x), 1);
    EXPECT_EQ(density_weight(config(Variant::Strongest, 1), f, x), 0.5);
    EXPECT_EQ(neighbor_count(config(Variant::Nearest, 1), f, x), 0);
    EXPECT_EQ(density_weight(config(Variant::Nearest, 1), f, x), 1.0);
  }
}

TEST(NeighborCount, Preconditions) {
  Gen g(9);
  const SourceImage base = random_image(g, 4, 4, 1, 3, 0);
  const OffsetClassifier wrong({0.0, 1.0}, {});
  try {
    neighbor_count(config(Variant::Strongest, 1), wrong, base.at_offset({2, 0}));
    ADD_FAILURE() << "neighbors outside the pad accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfPad);
  }
  try {
    neighbor_count(config(Variant::Strongest, 2), wrong, base);
    ADD_FAILURE() << "epsilon 2 accepted at pad 3";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EpsilonTooLarge);
  }
  const OffsetClassifier right({1.0, 0.0}, {});
  try {
    density_weight(config(Variant::Random, 1), right, base);
    ADD_FAILURE() << "weight at a correct image accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
  EXPECT_THROW(neighbor_count(config(Variant::Random, 1), wrong, base), Error);
  EXPECT_THROW(neighbor_mass(config(Variant::Nearest, 1), wrong, base), Error);
}

TEST(NeighborMass, ClosedFormMatchesMonteCarlo) {
  Gen g(10);
  const int eps = 5;
  const SourceImage base = random_image(g, 3, 3, 1, 15, 0);
  const TranslationSet set(eps);
  // x at the origin is misclassified; the neighbors at offsets v_0 .. v_{k-1} are correct.
  const int k = 10;
  std::map<std::pair<int, int>, std::vector<double>> t;
  for (int i = 0; i < k; ++i) {
    const Shift v = set.vectors()[static_cast<std::size_t>(i)];
    t[{v.dx, v.dy}] = {1.0, 0.0};
  }
  const OffsetClassifier f({0.0, 1.0}, t);
  const SourceImage x = base;

  for (Variant v : {Variant::Random, Variant::Random2}) {
    const double cands = v == Variant::Random ? 120.0 : 121.0;
    const auto cfg = config(v, eps, 3);
    EXPECT_NEAR(neighbor_mass(cfg, f, x), k / cands, 1e-15);
    EXPECT_NEAR(density_weight(cfg, f, x), 1.0 / (1.0 + k / cands), 1e-15);

    const int draws = 24000;
    double mass = 0.0;
    for (int i = 0; i < k; ++i) {
      const SourceImage nb = x.translated(-set.vectors()[static_cast<std::size_t>(i)]);
      int hits = 0;
      for (int s = 0; s < draws; ++s) hits += perturb(config(v, eps, static_cast<std::uint64_t>(s)), f, nb).same_view(x);
      mass += static_cast<double>(hits) / draws;
    }
    const double p = 1.0 / cands;
    const double se = std::sqrt(k * p * (1.0 - p) / draws);
    EXPECT_NEAR(mass, k / cands, 4.0 * se) << to_string(v);
  }
}

std::vector<SourceImage> toy_bases(Gen& g, int n, int classes) {
  std::vector<SourceImage> out;
  for (int i = 0; i < n; ++i) out.push_back(random_image(g, 5, 5, 1, 3, static_cast<int>(g.integer(0, classes - 1))));
  return out;
}

TEST(BruteForcePushforward, MatchesDensityWeightOnToyUniverses) {
  for_all(6, 35, [](Gen& g) {
    const auto bases = toy_bases(g, 6, 3);
    const LookupClassifier f(3, static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
    const Universe u = make_orbit_universe(bases, 2);
    for (Variant v : kAllVariants) {
      const auto cfg = config(v, 1, 17);
      const auto table = brute_force_pushforward(u, f, cfg);
      EXPECT_FALSE(table.empty());
      for (const auto& e : table) {
        const double h = density_weight(cfg, f, u.images[e.index]);
        EXPECT_NEAR(h, e.ratio, 1e-12) << to_string(v) << " image " << e.index;
        EXPECT_GT(e.ratio, 0.0);
        EXPECT_LE(e.ratio, 1.0);
      }
    }
  });
}

TEST(BruteForcePushforward, AlwaysCorrectClassifierLeavesNoEntries) {
  Gen g(11);
  const auto bases = toy_bases(g, 3, 1);
  const OffsetClassifier f({1.0, 0.0}, {});
  const Universe u = make_orbit_universe(bases, 2);
  for (Variant v : kAllVariants) EXPECT_TRUE(brute_force_pushforward(u, f, config(v, 1)).empty());
}

TEST(BruteForcePushforward, RejectsIncompleteUniverse) {
  Gen g(12);
  const auto bases = toy_bases(g, 2, 2);
  const LookupClassifier f(2, 1);
  Universe u = make_orbit_universe(bases, 2);
  u.images.pop_back();
  u.weights.pop_back();
  auto expect_not_closed = [&](const Universe& uni, int eps) {
    try {
      brute_force_pushforward(uni, f, config(Variant::Strongest, eps));
      ADD_FAILURE() << "incomplete universe accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UniverseNotClosed);
    }
  };
  expect_not_closed(u, 1);
  expect_not_closed(make_orbit_universe(bases, 3), 1);  // radius + epsilon exceeds the pad
  Universe mixed = make_orbit_universe(std::span(bases).first(1), 1);
  const Universe other = make_orbit_universe(std::span(bases).last(1), 2);
  mixed.images.insert(mixed.images.end(), other.images.begin(), other.images.end());
  mixed.weights.assign(mixed.images.size(), 1.0 / static_cast<double>(mixed.images.size()));
  expect_not_closed(mixed, 1);
}

TEST(DeterministicVariants, SuccessfulWeightsAndTValuesBounded) {
  for_all(6, 36, [](Gen& g) {
    const auto bases = toy_bases(g, 6, 3);
    auto f = std::make_shared<LookupClassifier>(3, static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
    for (Variant v : {Variant::Strongest, Variant::Nearest}) {
      const TranslationalAeg aeg(f, config(v, 1));
      // Views with |o| + 3 eps <= pad keep every weight query inside the pad.
      for (const auto& b : bases) {
        const auto out = evaluate_adversarial<SourceImage>(*f, aeg, {b, b.label()});
        const double t = out.paired().t_value;
        EXPECT_GE(t, -1.0);
        EXPECT_LE(t, 0.5);
        if (out.original_loss == 0.0 && out.adv_loss == 1.0) {
          EXPECT_LE(out.weight, 0.5);
        }
      }
    }
  });
}

TEST(DeterministicVariants, StrongestAndNearestSucceedOnSameImages) {
  for_all(20, 37, [](Gen& g) {
    const auto bases = toy_bases(g, 10, 3);
    const LookupClassifier f(3, static_cast<std::uint64_t>(g.integer(0, 1 << 30)));
    for (const auto& b : bases) {
      const bool s = f.predict(perturb(config(Variant::Strongest, 1), f, b)) != b.label();
      const bool n = f.predict(perturb(config(Variant::Nearest, 1), f, b)) != b.label();
      EXPECT_EQ(s, n);
    }
  });
}

TEST(TranslationalAeg, AuditFindsNoViolations) {
  Gen g(13);
  const auto bases = toy_bases(g, 30, 3);
  auto f = std::make_shared<LookupClassifier>(3, 77);
  std::vector<Example> s;
  for (const auto& b : bases) s.push_back({b, b.label()});
  const GroundTruth<SourceImage> truth = [](const SourceImage& x) { return x.label(); };
  const InputEquals<SourceImage> eq = [](const SourceImage& a, const SourceImage& b) { return a.same_view(b); };
  for (Variant v : kAllVariants) {
    const TranslationalAeg aeg(f, config(v, 1, 4));
    EXPECT_TRUE(verify_aeg_conditions<SourceImage>(*f, truth, aeg, s, eq).ok()) << to_string(v);
    EXPECT_EQ(aeg.descriptor().range_bound, range_bound(aeg.config()));
  }
}

TEST(LinearImageClassifier, LogitsAreAffine) {
  Gen g(14);
  const SourceImage x = random_image(g, 2, 2, 1, 0, 0);
  const LinearImageClassifier f(2, 4, {1, 0, 0, 0, 0, 0, 0, 1}, {0.5, -0.5});
  const auto l = *f.logits(x);
  EXPECT_DOUBLE_EQ(l[0], x.at(0, 0, 0) + 0.5);
  EXPECT_DOUBLE_EQ(l[1], x.at(1, 1, 0) - 0.5);
  EXPECT_THROW(LinearImageClassifier(2, 4, {1, 2, 3}, {0, 0}), Error);
  const SourceImage wrong = random_image(g, 3, 2, 1, 0, 0);
  EXPECT_THROW(f.predict(wrong), Error);
}

TEST(ImageIo, ImageRoundTrip) {
  Gen g(15);
  std::ostringstream out;
  const SourceImage a = random_image(g, 3, 2, 3, 2, 4);
  const SourceImage b = random_image(g, 2, 2, 1, 0, 1);
  write_image(out, a);
  write_image(out, b);
  std::istringstream in("# two images\n" + out.str());
  const auto images = read_images(in);
  ASSERT_EQ(images.size(), 2u);
  EXPECT_TRUE(images[0].same_view(a));
  EXPECT_EQ(images[0].label(), 4);
  EXPECT_EQ(images[0].pad(), 2);
  EXPECT_EQ(std::vector<float>(images[0].padded_pixels().begin(), images[0].padded_pixels().end()),
            std::vector<float>(a.padded_pixels().begin(), a.padded_pixels().end()));
  EXPECT_TRUE(images[1].same_view(b));
}

TEST(ImageIo, MalformedInputIsAnIoError) {
  for (const char* text : {"shape 2 2 1 0\n0.1 0.2 0.3\nlabel 0\n", "shape 2 2 1 0\n0.1 0.2 0.3 x\nlabel 0\n",
                           "shape 2 2 1 0\n0.1 0.2 0.3 0.4\n", "picture 2 2 1 0\n"}) {
    std::istringstream in(text);
    try {
      read_images(in);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Io) << text;
    }
  }
}

TEST(ImageIo, FixtureRoundTrip) {
  const auto fx = synthesize_fixture("tiny", 3, 3, 1, 4, 1, 2, 5, 0.2, 8);
  std::ostringstream out;
  write_universe_fixture(out, fx);
  std::istringstream in(out.str());
  const auto back = read_universe_fixture(in);
  EXPECT_EQ(back.name, "tiny");
  EXPECT_EQ(back.epsilon, 1);
  ASSERT_EQ(back.bases.size(), fx.bases.size());
  for (std::size_t i = 0; i < fx.bases.size(); ++i) {
    EXPECT_TRUE(back.bases[i].same_view(fx.bases[i]));
    EXPECT_EQ(back.bases[i].label(), fx.bases[i].label());
    EXPECT_EQ(*back.classifier->logits(back.bases[i]), *fx.classifier->logits(fx.bases[i]));
  }
  const auto again = synthesize_fixture("tiny", 3, 3, 1, 4, 1, 2, 5, 0.2, 8);
  EXPECT_EQ(std::vector<double>(again.classifier->weights().begin(), again.classifier->weights().end()),
            std::vector<double>(fx.classifier->weights().begin(), fx.classifier->weights().end()));
}

TEST(ImageIo, ShippedFixturesLoad) {
  for (const char* name : {"gray5_pad4_eps1.txt", "rgb4_pad7_eps2.txt", "gray6_pad10_eps3.txt"}) {
    const auto fx = load_universe_fixture(std::string(OVFIT_DATA_DIR) + "/" + name);
    EXPECT_FALSE(fx.bases.empty()) << name;
    EXPECT_LE(fx.epsilon, max_valid_epsilon(fx.bases.front().pad())) << name;
  }
}

}  // namespace
}  // namespace ovfit::translational
