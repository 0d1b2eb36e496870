#pragma once

// Translational AEG family on padded images. An image is stored once with a
// pad margin on every side; a view is the W x H x C crop at an integer offset,
// so a translation only moves the crop window and is exactly invertible while
// the window stays inside the pad.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovfit/aeg_framework.hpp"

namespace ovfit::translational {

struct Shift {
  int dx = 0;
  int dy = 0;

  int max_norm() const;
  int squared_norm() const { return dx * dx + dy * dy; }
  Shift operator-() const { return {-dx, -dy}; }
  Shift operator+(Shift o) const { return {dx + o.dx, dy + o.dy}; }
  Shift operator-(Shift o) const { return {dx - o.dx, dy - o.dy}; }
  bool operator==(const Shift&) const = default;
};

class SourceImage {
 public:
  /// pixels: row-major (y, x, c) over the padded (W + 2 pad) x (H + 2 pad) grid.
  SourceImage(int width, int height, int channels, int pad, std::vector<float> pixels, int label);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  int pad() const { return pad_; }
  int label() const { return label_; }
  Shift offset() const { return offset_; }
  std::size_t view_size() const;

  /// Content moves by v; the crop window moves by -v. Throws OutOfPad when the
  /// window would leave the padded buffer.
  SourceImage translated(Shift v) const;
  SourceImage at_offset(Shift offset) const;

  float at(int x, int y, int c) const;
  std::vector<float> view() const;
  void view_into(std::span<float> out) const;
  /// Bitwise equality of the cropped views.
  bool same_view(const SourceImage& other) const;
  std::uint64_t view_hash() const;

  /// Identity of the underlying padded buffer.
  const void* source_id() const { return buffer_.get(); }
  std::span<const float> padded_pixels() const { return *buffer_; }

 private:
  const float* row_ptr(int y) const;

  std::shared_ptr<const std::vector<float>> buffer_;
  int width_;
  int height_;
  int channels_;
  int pad_;
  int label_;
  Shift offset_;
};

using Example = LabeledExample<SourceImage>;

/// All v != 0 with |v|_inf <= epsilon, rows top to bottom (dy ascending), each
/// row left to right (dx ascending).
class TranslationSet {
 public:
  explicit TranslationSet(int epsilon);

  int epsilon() const { return epsilon_; }
  const std::vector<Shift>& vectors() const { return vectors_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  int epsilon_;
  std::vector<Shift> vectors_;
};

/// floor(pad / 3): neighbors of neighbors of an attacked view stay inside the pad.
int max_valid_epsilon(int pad);

/// max_i l_i - l_y.
double excess_logit(const Classifier<SourceImage>& f, const SourceImage& img, int y);

enum class Variant { Strongest, Nearest, Random, Random2 };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);
bool is_deterministic(Variant v);

struct TranslationalConfig {
  Variant variant = Variant::Strongest;
  int epsilon = 1;
  std::uint64_t seed = 0;
};

/// 3/2 for deterministic variants, 2 for random ones.
double range_bound(const TranslationalConfig& cfg);

/// g(x). Misclassified inputs are returned unchanged. Deterministic variants
/// choose among misclassified translations only; random variants draw uniformly
/// from V_eps (random) or V_eps plus the identity (random2) with a sub-seed
/// derived from cfg.seed and the view content.
SourceImage perturb(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img);

/// n(x) = #{v : g(tau_{-v}(x)) == x} for a deterministic variant and a
/// misclassified x.
int neighbor_count(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img);

/// Sum over v of P(g(tau_{-v}(x)) == x) for a random variant and a
/// misclassified x.
double neighbor_mass(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img);

/// 1 / (1 + n(x)) or 1 / (1 + neighbor_mass(x)).
double density_weight(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img);

class TranslationalAeg final : public AdversarialGenerator<SourceImage> {
 public:
  TranslationalAeg(std::shared_ptr<const Classifier<SourceImage>> f, TranslationalConfig cfg);

  SourceImage perturb(const SourceImage& x) const override;
  double density_weight(const SourceImage& x_adv) const override;
  AegDescriptor descriptor() const override;

  const TranslationalConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<const Classifier<SourceImage>> f_;
  TranslationalConfig cfg_;
};

/// Affine scores on the flattened view.
class LinearImageClassifier final : public Classifier<SourceImage> {
 public:
  /// weights: classes x features, row-major.
  LinearImageClassifier(int classes, std::size_t features, std::vector<double> weights, std::vector<double> bias);

  int predict(const SourceImage& x) const override;
  std::optional<std::vector<double>> logits(const SourceImage& x) const override;

  int classes() const { return classes_; }
  std::size_t features() const { return features_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> bias() const { return bias_; }

 private:
  int classes_;
  std::size_t features_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

/// Logits looked up by view content. Views without an entry get pseudo-random
/// logits in [0, 1) derived from the salt and the view hash.
class LookupClassifier final : public Classifier<SourceImage> {
 public:
  LookupClassifier(int classes, std::uint64_t salt);

  void set(const SourceImage& x, std::vector<double> logits);

  int predict(const SourceImage& x) const override;
  std::optional<std::vector<double>> logits(const SourceImage& x) const override;

 private:
  struct Entry {
    std::vector<float> view;
    std::vector<double> logits;
  };

  int classes_;
  std::uint64_t salt_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> table_;
};

/// Finite distribution over views: complete orbits {base at offset o : |o|_inf <= radius}.
struct Universe {
  std::vector<SourceImage> images;
  std::vector<double> weights;
};

/// Uniform universe over every offset of every base within radius.
Universe make_orbit_universe(std::span<const SourceImage> bases, int radius);

struct PushforwardEntry {
  std::size_t index;   // into the universe
  double ratio;        // rho(x) / rho_g(x)
};

/// Applies g to every universe element (random variants as their exact uniform
/// mixture) and returns rho / rho_g at every misclassified element whose
/// offset satisfies |o|_inf <= radius - epsilon. Throws UniverseNotClosed unless
/// every base contributes a complete orbit of one common radius r with
/// epsilon <= r <= pad - epsilon.
std::vector<PushforwardEntry> brute_force_pushforward(const Universe& universe, const Classifier<SourceImage>& f,
                                                      const TranslationalConfig& cfg);

}  // namespace ovfit::translational
