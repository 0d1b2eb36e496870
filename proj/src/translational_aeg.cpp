#include "ovfit/translational_aeg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <utility>

#include "ovfit/error.hpp"
#include "ovfit/seed.hpp"

namespace ovfit::translational {

namespace {

void check_epsilon(const TranslationalConfig& cfg, int pad) {
  if (cfg.epsilon < 1) throw Error(ErrorKind::InvalidParameter, "epsilon must be >= 1");
  if (cfg.epsilon > max_valid_epsilon(pad)) {
    throw Error(ErrorKind::EpsilonTooLarge, "epsilon " + std::to_string(cfg.epsilon) + " exceeds floor(pad / 3) = " +
                                                std::to_string(max_valid_epsilon(pad)));
  }
}

void check_misclassified(const Classifier<SourceImage>& f, const SourceImage& img) {
  if (f.predict(img) == img.label()) {
    throw Error(ErrorKind::Precondition, "density weight requested at a correctly classified image");
  }
}

// Neighbors tau_{-v}(x) and their own candidates reach |o| + 2 eps.
void check_neighborhood(const TranslationalConfig& cfg, const SourceImage& img) {
  if (img.offset().max_norm() + 2 * cfg.epsilon > img.pad()) {
    throw Error(ErrorKind::OutOfPad, "neighbors of an image at offset norm " + std::to_string(img.offset().max_norm()) +
                                         " leave a pad of " + std::to_string(img.pad()) + " at epsilon " +
                                         std::to_string(cfg.epsilon));
  }
}

double unit_from_bits(std::uint64_t z) { return static_cast<double>(z >> 11) * 0x1.0p-53; }

// Candidate set of a random variant: the translations, plus the identity for random2.
std::size_t candidate_count(const TranslationalConfig& cfg, const TranslationSet& set) {
  return set.size() + (cfg.variant == Variant::Random2 ? 1 : 0);
}

SourceImage candidate(const TranslationSet& set, const SourceImage& img, std::size_t k) {
  return k < set.size() ? img.translated(set.vectors()[k]) : img;
}

// Index of the first view equal to x, or npos.
class ViewIndex {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ViewIndex(const std::vector<SourceImage>& images) : images_(images) {
    for (std::size_t i = 0; i < images.size(); ++i) {
      auto& bucket = buckets_[images[i].view_hash()];
      bool seen = false;
      for (std::size_t j : bucket) seen = seen || images[j].same_view(images[i]);
      if (!seen) bucket.push_back(i);
    }
  }

  std::size_t find(const SourceImage& x) const {
    const auto it = buckets_.find(x.view_hash());
    if (it == buckets_.end()) return npos;
    for (std::size_t j : it->second) {
      if (images_[j].same_view(x)) return j;
    }
    return npos;
  }

 private:
  const std::vector<SourceImage>& images_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

int Shift::max_norm() const { return std::max(std::abs(dx), std::abs(dy)); }

SourceImage::SourceImage(int width, int height, int channels, int pad, std::vector<float> pixels, int label)
    : width_(width), height_(height), channels_(channels), pad_(pad), label_(label) {
  if (width < 1 || height < 1 || channels < 1) {
    throw Error(ErrorKind::InvalidParameter, "image dimensions must be positive");
  }
  if (pad < 0) throw Error(ErrorKind::InvalidParameter, "pad must be >= 0");
  if (label < 0) throw Error(ErrorKind::InvalidParameter, "label must be >= 0");
  const auto expected = static_cast<std::size_t>(width + 2 * pad) * static_cast<std::size_t>(height + 2 * pad) *
                        static_cast<std::size_t>(channels);
  if (pixels.size() != expected) {
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(expected) + " padded pixel values, got " +
                                               std::to_string(pixels.size()));
  }
  for (float p : pixels) {
    if (!(p >= 0.0f && p <= 1.0f)) throw Error(ErrorKind::RangeViolation, "pixel value outside [0, 1]");
    if (p == 0.0f && std::signbit(p)) throw Error(ErrorKind::RangeViolation, "negative zero pixel");
  }
  buffer_ = std::make_shared<const std::vector<float>>(std::move(pixels));
}

std::size_t SourceImage::view_size() const {
  return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) * static_cast<std::size_t>(channels_);
}

SourceImage SourceImage::translated(Shift v) const { return at_offset(offset_ - v); }

SourceImage SourceImage::at_offset(Shift offset) const {
  if (offset.max_norm() > pad_) {
    throw Error(ErrorKind::OutOfPad, "crop offset (" + std::to_string(offset.dx) + ", " + std::to_string(offset.dy) +
                                         ") outside pad " + std::to_string(pad_));
  }
  SourceImage out = *this;
  out.offset_ = offset;
  return out;
}

const float* SourceImage::row_ptr(int y) const {
  const auto padded_width = static_cast<std::size_t>(width_ + 2 * pad_);
  const auto row = static_cast<std::size_t>(pad_ + offset_.dy + y);
  const auto col = static_cast<std::size_t>(pad_ + offset_.dx);
  return buffer_->data() + (row * padded_width + col) * static_cast<std::size_t>(channels_);
}

float SourceImage::at(int x, int y, int c) const {
  if (x < 0 || x >= width_ || y < 0 || y >= height_ || c < 0 || c >= channels_) {
    throw Error(ErrorKind::InvalidParameter, "pixel index outside the view");
  }
  return row_ptr(y)[static_cast<std::size_t>(x) * static_cast<std::size_t>(channels_) + static_cast<std::size_t>(c)];
}

std::vector<float> SourceImage::view() const {
  std::vector<float> out(view_size());
  view_into(out);
  return out;
}

void SourceImage::view_into(std::span<float> out) const {
  if (out.size() != view_size()) throw Error(ErrorKind::LengthMismatch, "view buffer has the wrong size");
  const auto row_len = static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  for (int y = 0; y < height_; ++y) {
    std::memcpy(out.data() + static_cast<std::size_t>(y) * row_len, row_ptr(y), row_len * sizeof(float));
  }
}

bool SourceImage::same_view(const SourceImage& other) const {
  if (width_ != other.width_ || height_ != other.height_ || channels_ != other.channels_) return false;
  if (buffer_ == other.buffer_ && offset_ == other.offset_) return true;
  const auto row_len = static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  for (int y = 0; y < height_; ++y) {
    if (std::memcmp(row_ptr(y), other.row_ptr(y), row_len * sizeof(float)) != 0) return false;
  }
  return true;
}

std::uint64_t SourceImage::view_hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(width_) << 40 ^ static_cast<std::uint64_t>(height_) << 20 ^
                          static_cast<std::uint64_t>(channels_));
  const auto row_len = static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
  for (int y = 0; y < height_; ++y) {
    const float* row = row_ptr(y);
    for (std::size_t i = 0; i < row_len; ++i) h = mix64(h ^ std::bit_cast<std::uint32_t>(row[i]));
  }
  return h;
}

TranslationSet::TranslationSet(int epsilon) : epsilon_(epsilon) {
  if (epsilon < 1) throw Error(ErrorKind::InvalidParameter, "epsilon must be >= 1");
  vectors_.reserve(static_cast<std::size_t>((2 * epsilon + 1) * (2 * epsilon + 1) - 1));
  for (int dy = -epsilon; dy <= epsilon; ++dy) {
    for (int dx = -epsilon; dx <= epsilon; ++dx) {
      if (dx != 0 || dy != 0) vectors_.push_back({dx, dy});
    }
  }
}

int max_valid_epsilon(int pad) {
  if (pad < 0) throw Error(ErrorKind::InvalidParameter, "pad must be >= 0");
  return pad / 3;
}

double excess_logit(const Classifier<SourceImage>& f, const SourceImage& img, int y) {
  const auto logits = f.logits(img);
  if (!logits) throw Error(ErrorKind::MissingLogits, "classifier does not expose logits");
  if (y < 0 || static_cast<std::size_t>(y) >= logits->size()) {
    throw Error(ErrorKind::InvalidParameter, "label outside the logit vector");
  }
  return *std::max_element(logits->begin(), logits->end()) - (*logits)[static_cast<std::size_t>(y)];
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Strongest: return "strongest";
    case Variant::Nearest: return "nearest";
    case Variant::Random: return "random";
    case Variant::Random2: return "random2";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : {Variant::Strongest, Variant::Nearest, Variant::Random, Variant::Random2}) {
    if (s == to_string(v)) return v;
  }
  throw Error(ErrorKind::Config, "unknown translational variant '" + s + "'");
}

bool is_deterministic(Variant v) { return v == Variant::Strongest || v == Variant::Nearest; }

double range_bound(const TranslationalConfig& cfg) { return is_deterministic(cfg.variant) ? 1.5 : 2.0; }

SourceImage perturb(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img) {
  check_epsilon(cfg, img.pad());
  const int y = img.label();
  if (f.predict(img) != y) return img;
  const TranslationSet set(cfg.epsilon);

  if (!is_deterministic(cfg.variant)) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {img.view_hash()}));
    std::uniform_int_distribution<std::size_t> pick(0, candidate_count(cfg, set) - 1);
    return candidate(set, img, pick(rng));
  }

  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const SourceImage cand = img.translated(set.vectors()[k]);
    if (f.predict(cand) == y) continue;
    // Larger is better; strict comparison keeps the first vector in scan order.
    const double score = cfg.variant == Variant::Strongest ? excess_logit(f, cand, y)
                                                           : -static_cast<double>(set.vectors()[k].squared_norm());
    if (!best || score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best ? img.translated(set.vectors()[*best]) : img;
}

int neighbor_count(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img) {
  if (!is_deterministic(cfg.variant)) {
    throw Error(ErrorKind::InvalidParameter, "neighbor_count needs a deterministic variant");
  }
  check_epsilon(cfg, img.pad());
  check_misclassified(f, img);
  check_neighborhood(cfg, img);
  const TranslationSet set(cfg.epsilon);
  int n = 0;
  for (const Shift& v : set.vectors()) {
    const SourceImage neighbor = img.translated(-v);
    if (perturb(cfg, f, neighbor).same_view(img)) ++n;
  }
  return n;
}

double neighbor_mass(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img) {
  if (is_deterministic(cfg.variant)) throw Error(ErrorKind::InvalidParameter, "neighbor_mass needs a random variant");
  check_epsilon(cfg, img.pad());
  check_misclassified(f, img);
  check_neighborhood(cfg, img);
  const TranslationSet set(cfg.epsilon);
  const std::size_t count = candidate_count(cfg, set);
  double mass = 0.0;
  for (const Shift& v : set.vectors()) {
    const SourceImage neighbor = img.translated(-v);
    if (f.predict(neighbor) != neighbor.label()) continue;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < count; ++k) hits += candidate(set, neighbor, k).same_view(img) ? 1 : 0;
    mass += static_cast<double>(hits) / static_cast<double>(count);
  }
  return mass;
}

double density_weight(const TranslationalConfig& cfg, const Classifier<SourceImage>& f, const SourceImage& img) {
  if (is_deterministic(cfg.variant)) return 1.0 / (1.0 + static_cast<double>(neighbor_count(cfg, f, img)));
  return 1.0 / (1.0 + neighbor_mass(cfg, f, img));
}

TranslationalAeg::TranslationalAeg(std::shared_ptr<const Classifier<SourceImage>> f, TranslationalConfig cfg)
    : f_(std::move(f)), cfg_(cfg) {
  if (!f_) throw Error(ErrorKind::InvalidParameter, "classifier is null");
  if (cfg_.epsilon < 1) throw Error(ErrorKind::InvalidParameter, "epsilon must be >= 1");
}

SourceImage TranslationalAeg::perturb(const SourceImage& x) const { return translational::perturb(cfg_, *f_, x); }

double TranslationalAeg::density_weight(const SourceImage& x_adv) const {
  return translational::density_weight(cfg_, *f_, x_adv);
}

AegDescriptor TranslationalAeg::descriptor() const {
  return {to_string(cfg_.variant), static_cast<double>(cfg_.epsilon), range_bound(cfg_)};
}

LinearImageClassifier::LinearImageClassifier(int classes, std::size_t features, std::vector<double> weights,
                                             std::vector<double> bias)
    : classes_(classes), features_(features), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (classes < 2) throw Error(ErrorKind::InvalidParameter, "need at least two classes");
  if (features < 1) throw Error(ErrorKind::InvalidParameter, "need at least one feature");
  if (weights_.size() != static_cast<std::size_t>(classes) * features) {
    throw Error(ErrorKind::LengthMismatch, "weight matrix has the wrong size");
  }
  if (bias_.size() != static_cast<std::size_t>(classes)) throw Error(ErrorKind::LengthMismatch, "bias has the wrong size");
}

std::optional<std::vector<double>> LinearImageClassifier::logits(const SourceImage& x) const {
  if (x.view_size() != features_) {
    throw Error(ErrorKind::LengthMismatch, "view has " + std::to_string(x.view_size()) + " values, classifier expects " +
                                               std::to_string(features_));
  }
  const std::vector<float> v = x.view();
  std::vector<double> out(bias_);
  for (int k = 0; k < classes_; ++k) {
    const double* w = weights_.data() + static_cast<std::size_t>(k) * features_;
    double s = 0.0;
    for (std::size_t j = 0; j < features_; ++j) s += w[j] * static_cast<double>(v[j]);
    out[static_cast<std::size_t>(k)] += s;
  }
  return out;
}

int LinearImageClassifier::predict(const SourceImage& x) const { return argmax_lowest(*logits(x)); }

LookupClassifier::LookupClassifier(int classes, std::uint64_t salt) : classes_(classes), salt_(salt) {
  if (classes < 2) throw Error(ErrorKind::InvalidParameter, "need at least two classes");
}

void LookupClassifier::set(const SourceImage& x, std::vector<double> logits) {
  if (logits.size() != static_cast<std::size_t>(classes_)) {
    throw Error(ErrorKind::LengthMismatch, "logit vector has the wrong size");
  }
  auto& bucket = table_[x.view_hash()];
  std::vector<float> v = x.view();
  for (auto& e : bucket) {
    if (e.view == v) {
      e.logits = std::move(logits);
      return;
    }
  }
  bucket.push_back({std::move(v), std::move(logits)});
}

std::optional<std::vector<double>> LookupClassifier::logits(const SourceImage& x) const {
  const std::uint64_t h = x.view_hash();
  if (const auto it = table_.find(h); it != table_.end()) {
    const std::vector<float> v = x.view();
    for (const auto& e : it->second) {
      if (e.view == v) return e.logits;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(classes_));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = unit_from_bits(derive_seed(salt_, {h, k}));
  return out;
}

int LookupClassifier::predict(const SourceImage& x) const { return argmax_lowest(*logits(x)); }

Universe make_orbit_universe(std::span<const SourceImage> bases, int radius) {
  if (bases.empty()) throw Error(ErrorKind::EmptySample, "no base images");
  if (radius < 0) throw Error(ErrorKind::InvalidParameter, "radius must be >= 0");
  Universe u;
  for (const auto& base : bases) {
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) u.images.push_back(base.at_offset({dx, dy}));
    }
  }
  u.weights.assign(u.images.size(), 1.0 / static_cast<double>(u.images.size()));
  return u;
}

std::vector<PushforwardEntry> brute_force_pushforward(const Universe& universe, const Classifier<SourceImage>& f,
                                                      const TranslationalConfig& cfg) {
  const auto& images = universe.images;
  if (images.empty()) throw Error(ErrorKind::EmptySample, "empty universe");
  if (universe.weights.size() != images.size()) {
    throw Error(ErrorKind::LengthMismatch, "universe weights and images differ in length");
  }
  for (double w : universe.weights) {
    if (!(w >= 0.0 && std::isfinite(w))) throw Error(ErrorKind::InvalidParameter, "universe weight must be >= 0");
  }

  // Every base must contribute the complete box of offsets of one common radius.
  std::unordered_map<const void*, std::vector<std::size_t>> orbits;
  for (std::size_t i = 0; i < images.size(); ++i) orbits[images[i].source_id()].push_back(i);
  int radius = -1;
  for (const auto& [id, members] : orbits) {
    int r = 0;
    std::set<std::pair<int, int>> offsets;
    for (std::size_t i : members) {
      r = std::max(r, images[i].offset().max_norm());
      offsets.insert({images[i].offset().dx, images[i].offset().dy});
    }
    const auto box = static_cast<std::size_t>((2 * r + 1) * (2 * r + 1));
    if (offsets.size() != box || members.size() != box) {
      throw Error(ErrorKind::UniverseNotClosed, "a base image does not contribute a complete orbit");
    }
    if (radius >= 0 && r != radius) throw Error(ErrorKind::UniverseNotClosed, "orbits have different radii");
    radius = r;
    const int pad = images[members.front()].pad();
    check_epsilon(cfg, pad);
    if (r < cfg.epsilon || r + cfg.epsilon > pad) {
      throw Error(ErrorKind::UniverseNotClosed, "orbit radius " + std::to_string(r) + " outside [epsilon, pad - epsilon]");
    }
  }

  const ViewIndex index(images);
  std::vector<double> rho(images.size(), 0.0);
  std::vector<double> rho_g(images.size(), 0.0);
  auto add = [&](std::vector<double>& mass, const SourceImage& x, double w) {
    const std::size_t j = index.find(x);
    if (j != ViewIndex::npos) mass[j] += w;
  };

  const TranslationSet set(cfg.epsilon);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const SourceImage& u = images[i];
    const double w = universe.weights[i];
    add(rho, u, w);
    if (is_deterministic(cfg.variant) || f.predict(u) != u.label()) {
      add(rho_g, perturb(cfg, f, u), w);
      continue;
    }
    const std::size_t count = candidate_count(cfg, set);
    for (std::size_t k = 0; k < count; ++k) add(rho_g, candidate(set, u, k), w / static_cast<double>(count));
  }

  std::vector<PushforwardEntry> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const SourceImage& x = images[i];
    if (x.offset().max_norm() > radius - cfg.epsilon) continue;
    if (f.predict(x) == x.label()) continue;
    const std::size_t j = index.find(x);
    out.push_back({i, rho[j] / rho_g[j]});
  }
  return out;
}

}  // namespace ovfit::translational
