#include "ovfit/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <type_traits>

#include "ovfit/error.hpp"
#include "ovfit/seed.hpp"

namespace ovfit::translational {

namespace {

class Tokens {
 public:
  explicit Tokens(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    for (;;) {
      if (!(in_ >> tok)) return false;
      if (tok.front() != '#') return true;
      in_.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    }
  }

  bool peek(std::string& tok) {
    if (has_peeked_) {
      tok = peeked_;
      return true;
    }
    if (!next(peeked_)) return false;
    has_peeked_ = true;
    tok = peeked_;
    return true;
  }

  std::string take(const char* what) {
    std::string tok;
    if (has_peeked_) {
      has_peeked_ = false;
      return peeked_;
    }
    if (!next(tok)) throw Error(ErrorKind::Io, std::string("unexpected end of input, expected ") + what);
    return tok;
  }

  void expect(const std::string& keyword) {
    const std::string tok = take(keyword.c_str());
    if (tok != keyword) throw Error(ErrorKind::Io, "expected '" + keyword + "', found '" + tok + "'");
  }

  long integer(const char* what) {
    const std::string tok = take(what);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorKind::Io, std::string("malformed ") + what + " '" + tok + "'");
    return v;
  }

  double real(const char* what) { return parse<double>(what); }
  float real_float(const char* what) { return parse<float>(what); }

 private:
  template <class T>
  T parse(const char* what) {
    const std::string tok = take(what);
    std::size_t used = 0;
    T v = 0;
    try {
      if constexpr (std::is_same_v<T, float>) {
        v = std::stof(tok, &used);
      } else {
        v = std::stod(tok, &used);
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorKind::Io, std::string("malformed ") + what + " '" + tok + "'");
    return v;
  }

  std::istream& in_;
  std::string peeked_;
  bool has_peeked_ = false;
};

SourceImage read_image(Tokens& t) {
  t.expect("shape");
  const long w = t.integer("width");
  const long h = t.integer("height");
  const long c = t.integer("channels");
  const long pad = t.integer("pad");
  if (w < 1 || h < 1 || c < 1 || pad < 0 || w > 4096 || h > 4096 || c > 64 || pad > 4096) {
    throw Error(ErrorKind::Io, "implausible image shape");
  }
  const auto n = static_cast<std::size_t>((w + 2 * pad) * (h + 2 * pad) * c);
  std::vector<float> pixels(n);
  for (auto& p : pixels) p = t.real_float("pixel value");
  t.expect("label");
  const long label = t.integer("label");
  return SourceImage(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), static_cast<int>(pad),
                     std::move(pixels), static_cast<int>(label));
}

}  // namespace

std::vector<SourceImage> read_images(std::istream& in) {
  Tokens t(in);
  std::vector<SourceImage> out;
  std::string tok;
  while (t.peek(tok)) out.push_back(read_image(t));
  return out;
}

void write_image(std::ostream& out, const SourceImage& img) {
  const int pw = img.width() + 2 * img.pad();
  const int ph = img.height() + 2 * img.pad();
  const auto px = img.padded_pixels();
  out << "shape " << img.width() << ' ' << img.height() << ' ' << img.channels() << ' ' << img.pad() << '\n';
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  std::size_t k = 0;
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw * img.channels(); ++x) out << (x ? " " : "") << px[k++];
    out << '\n';
  }
  out << "label " << img.label() << '\n';
}

UniverseFixture read_universe_fixture(std::istream& in) {
  Tokens t(in);
  UniverseFixture f;
  t.expect("universe");
  f.name = t.take("universe name");
  t.expect("epsilon");
  f.epsilon = static_cast<int>(t.integer("epsilon"));
  t.expect("classifier");
  t.expect("linear");
  const long classes = t.integer("class count");
  const long features = t.integer("feature count");
  if (classes < 2 || classes > 1024 || features < 1 || features > (1L << 24)) {
    throw Error(ErrorKind::Io, "implausible classifier shape");
  }
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(classes * features));
  for (long k = 0; k < classes; ++k) {
    t.expect("weights");
    for (long j = 0; j < features; ++j) weights.push_back(t.real("weight"));
  }
  t.expect("bias");
  std::vector<double> bias;
  for (long k = 0; k < classes; ++k) bias.push_back(t.real("bias"));
  f.classifier = std::make_shared<const LinearImageClassifier>(static_cast<int>(classes),
                                                               static_cast<std::size_t>(features), std::move(weights),
                                                               std::move(bias));
  std::string tok;
  while (t.peek(tok)) f.bases.push_back(read_image(t));
  if (f.bases.empty()) throw Error(ErrorKind::Io, "universe fixture has no images");
  return f;
}

UniverseFixture load_universe_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return read_universe_fixture(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_universe_fixture(std::ostream& out, const UniverseFixture& f) {
  if (!f.classifier) throw Error(ErrorKind::InvalidParameter, "fixture has no classifier");
  const auto& c = *f.classifier;
  out << "universe " << f.name << '\n' << "epsilon " << f.epsilon << '\n';
  out << "classifier linear " << c.classes() << ' ' << c.features() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < c.classes(); ++k) {
    out << "weights";
    for (std::size_t j = 0; j < c.features(); ++j) out << ' ' << c.weights()[static_cast<std::size_t>(k) * c.features() + j];
    out << '\n';
  }
  out << "bias";
  for (double b : c.bias()) out << ' ' << b;
  out << '\n';
  for (const auto& img : f.bases) write_image(out, img);
}

UniverseFixture synthesize_fixture(const std::string& name, int width, int height, int channels, int pad, int epsilon,
                                   int classes, int bases, double noise, std::uint64_t seed) {
  if (classes < 2 || bases < 1) throw Error(ErrorKind::InvalidParameter, "need >= 2 classes and >= 1 base");
  if (!(noise >= 0.0)) throw Error(ErrorKind::InvalidParameter, "noise must be >= 0");
  std::mt19937_64 rng(derive_seed(seed, {0}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // One plane wave per class and channel, defined on the padded grid.
  struct Wave {
    double fx, fy, phase;
  };
  std::vector<Wave> waves(static_cast<std::size_t>(classes * channels));
  for (auto& w : waves) w = {0.5 + unit(rng), 0.5 + unit(rng), 2.0 * std::numbers::pi * unit(rng)};
  auto pattern = [&](int k, int c, double x, double y) {
    const Wave& w = waves[static_cast<std::size_t>(k * channels + c)];
    return 0.5 + 0.3 * std::sin(2.0 * std::numbers::pi * (w.fx * x / width + w.fy * y / height) + w.phase);
  };

  const auto features = static_cast<std::size_t>(width * height * channels);
  std::vector<double> weights;
  for (int k = 0; k < classes; ++k) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        for (int c = 0; c < channels; ++c) weights.push_back(pattern(k, c, x, y) - 0.5 + 0.05 * normal(rng));
      }
    }
  }
  UniverseFixture f;
  f.name = name;
  f.epsilon = epsilon;
  f.classifier = std::make_shared<const LinearImageClassifier>(classes, features, std::move(weights),
                                                               std::vector<double>(static_cast<std::size_t>(classes), 0.0));

  const int pw = width + 2 * pad;
  const int ph = height + 2 * pad;
  for (int b = 0; b < bases; ++b) {
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(classes));
    std::vector<float> px;
    px.reserve(static_cast<std::size_t>(pw * ph * channels));
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        for (int c = 0; c < channels; ++c) {
          const double v = pattern(k, c, x - pad, y - pad) + noise * normal(rng);
          px.push_back(static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f);
        }
      }
    }
    f.bases.emplace_back(width, height, channels, pad, std::move(px), k);
  }
  return f;
}

}  // namespace ovfit::translational
