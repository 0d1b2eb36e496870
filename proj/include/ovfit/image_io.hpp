#pragma once

// Plain-text image and toy-universe fixtures. Whitespace-separated tokens,
// '#' starts a comment. An image record is
//
//   shape W H C pad
//   <(H + 2 pad) rows of (W + 2 pad) * C values in [0, 1]>
//   label k
//
// and a universe fixture prefixes its image records with
//
//   universe <name>
//   epsilon <e>
//   classifier linear <K> <D>
//   weights <D values>        (K lines)
//   bias <K values>

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ovfit/translational_aeg.hpp"

namespace ovfit::translational {

struct UniverseFixture {
  std::string name;
  int epsilon = 1;
  std::shared_ptr<const LinearImageClassifier> classifier;
  std::vector<SourceImage> bases;
};

std::vector<SourceImage> read_images(std::istream& in);
/// Writes the padded buffer; the crop offset is not stored.
void write_image(std::ostream& out, const SourceImage& img);

UniverseFixture read_universe_fixture(std::istream& in);
UniverseFixture load_universe_fixture(const std::filesystem::path& path);
void write_universe_fixture(std::ostream& out, const UniverseFixture& fixture);

/// Random base images with class-dependent templates and a linear classifier
/// fitted loosely to them; deterministic in every argument.
UniverseFixture synthesize_fixture(const std::string& name, int width, int height, int channels, int pad, int epsilon,
                                   int classes, int bases, double noise, std::uint64_t seed);

}  // namespace ovfit::translational
