// Regenerates the shipped toy-universe fixtures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ovfit/image_io.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/universes";
  std::filesystem::create_directories(dir);

  struct Spec {
    const char* name;
    int width, height, channels, pad, epsilon, classes, bases;
    double noise;
    std::uint64_t seed;
  };
  const Spec specs[] = {
      {"gray5_pad4_eps1", 5, 5, 1, 4, 1, 2, 100, 0.2, 1},
      {"rgb4_pad7_eps2", 4, 4, 3, 7, 2, 3, 50, 0.2, 2},
      {"gray6_pad10_eps3", 6, 6, 1, 10, 3, 4, 40, 0.2, 3},
  };
  for (const auto& s : specs) {
    const auto fixture = ovfit::translational::synthesize_fixture(s.name, s.width, s.height, s.channels, s.pad,
                                                                  s.epsilon, s.classes, s.bases, s.noise, s.seed);
    const auto path = dir / (std::string(s.name) + ".txt");
    std::ofstream out(path);
    out << "# " << s.width << "x" << s.height << "x" << s.channels << " views, pad " << s.pad << ", " << s.classes
        << " classes, " << s.bases << " base images\n";
    ovfit::translational::write_universe_fixture(out, fixture);
    if (!out) {
      std::cerr << "cannot write " << path << '\n';
      return 1;
    }
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}
