#pragma once

// Synthetic screening corpus with known ground truth: every unique frame has
// its own fan geometry and tissue texture; a near-duplicate is its source
// frame re-rendered with a small brightness change and fresh speckle, placed
// right after the source in the same sequence.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "support/synth.hpp"
#include "usmask/pipeline.hpp"

namespace usmask::testing {

struct Corpus {
  Manifest manifest;
  std::size_t unique_count = 0;
  std::size_t duplicate_count = 0;
};

inline FanSpec random_fan(std::mt19937_64& rng, std::size_t side) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FanSpec s;
  s.height = s.width = side;
  s.apex_x = side * (0.15 + 0.7 * u(rng));
  s.apex_y = side * (-0.4 + 0.6 * u(rng));
  s.inner_radius = side * 0.15 * u(rng);
  s.outer_radius = side * (0.7 + 0.8 * u(rng));
  s.opening_deg = 45.0 + 45.0 * u(rng);
  return s;
}

// Texture with unit standard deviation whose energy sits in the low
// vertical / broad horizontal band the 32-dim stub embedding looks at, so
// unrelated frames do not share a few dominant coefficients.
inline Texture broadband_texture(std::mt19937_64& rng, int count, double max_fy, double max_fx) {
  std::uniform_real_distribution<double> fy(0.0, max_fy), fx(-max_fx, max_fx),
      ph(0.0, 2 * std::numbers::pi);
  Texture t;
  const double amp = std::sqrt(2.0 / count);
  for (int i = 0; i < count; ++i) t.waves.push_back({fy(rng), fx(rng), ph(rng), amp});
  return t;
}

inline Corpus build_corpus(const std::filesystem::path& dir, std::size_t unique,
                           std::size_t duplicates, std::uint64_t seed,
                           std::size_t sequences = 20, std::size_t side = 128) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<bool> has_dup(unique, false);
  for (std::size_t i = 0; i < duplicates && i < unique; ++i) has_dup[i] = true;
  std::shuffle(has_dup.begin(), has_dup.end(), rng);

  Corpus c;
  c.unique_count = unique;
  c.duplicate_count = std::min(duplicates, unique);
  std::vector<long long> next_index(sequences, 0);
  for (std::size_t i = 0; i < unique; ++i) {
    const std::size_t seq = i % sequences;
    const std::string seq_id = "seq" + std::to_string(seq);
    const FanSpec fan = random_fan(rng, side);
    const Texture tex = broadband_texture(rng, 24, 1.75, 3.75);
    const double base = 0.2, contrast = 0.8;

    auto add = [&](const Image& img, const std::string& id) {
      const auto path = dir / (id + ".pgm");
      save_pgm(path, img);
      c.manifest.entries.push_back({id, path.string(), seq_id, next_index[seq]++});
    };
    const std::string id = "u" + std::to_string(i);
    add(render_fan(fan, tex, 0.05, rng(), base, contrast), id);
    if (has_dup[i]) {
      const double gain = 0.97 + 0.06 * u(rng);
      add(render_fan(fan, tex, 0.05, rng(), base * gain, contrast * gain), id + "_dup");
    }
  }
  return c;
}

}  // namespace usmask::testing
