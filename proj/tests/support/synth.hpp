#pragma once

// Test-only fixtures and oracles. Nothing here calls into the code paths it
// is used to check.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "usmask/image.hpp"

namespace usmask::testing {

struct FanSpec {
  std::size_t height = 128, width = 128;
  double apex_y = 4.0, apex_x = 64.0;  // pixel coordinates of the apex
  double inner_radius = 0.0;
  double outer_radius = 118.0;
  double opening_deg = 70.0;           // full opening angle
};

// Analytic sector membership of the pixel centre (y + 0.5, x + 0.5).
inline bool in_fan(const FanSpec& s, std::size_t y, std::size_t x) {
  const double dy = double(y) + 0.5 - s.apex_y;
  const double dx = double(x) + 0.5 - s.apex_x;
  const double r = std::sqrt(dy * dy + dx * dx);
  if (r < s.inner_radius || r > s.outer_radius || dy <= 0.0) return false;
  const double ang = std::atan2(std::abs(dx), dy) * 180.0 / std::numbers::pi;
  return ang <= s.opening_deg / 2.0;
}

inline std::vector<std::uint8_t> fan_mask(const FanSpec& s) {
  std::vector<std::uint8_t> m(s.height * s.width);
  for (std::size_t y = 0; y < s.height; ++y)
    for (std::size_t x = 0; x < s.width; ++x) m[y * s.width + x] = in_fan(s, y, x) ? 1 : 0;
  return m;
}

// Smooth random tissue texture in roughly [-1, 1].
struct Texture {
  struct Wave {
    double fy, fx, phase, amp;
  };
  std::vector<Wave> waves;

  static Texture random(std::mt19937_64& rng, int count = 6, double max_freq = 4.0) {
    std::uniform_real_distribution<double> f(0.5, max_freq), ph(0.0, 2 * std::numbers::pi),
        amp(0.3, 1.0);
    Texture t;
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      t.waves.push_back({f(rng), f(rng), ph(rng), amp(rng)});
      total += t.waves.back().amp;
    }
    for (auto& w : t.waves) w.amp /= total;
    return t;
  }

  double operator()(double v, double u) const {  // v, u in [0,1)
    double acc = 0.0;
    for (const auto& w : waves)
      acc += w.amp * std::cos(2 * std::numbers::pi * (w.fy * v + w.fx * u) + w.phase);
    return acc;
  }
};

// Fan frame: zero background; inside, tissue intensity with multiplicative
// speckle I * (1 + N(0, speckle)).
inline Image render_fan(const FanSpec& s, const Texture& tex, double speckle, std::uint64_t seed,
                        double base = 0.5, double contrast = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, speckle);
  Image img(s.height, s.width, 0.0);
  for (std::size_t y = 0; y < s.height; ++y)
    for (std::size_t x = 0; x < s.width; ++x) {
      if (!in_fan(s, y, x)) continue;
      const double t = base + contrast * tex(double(y) / s.height, double(x) / s.width);
      img.at(y, x) = std::clamp(t * (1.0 + noise(rng)), 0.0, 1.0);
    }
  return img;
}

// Writes an 8-bit binary PGM without going through the library.
inline void save_pgm(const std::filesystem::path& p, const Image& img) {
  std::FILE* f = std::fopen(p.string().c_str(), "wb");
  std::fprintf(f, "P5\n%zu %zu\n255\n", img.width(), img.height());
  for (double v : img.pixels()) {
    const auto b = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    std::fputc(b, f);
  }
  std::fclose(f);
}

// O(N^4) orthonormal 2-D DCT-II coefficient, straight from the definition.
inline double dct2_direct(const Image& x, std::size_t u, std::size_t v) {
  const std::size_t n = x.height();
  auto alpha = [n](std::size_t k) { return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n); };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      acc += x.at(i, j) * std::cos(std::numbers::pi * (2 * i + 1) * u / (2.0 * n)) *
             std::cos(std::numbers::pi * (2 * j + 1) * v / (2.0 * n));
  return alpha(u) * alpha(v) * acc;
}

inline double iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni ? double(inter) / double(uni) : 1.0;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("usmask_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace usmask::testing
