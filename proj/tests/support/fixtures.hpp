#pragma once

#include <random>

#include "support/synth.hpp"
#include "usmask/masking.hpp"
#include "usmask/sector.hpp"

namespace usmask::testing {

struct MaskingFixture {
  Image image;
  PatchGrid grid{1, 1, 1};
  CoverageGrid coverage;
  PolarGeometry geometry;
  MaskingConfig cfg;
};

// Random fan frame with random masking parameters. Geometry comes from the
// library's ROI path so fixtures look like real inputs.
inline MaskingFixture random_masking_fixture(std::uint64_t seed, std::size_t side = 224,
                                             std::size_t patch = 16) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FanSpec fan;
  fan.height = side;
  fan.width = side;
  fan.apex_x = side * (0.35 + 0.3 * u(rng));
  fan.apex_y = side * 0.05 * u(rng);
  fan.inner_radius = side * 0.1 * u(rng);
  fan.outer_radius = side * (0.7 + 0.25 * u(rng));
  fan.opening_deg = 45.0 + 45.0 * u(rng);
  MaskingFixture fx;
  fx.image = render_fan(fan, Texture::random(rng), 0.05, rng());
  fx.grid = PatchGrid(side, side, patch);
  fx.coverage = patch_coverage(make_roi(side, side, fan_mask(fan)), fx.grid);
  fx.cfg.mu = u(rng);
  fx.cfg.sigma = 0.05 + 0.5 * u(rng);
  fx.cfg.k = 0.5 + 3.0 * u(rng);
  fx.cfg.tau = 0.9 * u(rng);
  fx.cfg.lambda = u(rng);
  fx.cfg.seed = rng();
  fx.geometry = polar_landmarks(fx.coverage, fx.cfg.tau);
  return fx;
}

}  // namespace usmask::testing
