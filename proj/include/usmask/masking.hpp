#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "usmask/image.hpp"
#include "usmask/patch_grid.hpp"
#include "usmask/rng.hpp"
#include "usmask/sector.hpp"

namespace usmask {

struct MaskingConfig {
  double mu = 0.5;
  double sigma = 0.25;
  double k = 2.0;
  double tau = 0.5;
  double lambda = 0.5;
  double mask_ratio = 0.75;
  double target_fraction = 0.5;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the first out-of-range field.
  void validate() const;
};

struct PolarCoord {
  double r = 0.0;
  double theta = 0.0;
};

struct PolarTerms {
  double f_r = 0.0;
  double g_theta = 0.0;
  double q = 0.0;
};

struct ScoreMaps {
  std::vector<double> r, theta;
  std::vector<double> s_polar, p_polar;
  std::vector<double> s_hog, p_hog;
  std::vector<double> p_joint;
  bool polar_fallback = false;
};

struct MaskPlan {
  std::string image_id;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t patch_size = 0;
  std::vector<std::size_t> visible;
  std::vector<std::size_t> masked;
  std::vector<std::size_t> targets;
  std::vector<std::size_t> supplemented;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

PolarCoord polar_coords(const PolarGeometry& geom, std::size_t patch_index);
PolarTerms polar_terms(double r, double theta, double v, const MaskingConfig& cfg);

struct PolarDistribution {
  std::vector<double> s_polar;
  std::vector<double> p_polar;
};
// Throws DegeneratePrior when the score sums to zero.
PolarDistribution polar_distribution(const PolarGeometry& geom, const CoverageGrid& coverage,
                                     const MaskingConfig& cfg);

// Per-patch 9-bin unsigned HOG magnitude, L2-normed, rescaled by the max.
std::vector<double> hog_scores(const Image& img, const PatchGrid& grid);
std::vector<double> hog_distribution(std::span<const double> s_hog);
std::vector<double> joint_distribution(std::span<const double> p_hog,
                                       std::span<const double> p_polar, double lambda);

// Draw order of k items without replacement under `weights`
// (sequential draw-and-remove law, realized with Gumbel top-k).
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t k, Rng& rng);

// Chooses the visible set from the candidate pool. The default strategy is
// single-shot weighted sampling; alternatives can be injected.
using VisibleSelector = std::function<std::vector<std::size_t>(
    std::span<const std::size_t> candidates, std::span<const double> p_joint,
    std::size_t n_visible, Rng& rng)>;

std::vector<std::size_t> weighted_visible_selector(std::span<const std::size_t> candidates,
                                                   std::span<const double> p_joint,
                                                   std::size_t n_visible, Rng& rng);

std::size_t visible_count(std::size_t n_patches, double mask_ratio);

// `rng_seed` is the image's substream seed. Throws InvalidMaskRatio when the
// visible count would be 0 or N.
MaskPlan sample_mask_plan(std::span<const double> p_joint, const CoverageGrid& coverage,
                          const MaskingConfig& cfg, std::uint64_t rng_seed,
                          const VisibleSelector& selector = weighted_visible_selector);

// Full per-frame scoring: polar prior (with uniform-over-ROI fallback), HOG,
// and the fused distribution.
ScoreMaps compute_score_maps(const Image& img, const PatchGrid& grid,
                             const CoverageGrid& coverage, const PolarGeometry& geom,
                             const MaskingConfig& cfg);

struct LossOptions {
  // Standardize each original patch (mean/var, eps 1e-6) before comparing.
  bool normalize_target = false;
};

// Mean over masked patches of the squared L2 patch error.
double reconstruction_loss(std::span<const std::vector<double>> predicted,
                           std::span<const std::vector<double>> original,
                           std::span<const std::size_t> masked_set,
                           const LossOptions& opts = {});

}  // namespace usmask
