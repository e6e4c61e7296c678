#include "usmask/masking.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "usmask/error.hpp"

namespace usmask {
namespace {

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

constexpr int kHogBins = 9;

// Unsigned-orientation histogram of one patch; gradients by central
// differences with replicated border, evaluated against the whole image.
std::array<double, kHogBins> patch_histogram(const Image& img, const PatchRect& r) {
  std::array<double, kHogBins> hist{};
  const std::size_t h = img.height(), w = img.width();
  for (std::size_t y = r.y0; y < r.y1; ++y) {
    const std::size_t yu = y == 0 ? 0 : y - 1, yd = std::min(y + 1, h - 1);
    for (std::size_t x = r.x0; x < r.x1; ++x) {
      const std::size_t xl = x == 0 ? 0 : x - 1, xr = std::min(x + 1, w - 1);
      const double gx = img.at(y, xr) - img.at(y, xl);
      const double gy = img.at(yd, x) - img.at(yu, x);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double deg = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
      if (deg < 0.0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      const int bin = std::min(kHogBins - 1, static_cast<int>(deg / (180.0 / kHogBins)));
      hist[bin] += mag;
    }
  }
  return hist;
}

}  // namespace

void MaskingConfig::validate() const {
  require(std::isfinite(mu) && mu >= 0.0 && mu <= 1.0, "mu must be in [0,1]");
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
  require(std::isfinite(k) && k > 0.0, "k must be > 0");
  require(std::isfinite(tau) && tau >= 0.0 && tau < 1.0, "tau must be in [0,1)");
  require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0,1]");
  require(std::isfinite(mask_ratio) && mask_ratio > 0.0 && mask_ratio < 1.0,
          "mask_ratio must be in (0,1)");
  require(std::isfinite(target_fraction) && target_fraction > 0.0 && target_fraction <= 1.0,
          "target_fraction must be in (0,1]");
}

PolarCoord polar_coords(const PolarGeometry& geom, std::size_t patch_index) {
  const auto m = static_cast<long>(patch_index / geom.grid_w);
  const auto n = static_cast<double>(patch_index % geom.grid_w);
  PolarCoord pc;
  if (geom.m_bottom != geom.m_apex)
    pc.r = clip(double(m - geom.m_apex) / double(geom.m_bottom - geom.m_apex), 0.0, 1.0);
  const bool in_roi = geom.roi_rows[m];
  const double h = in_roi ? geom.half_width[m] : kHalfWidthFloor;
  const double center = geom.use_row_center ? geom.row_center[m] : geom.n_center;
  pc.theta = clip((n - center) / h, -1.0, 1.0);
  return pc;
}

PolarTerms polar_terms(double r, double theta, double v, const MaskingConfig& cfg) {
  PolarTerms t;
  const double d = r - cfg.mu;
  t.f_r = std::exp(-(d * d) / (2.0 * cfg.sigma * cfg.sigma));
  t.g_theta = 1.0 - std::pow(std::abs(theta), cfg.k);
  t.q = clip((v - cfg.tau) / (1.0 - cfg.tau), 0.0, 1.0);
  return t;
}

PolarDistribution polar_distribution(const PolarGeometry& geom, const CoverageGrid& coverage,
                                     const MaskingConfig& cfg) {
  const std::size_t n = coverage.v.size();
  if (geom.grid_h * geom.grid_w != n)
    throw InvalidInput("polar_distribution: geometry and coverage grid sizes differ");
  PolarDistribution pd{std::vector<double>(n), std::vector<double>(n)};
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PolarCoord pc = polar_coords(geom, i);
    const PolarTerms t = polar_terms(pc.r, pc.theta, coverage.v[i], cfg);
    pd.s_polar[i] = t.q * (t.f_r + t.g_theta);
    total += pd.s_polar[i];
  }
  if (!(total > 0.0)) throw DegeneratePrior("polar score sums to zero (all coverage <= tau)");
  for (std::size_t i = 0; i < n; ++i) pd.p_polar[i] = pd.s_polar[i] / total;
  return pd;
}

std::vector<double> hog_scores(const Image& img, const PatchGrid& grid) {
  if (img.height() != grid.image_h() || img.width() != grid.image_w())
    throw InvalidInput("hog_scores: grid does not match image");
  const long n = static_cast<long>(grid.count());
  std::vector<double> s(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto hist = patch_histogram(img, grid.rect(i));
    double ss = 0.0;
    for (double b : hist) ss += b * b;
    s[i] = std::sqrt(ss);
  }
  const double mx = *std::max_element(s.begin(), s.end());
  if (mx > 0.0)
    for (double& v : s) v /= mx;
  else
    std::fill(s.begin(), s.end(), 0.0);
  return s;
}

std::vector<double> hog_distribution(std::span<const double> s_hog) {
  if (s_hog.empty()) return {};
  for (double v : s_hog)
    if (!std::isfinite(v)) throw InvalidInput("hog_distribution: non-finite score");
  const double mx = *std::max_element(s_hog.begin(), s_hog.end());
  std::vector<double> p(s_hog.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(s_hog[i] - mx);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> joint_distribution(std::span<const double> p_hog,
                                       std::span<const double> p_polar, double lambda) {
  if (p_hog.size() != p_polar.size())
    throw InvalidInput("joint_distribution: length mismatch (" + std::to_string(p_hog.size()) +
                       " vs " + std::to_string(p_polar.size()) + ")");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("lambda must be in [0,1]");
  std::vector<double> p(p_hog.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = (1.0 - lambda) * p_hog[i] + lambda * p_polar[i];
  return p;
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t k, Rng& rng) {
  if (k > weights.size()) throw InvalidInput("cannot draw more items than available");
  struct Key {
    bool positive;
    double key;
    std::size_t index;
  };
  std::vector<Key> keys;
  keys.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("sampling weights must be finite and >= 0");
    // One uniform per item, always, so the stream position is input-independent.
    const double gumbel = -std::log(-std::log(rng.uniform_open()));
    keys.push_back(w > 0.0 ? Key{true, std::log(w) + gumbel, i} : Key{false, gumbel, i});
  }
  auto before = [](const Key& a, const Key& b) {
    if (a.positive != b.positive) return a.positive;
    if (a.key != b.key) return a.key > b.key;
    return a.index < b.index;
  };
  std::partial_sort(keys.begin(), keys.begin() + static_cast<long>(k), keys.end(), before);
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keys[i].index;
  return out;
}

std::vector<std::size_t> weighted_visible_selector(std::span<const std::size_t> candidates,
                                                   std::span<const double> p_joint,
                                                   std::size_t n_visible, Rng& rng) {
  std::vector<double> w(candidates.size());
  double total = 0.0;
  for (std::size_t j = 0; j < candidates.size(); ++j) total += (w[j] = p_joint[candidates[j]]);
  if (total > 0.0)
    for (double& x : w) x /= total;
  const auto picks = weighted_sample_without_replacement(w, n_visible, rng);
  std::vector<std::size_t> out(picks.size());
  for (std::size_t j = 0; j < picks.size(); ++j) out[j] = candidates[picks[j]];
  return out;
}

std::size_t visible_count(std::size_t n_patches, double mask_ratio) {
  return static_cast<std::size_t>(std::llround((1.0 - mask_ratio) * double(n_patches)));
}

MaskPlan sample_mask_plan(std::span<const double> p_joint, const CoverageGrid& coverage,
                          const MaskingConfig& cfg, std::uint64_t rng_seed,
                          const VisibleSelector& selector) {
  const std::size_t n = p_joint.size();
  if (coverage.v.size() != n)
    throw InvalidInput("sample_mask_plan: p_joint and coverage lengths differ");
  double total = 0.0;
  for (double p : p_joint) {
    if (!(p >= 0.0)) throw InvalidInput("sample_mask_plan: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("sample_mask_plan: p_joint does not sum to 1");
  const std::size_t n_vis = visible_count(n, cfg.mask_ratio);
  if (n_vis == 0 || n_vis >= n)
    throw InvalidMaskRatio("mask_ratio " + std::to_string(cfg.mask_ratio) + " leaves " +
                           std::to_string(n_vis) + " of " + std::to_string(n) + " patches visible");

  MaskPlan plan;
  plan.grid_h = coverage.grid_h;
  plan.grid_w = coverage.grid_w;
  plan.seed = rng_seed;

  std::vector<std::size_t> cand;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) (coverage.v[i] > cfg.tau ? cand : rest).push_back(i);
  if (cand.size() < n_vis) {
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      return coverage.v[a] > coverage.v[b];
    });
    plan.supplemented.assign(rest.begin(), rest.begin() + long(n_vis - cand.size()));
    std::sort(plan.supplemented.begin(), plan.supplemented.end());
    cand.insert(cand.end(), plan.supplemented.begin(), plan.supplemented.end());
    std::sort(cand.begin(), cand.end());
  }

  Rng rng(rng_seed);
  plan.visible = selector(cand, p_joint, n_vis, rng);
  std::sort(plan.visible.begin(), plan.visible.end());
  std::vector<bool> is_visible(n, false);
  for (std::size_t i : plan.visible) {
    if (i >= n || is_visible[i]) throw InvalidInput("visible selector returned an invalid index set");
    is_visible[i] = true;
  }
  if (plan.visible.size() != n_vis)
    throw InvalidInput("visible selector returned the wrong number of patches");

  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_visible[i]) continue;
    plan.masked.push_back(i);
    if (coverage.v[i] >= cfg.tau) remaining.push_back(i);
  }
  if (remaining.empty()) {
    plan.warnings.push_back("empty_target_set");
  } else {
    const auto want = std::max<long long>(
        1, std::llround(cfg.target_fraction * double(remaining.size())));
    std::vector<double> w(remaining.size());
    double wt = 0.0;
    for (std::size_t j = 0; j < remaining.size(); ++j) wt += (w[j] = p_joint[remaining[j]]);
    if (wt > 0.0)
      for (double& x : w) x /= wt;
    for (std::size_t j : weighted_sample_without_replacement(w, std::size_t(want), rng))
      plan.targets.push_back(remaining[j]);
    std::sort(plan.targets.begin(), plan.targets.end());
  }
  return plan;
}

ScoreMaps compute_score_maps(const Image& img, const PatchGrid& grid,
                             const CoverageGrid& coverage, const PolarGeometry& geom,
                             const MaskingConfig& cfg) {
  const std::size_t n = grid.count();
  ScoreMaps sm;
  sm.r.resize(n);
  sm.theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PolarCoord pc = polar_coords(geom, i);
    sm.r[i] = pc.r;
    sm.theta[i] = pc.theta;
  }
  try {
    auto pd = polar_distribution(geom, coverage, cfg);
    sm.s_polar = std::move(pd.s_polar);
    sm.p_polar = std::move(pd.p_polar);
  } catch (const DegeneratePrior&) {
    sm.polar_fallback = true;
    sm.s_polar.assign(n, 0.0);
    sm.p_polar.assign(n, 0.0);
    std::size_t roi = 0;
    for (double v : coverage.v) roi += v >= cfg.tau ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i)
      if (coverage.v[i] >= cfg.tau) sm.p_polar[i] = 1.0 / double(roi);
  }
  sm.s_hog = hog_scores(img, grid);
  sm.p_hog = hog_distribution(sm.s_hog);
  sm.p_joint = joint_distribution(sm.p_hog, sm.p_polar, cfg.lambda);
  return sm;
}

double reconstruction_loss(std::span<const std::vector<double>> predicted,
                           std::span<const std::vector<double>> original,
                           std::span<const std::size_t> masked_set, const LossOptions& opts) {
  if (masked_set.empty()) throw InvalidInput("reconstruction_loss: empty masked set");
  double total = 0.0;
  for (std::size_t i : masked_set) {
    if (i >= predicted.size() || i >= original.size())
      throw InvalidInput("reconstruction_loss: masked index " + std::to_string(i) + " out of range");
    const auto& p = predicted[i];
    const auto& o = original[i];
    if (p.size() != o.size())
      throw InvalidInput("reconstruction_loss: patch " + std::to_string(i) + " length mismatch");
    double mean = 0.0, scale = 1.0;
    if (opts.normalize_target && !o.empty()) {
      mean = std::accumulate(o.begin(), o.end(), 0.0) / double(o.size());
      double var = 0.0;
      for (double x : o) var += (x - mean) * (x - mean);
      var /= double(o.size());
      scale = 1.0 / std::sqrt(var + 1e-6);
    }
    double ss = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double target = opts.normalize_target ? (o[j] - mean) * scale : o[j];
      const double d = p[j] - target;
      ss += d * d;
    }
    total += ss;
  }
  return total / double(masked_set.size());
}

}  // namespace usmask
