#include "usmask/sector.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "usmask/error.hpp"
#include "usmask/image_io.hpp"

namespace usmask {
namespace {

using Mask = std::vector<std::uint8_t>;

// Per-row inclusive prefix counts of pixels equal to `value`, padded by one.
std::vector<std::size_t> row_prefix(const Mask& in, std::size_t h, std::size_t w,
                                    std::uint8_t value) {
  std::vector<std::size_t> pre(h * (w + 1), 0);
#pragma omp parallel for schedule(static)
  for (long y = 0; y < long(h); ++y) {
    std::size_t* p = pre.data() + y * (w + 1);
    for (std::size_t x = 0; x < w; ++x) p[x + 1] = p[x] + (in[y * w + x] == value ? 1 : 0);
  }
  return pre;
}

std::vector<long> disc_half_widths(int radius) {
  std::vector<long> hw(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy)
    hw[dy + radius] = static_cast<long>(std::floor(std::sqrt(double(radius * radius - dy * dy))));
  return hw;
}

// Output is 1 where the disc window contains any pixel equal to `probe`
// (dilation probes 1s; erosion probes 0s and inverts).
Mask disc_any(const Mask& in, std::size_t h, std::size_t w, int radius, std::uint8_t probe) {
  const auto pre = row_prefix(in, h, w, probe);
  const auto hw = disc_half_widths(radius);
  Mask out(h * w, 0);
#pragma omp parallel for schedule(static)
  for (long y = 0; y < long(h); ++y) {
    for (long x = 0; x < long(w); ++x) {
      bool hit = false;
      for (int dy = -radius; dy <= radius && !hit; ++dy) {
        const long yy = y + dy;
        if (yy < 0 || yy >= long(h)) continue;
        const long x0 = std::max(0L, x - hw[dy + radius]);
        const long x1 = std::min(long(w) - 1, x + hw[dy + radius]);
        const std::size_t* p = pre.data() + yy * (w + 1);
        hit = p[x1 + 1] - p[x0] > 0;
      }
      out[y * w + x] = hit ? 1 : 0;
    }
  }
  return out;
}

// 4-connected labeling; returns labels (0 = background) and component sizes.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> label4(const Mask& in,
                                                                     std::size_t h,
                                                                     std::size_t w) {
  std::vector<std::size_t> labels(h * w, 0);
  std::vector<std::size_t> sizes{0};
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (!in[start] || labels[start]) continue;
    const std::size_t lab = sizes.size();
    std::size_t count = 0;
    stack.push_back(start);
    labels[start] = lab;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const std::size_t y = p / w, x = p % w;
      auto visit = [&](std::size_t q) {
        if (in[q] && !labels[q]) {
          labels[q] = lab;
          stack.push_back(q);
        }
      };
      if (y > 0) visit(p - w);
      if (y + 1 < h) visit(p + w);
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
    }
    sizes.push_back(count);
  }
  return {std::move(labels), std::move(sizes)};
}

}  // namespace

Mask dilate_disc(const Mask& in, std::size_t h, std::size_t w, int radius) {
  if (radius <= 0) return in;
  return disc_any(in, h, w, radius, 1);
}

// Out-of-image pixels count as foreground, so closing never eats the border.
Mask erode_disc(const Mask& in, std::size_t h, std::size_t w, int radius) {
  if (radius <= 0) return in;
  Mask out = disc_any(in, h, w, radius, 0);
  for (auto& v : out) v = v ? 0 : 1;
  return out;
}

Mask largest_component(const Mask& in, std::size_t h, std::size_t w) {
  const auto [labels, sizes] = label4(in, h, w);
  std::size_t best = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l)
    if (sizes[l] > sizes[best]) best = l;
  Mask out(h * w, 0);
  if (best == 0) return out;
  for (std::size_t i = 0; i < h * w; ++i) out[i] = labels[i] == best ? 1 : 0;
  return out;
}

Mask fill_holes(const Mask& in, std::size_t h, std::size_t w) {
  // Background reachable from the border stays background; the rest is filled.
  Mask outside(h * w, 0);
  std::deque<std::size_t> queue;
  auto seed = [&](std::size_t p) {
    if (!in[p] && !outside[p]) {
      outside[p] = 1;
      queue.push_back(p);
    }
  };
  for (std::size_t x = 0; x < w; ++x) {
    seed(x);
    seed((h - 1) * w + x);
  }
  for (std::size_t y = 0; y < h; ++y) {
    seed(y * w);
    seed(y * w + w - 1);
  }
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    const std::size_t y = p / w, x = p % w;
    if (y > 0) seed(p - w);
    if (y + 1 < h) seed(p + w);
    if (x > 0) seed(p - 1);
    if (x + 1 < w) seed(p + 1);
  }
  Mask out(h * w);
  for (std::size_t i = 0; i < h * w; ++i) out[i] = outside[i] ? 0 : 1;
  return out;
}

RoiMask make_roi(std::size_t h, std::size_t w, Mask mask) {
  if (mask.size() != h * w) throw InvalidInput("ROI mask size does not match its dimensions");
  RoiMask roi{h, w, std::move(mask), 0};
  for (auto& v : roi.mask) {
    v = v ? 1 : 0;
    roi.pixel_count += v;
  }
  return roi;
}

RoiMask detect_roi(const Image& img, const RoiParams& params) {
  if (!(params.bg_threshold > 0.0 && params.bg_threshold < 1.0))
    throw InvalidInput("bg_threshold must be in (0,1)");
  if (params.close_radius < 0) throw InvalidInput("close_radius must be >= 0");
  const std::size_t h = img.height(), w = img.width();
  Mask fg(h * w);
  bool any = false;
  auto px = img.pixels();
  for (std::size_t i = 0; i < fg.size(); ++i) {
    fg[i] = px[i] > params.bg_threshold ? 1 : 0;
    any = any || fg[i];
  }
  if (!any) throw EmptyRoi("no foreground pixels above bg_threshold");
  Mask closed = erode_disc(dilate_disc(fg, h, w, params.close_radius), h, w, params.close_radius);
  return make_roi(h, w, fill_holes(largest_component(closed, h, w), h, w));
}

CoverageGrid patch_coverage(const RoiMask& roi, const PatchGrid& grid) {
  if (roi.height != grid.image_h() || roi.width != grid.image_w())
    throw InvalidInput("ROI mask dimensions do not match the patch grid's image");
  const std::size_t n = grid.count();
  CoverageGrid cov{grid.grid_h(), grid.grid_w(), std::vector<double>(n),
                   std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n)};
  for (std::size_t y = 0; y < roi.height; ++y)
    for (std::size_t x = 0; x < roi.width; ++x)
      cov.inside[grid.patch_of_pixel(y, x)] += roi.at(y, x);
  for (std::size_t i = 0; i < n; ++i) {
    cov.patch_area[i] = grid.rect(i).area();
    cov.v[i] = double(cov.inside[i]) / double(cov.patch_area[i]);
  }
  return cov;
}

PolarGeometry polar_landmarks(const CoverageGrid& coverage, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) throw InvalidInput("tau must be in [0,1)");
  const std::size_t gh = coverage.grid_h, gw = coverage.grid_w;
  Mask roi(gh * gw);
  for (std::size_t i = 0; i < roi.size(); ++i) roi[i] = coverage.v[i] >= tau ? 1 : 0;
  const Mask comp = largest_component(roi, gh, gw);

  PolarGeometry g;
  g.grid_h = gh;
  g.grid_w = gw;
  g.half_width.assign(gh, kHalfWidthFloor);
  g.row_center.assign(gh, 0.0);
  g.roi_rows.assign(gh, false);

  long apex = -1, bottom = -1;
  double center_sum = 0.0;
  std::size_t rows = 0;
  for (std::size_t m = 0; m < gh; ++m) {
    long left = -1, right = -1;
    for (std::size_t n = 0; n < gw; ++n) {
      if (!comp[m * gw + n]) continue;
      if (left < 0) left = long(n);
      right = long(n);
      ++g.roi_patch_count;
    }
    if (left < 0) continue;
    if (apex < 0) apex = long(m);
    bottom = long(m);
    g.roi_rows[m] = true;
    g.half_width[m] = std::max(kHalfWidthFloor, double(right - left) / 2.0);
    g.row_center[m] = double(left + right) / 2.0;
    center_sum += g.row_center[m];
    ++rows;
  }
  if (rows == 0) throw EmptyRoi("no patch reaches the coverage threshold");
  g.m_apex = apex;
  g.m_bottom = bottom;
  g.n_center = center_sum / double(rows);
  for (std::size_t m = 0; m < gh; ++m)
    if (!g.roi_rows[m]) g.row_center[m] = g.n_center;
  return g;
}

void write_roi_pgm(const std::string& path, const RoiMask& roi) {
  std::vector<std::uint8_t> gray(roi.mask.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = roi.mask[i] ? 255 : 0;
  write_pgm(path, roi.height, roi.width, gray);
}

RoiMask read_roi_pgm(const std::string& path) {
  Raster8 r = read_raster(path);
  if (r.channels != 1) throw InvalidInput(path + ": ROI mask must be single-channel");
  return make_roi(r.height, r.width, std::move(r.data));
}

}  // namespace usmask
