#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "usmask/error.hpp"
#include "usmask/reference.hpp"

namespace usmask::reference {

// Gradients are computed image-wide first, then binned in raster order.
std::vector<double> hog_scores(const Image& img, const PatchGrid& grid) {
  const std::size_t h = img.height(), w = img.width();
  std::vector<double> mag(h * w);
  std::vector<int> bin(h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double gx = img.at(y, std::min(x + 1, w - 1)) - img.at(y, x == 0 ? 0 : x - 1);
      const double gy = img.at(std::min(y + 1, h - 1), x) - img.at(y == 0 ? 0 : y - 1, x);
      mag[y * w + x] = std::sqrt(gx * gx + gy * gy);
      double deg = std::atan2(gy, gx) * (180.0 / std::numbers::pi);
      if (deg < 0.0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      bin[y * w + x] = std::min(8, static_cast<int>(deg / 20.0));
    }
  std::vector<std::array<double, 9>> hist(grid.count());
  for (auto& hh : hist) hh.fill(0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      if (mag[y * w + x] != 0.0) hist[grid.patch_of_pixel(y, x)][bin[y * w + x]] += mag[y * w + x];
  std::vector<double> s(grid.count());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double ss = 0.0;
    for (double b : hist[i]) ss += b * b;
    s[i] = std::sqrt(ss);
  }
  double mx = 0.0;
  for (double v : s) mx = std::max(mx, v);
  for (double& v : s) v = mx > 0.0 ? v / mx : 0.0;
  return s;
}

std::vector<StructuralFeature> dct_features(std::span<const Image* const> images,
                                            std::size_t dct_size) {
  std::vector<StructuralFeature> out;
  out.reserve(images.size());
  for (const Image* img : images) out.push_back(dct_feature(*img, dct_size));
  return out;
}

namespace {
std::vector<std::uint8_t> disc_scan(const std::vector<std::uint8_t>& in, std::size_t h,
                                    std::size_t w, int radius, bool dilate) {
  std::vector<std::uint8_t> out(h * w);
  const long r = radius;
  for (long y = 0; y < long(h); ++y)
    for (long x = 0; x < long(w); ++x) {
      bool result = !dilate;
      for (long dy = -r; dy <= r; ++dy)
        for (long dx = -r; dx <= r; ++dx) {
          if (dy * dy + dx * dx > r * r) continue;
          const long yy = y + dy, xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= long(h) || xx >= long(w)) continue;
          const bool v = in[yy * w + xx] != 0;
          if (dilate && v) result = true;
          if (!dilate && !v) result = false;
        }
      out[y * w + x] = result ? 1 : 0;
    }
  return out;
}
}  // namespace

std::vector<std::uint8_t> dilate_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                      std::size_t w, int radius) {
  return disc_scan(in, h, w, std::max(radius, 0), true);
}

std::vector<std::uint8_t> erode_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                     std::size_t w, int radius) {
  return disc_scan(in, h, w, std::max(radius, 0), false);
}

}  // namespace usmask::reference
