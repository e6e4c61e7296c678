#include "usmask/patch_grid.hpp"

#include <algorithm>

#include "usmask/error.hpp"

namespace usmask {

PatchGrid::PatchGrid(std::size_t image_h, std::size_t image_w, std::size_t patch_size)
    : image_h_(image_h), image_w_(image_w), patch_size_(patch_size) {
  if (patch_size == 0) throw InvalidInput("patch_size must be >= 1");
  if (image_h == 0 || image_w == 0) throw InvalidInput("patch grid over an empty image");
  grid_h_ = (image_h + patch_size - 1) / patch_size;
  grid_w_ = (image_w + patch_size - 1) / patch_size;
}

PatchRect PatchGrid::rect(std::size_t i) const noexcept {
  const std::size_t m = row_of(i), n = col_of(i);
  return {m * patch_size_, std::min((m + 1) * patch_size_, image_h_), n * patch_size_,
          std::min((n + 1) * patch_size_, image_w_)};
}

PatchGrid patchify(const UltrasoundFrame& frame, std::size_t patch_size) {
  return PatchGrid(frame.pixels.height(), frame.pixels.width(), patch_size);
}

std::vector<double> patch_pixels(const Image& img, const PatchGrid& grid, std::size_t i) {
  const PatchRect r = grid.rect(i);
  std::vector<double> out;
  out.reserve(r.area());
  for (std::size_t y = r.y0; y < r.y1; ++y)
    for (std::size_t x = r.x0; x < r.x1; ++x) out.push_back(img.at(y, x));
  return out;
}

}  // namespace usmask
