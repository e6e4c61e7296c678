#pragma once

#include <cstddef>
#include <vector>

#include "usmask/image.hpp"

namespace usmask {

struct PatchRect {
  std::size_t y0, y1;  // [y0, y1)
  std::size_t x0, x1;  // [x0, x1)
  std::size_t area() const noexcept { return (y1 - y0) * (x1 - x0); }
};

// Non-overlapping P x P tiling with ceil-sized grid; edge patches may be
// partial. Patch i sits at row i / grid_w, column i % grid_w.
class PatchGrid {
 public:
  PatchGrid(std::size_t image_h, std::size_t image_w, std::size_t patch_size);

  std::size_t patch_size() const noexcept { return patch_size_; }
  std::size_t grid_h() const noexcept { return grid_h_; }
  std::size_t grid_w() const noexcept { return grid_w_; }
  std::size_t count() const noexcept { return grid_h_ * grid_w_; }
  std::size_t image_h() const noexcept { return image_h_; }
  std::size_t image_w() const noexcept { return image_w_; }

  std::size_t row_of(std::size_t i) const noexcept { return i / grid_w_; }
  std::size_t col_of(std::size_t i) const noexcept { return i % grid_w_; }
  std::size_t index(std::size_t m, std::size_t n) const noexcept { return m * grid_w_ + n; }
  std::size_t patch_of_pixel(std::size_t y, std::size_t x) const noexcept {
    return index(y / patch_size_, x / patch_size_);
  }

  PatchRect rect(std::size_t i) const noexcept;

 private:
  std::size_t image_h_, image_w_, patch_size_, grid_h_, grid_w_;
};

PatchGrid patchify(const UltrasoundFrame& frame, std::size_t patch_size);

// Pixel values of patch i in row-major order within the patch.
std::vector<double> patch_pixels(const Image& img, const PatchGrid& grid, std::size_t i);

}  // namespace usmask
