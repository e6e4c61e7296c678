#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "usmask/image.hpp"
#include "usmask/patch_grid.hpp"

namespace usmask {

inline constexpr double kHalfWidthFloor = 0.5;

// Binary sector mask, same shape as the source frame.
struct RoiMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> mask;  // 0 or 1, row-major
  std::size_t pixel_count = 0;

  std::uint8_t at(std::size_t y, std::size_t x) const { return mask[y * width + x]; }
};

struct CoverageGrid {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::vector<double> v;                   // per patch, in [0,1]
  std::vector<std::size_t> inside;         // ROI pixel count per patch
  std::vector<std::size_t> patch_area;     // |P_i|
};

struct PolarGeometry {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  long m_apex = 0;
  long m_bottom = 0;
  double n_center = 0.0;
  std::vector<double> half_width;   // per grid row; floor for rows outside the ROI
  std::vector<double> row_center;   // per-row midpoint; n_center outside the ROI
  std::vector<bool> roi_rows;
  std::size_t roi_patch_count = 0;  // patches in the landmark component
  bool use_row_center = false;
};

struct RoiParams {
  double bg_threshold = 10.0 / 255.0;
  int close_radius = 5;
};

// Threshold, disc closing, largest 4-connected component, hole fill.
// Throws EmptyRoi when nothing survives.
RoiMask detect_roi(const Image& img, const RoiParams& params = {});
inline RoiMask detect_roi(const UltrasoundFrame& f, const RoiParams& params = {}) {
  return detect_roi(f.pixels, params);
}

// Binary morphology building blocks (parallel kernels).
std::vector<std::uint8_t> dilate_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                      std::size_t w, int radius);
std::vector<std::uint8_t> erode_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                     std::size_t w, int radius);
// Keeps the largest 4-connected component (ties: first in scan order).
std::vector<std::uint8_t> largest_component(const std::vector<std::uint8_t>& in,
                                            std::size_t h, std::size_t w);
std::vector<std::uint8_t> fill_holes(const std::vector<std::uint8_t>& in, std::size_t h,
                                     std::size_t w);

RoiMask make_roi(std::size_t h, std::size_t w, std::vector<std::uint8_t> mask);

CoverageGrid patch_coverage(const RoiMask& roi, const PatchGrid& grid);

// ROI patches are v >= tau, restricted to the largest 4-connected patch
// component. Throws EmptyRoi if none.
PolarGeometry polar_landmarks(const CoverageGrid& coverage, double tau);

void write_roi_pgm(const std::string& path, const RoiMask& roi);
RoiMask read_roi_pgm(const std::string& path);

}  // namespace usmask
