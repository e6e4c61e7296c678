#pragma once

// Serial reference implementations of the OpenMP kernels. Tests hold the
// parallel versions to bit-identical output against these.

#include <cstdint>
#include <span>
#include <vector>

#include "usmask/image.hpp"
#include "usmask/patch_grid.hpp"
#include "usmask/screening.hpp"

namespace usmask::reference {

std::vector<double> hog_scores(const Image& img, const PatchGrid& grid);

std::vector<StructuralFeature> dct_features(std::span<const Image* const> images,
                                            std::size_t dct_size);

// Direct disc-offset loops, no prefix sums.
std::vector<std::uint8_t> dilate_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                      std::size_t w, int radius);
std::vector<std::uint8_t> erode_disc(const std::vector<std::uint8_t>& in, std::size_t h,
                                     std::size_t w, int radius);

}  // namespace usmask
