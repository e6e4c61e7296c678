#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usmask/image.hpp"

namespace usmask {

// Raw 8-bit raster as decoded from disk (1 or 3 channels, interleaved).
struct Raster8 {
  std::size_t height = 0;
  std::size_t width = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;
};

Raster8 read_raster(const std::string& path);

void write_pgm(const std::string& path, std::size_t height, std::size_t width,
               const std::vector<std::uint8_t>& gray);
void write_png_gray(const std::string& path, std::size_t height, std::size_t width,
                    const std::vector<std::uint8_t>& gray);

// Quantizes a [0,1] image to 8 bits (round-to-nearest).
std::vector<std::uint8_t> to_gray8(const Image& img);

}  // namespace usmask
