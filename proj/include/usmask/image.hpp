#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace usmask {

// Row-major intensity image. Values are in [0,1] for loaded frames.
class Image {
 public:
  Image() = default;
  Image(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), data_(height * width, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }
  double at(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

  std::span<double> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const double> row(std::size_t y) const {
    return {data_.data() + y * width_, width_};
  }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

struct UltrasoundFrame {
  std::string id;
  std::string sequence_id;
  long long frame_index = 0;
  Image pixels;
};

// BT.601 luma of an 8-bit RGB triple, normalized to [0,1].
double luma(unsigned char r, unsigned char g, unsigned char b) noexcept;

// Loads an 8-bit grayscale/RGB PNG or a binary PGM (P5) and normalizes to [0,1].
UltrasoundFrame load_frame(const std::string& path, std::string id,
                           std::string sequence_id, long long frame_index);

struct ResizeResult {
  Image image;
  bool upsampled = false;  // nearest-neighbour was used on at least one axis
};

// Box (area-averaging) resampling. An axis whose output is larger than its
// input falls back to nearest neighbour and sets `upsampled`.
ResizeResult resize_area(const Image& src, std::size_t out_h, std::size_t out_w);

Image flip_horizontal(const Image& src);

}  // namespace usmask
