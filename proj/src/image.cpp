#include "usmask/image.hpp"

#include <algorithm>
#include <cmath>

#include "usmask/error.hpp"
#include "usmask/image_io.hpp"

namespace usmask {
namespace {

// Row-stochastic weight matrix (out x in) for one axis.
struct AxisWeights {
  std::vector<std::size_t> first;  // first contributing source index
  std::vector<std::vector<double>> w;
};

AxisWeights area_weights(std::size_t in, std::size_t out) {
  AxisWeights aw;
  aw.first.resize(out);
  aw.w.resize(out);
  const double scale = double(in) / double(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double lo = double(o) * scale;
    const double hi = double(o + 1) * scale;
    const auto s0 = static_cast<std::size_t>(std::floor(lo));
    const auto s1 = std::min(in, static_cast<std::size_t>(std::ceil(hi)));
    aw.first[o] = s0;
    for (std::size_t s = s0; s < s1; ++s) {
      const double overlap = std::min(hi, double(s + 1)) - std::max(lo, double(s));
      aw.w[o].push_back(overlap / scale);
    }
  }
  return aw;
}

AxisWeights nearest_weights(std::size_t in, std::size_t out) {
  AxisWeights aw;
  aw.first.resize(out);
  aw.w.assign(out, {1.0});
  for (std::size_t o = 0; o < out; ++o) {
    const auto s = static_cast<std::size_t>((double(o) + 0.5) * double(in) / double(out));
    aw.first[o] = std::min(s, in - 1);
  }
  return aw;
}

}  // namespace

double luma(unsigned char r, unsigned char g, unsigned char b) noexcept {
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

UltrasoundFrame load_frame(const std::string& path, std::string id, std::string sequence_id,
                           long long frame_index) {
  const Raster8 raster = read_raster(path);
  if (raster.height == 0 || raster.width == 0)
    throw InvalidInput(path + ": zero-dimension image");
  UltrasoundFrame f{std::move(id), std::move(sequence_id), frame_index,
                    Image(raster.height, raster.width)};
  auto px = f.pixels.pixels();
  if (raster.channels == 1) {
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = raster.data[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = std::min(1.0, luma(raster.data[3 * i], raster.data[3 * i + 1],
                                 raster.data[3 * i + 2]));
  }
  return f;
}

ResizeResult resize_area(const Image& src, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw InvalidInput("resize_area: output size must be >= 1");
  if (src.empty()) throw InvalidInput("resize_area: empty source image");
  const bool up_y = out_h > src.height();
  const bool up_x = out_w > src.width();
  const AxisWeights wy = up_y ? nearest_weights(src.height(), out_h)
                              : area_weights(src.height(), out_h);
  const AxisWeights wx = up_x ? nearest_weights(src.width(), out_w)
                              : area_weights(src.width(), out_w);

  // Horizontal pass then vertical pass.
  Image tmp(src.height(), out_w);
  for (std::size_t y = 0; y < src.height(); ++y) {
    const auto row = src.row(y);
    for (std::size_t o = 0; o < out_w; ++o) {
      double acc = 0.0;
      for (std::size_t j = 0; j < wx.w[o].size(); ++j) acc += wx.w[o][j] * row[wx.first[o] + j];
      tmp.at(y, o) = acc;
    }
  }
  ResizeResult res{Image(out_h, out_w), up_x || up_y};
  for (std::size_t o = 0; o < out_h; ++o) {
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < wy.w[o].size(); ++j) acc += wy.w[o][j] * tmp.at(wy.first[o] + j, x);
      res.image.at(o, x) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return res;
}

Image flip_horizontal(const Image& src) {
  Image out(src.height(), src.width());
  for (std::size_t y = 0; y < src.height(); ++y)
    for (std::size_t x = 0; x < src.width(); ++x) out.at(y, src.width() - 1 - x) = src.at(y, x);
  return out;
}

}  // namespace usmask
