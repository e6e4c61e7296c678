// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "usmask/masking.hpp"
#include "usmask/reference.hpp"
#include "usmask/screening.hpp"
#include "usmask/sector.hpp"

namespace {

using namespace usmask;

Image noise_image(std::size_t side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(side, side);
  for (double& x : img.pixels()) x = u(rng);
  return img;
}

std::vector<std::uint8_t> disc_field(std::size_t side) {
  std::vector<std::uint8_t> m(side * side, 0);
  const double c = side / 2.0;
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x)
      m[y * side + x] = std::hypot(y - c, x - c) < side * 0.4 && (x / 7 + y / 5) % 9 != 0;
  return m;
}

void BM_Hog(benchmark::State& st) {
  const auto side = std::size_t(st.range(0));
  const Image img = noise_image(side, 1);
  const PatchGrid grid(side, side, 16);
  for (auto _ : st) benchmark::DoNotOptimize(hog_scores(img, grid));
}

void BM_HogSerial(benchmark::State& st) {
  const auto side = std::size_t(st.range(0));
  const Image img = noise_image(side, 1);
  const PatchGrid grid(side, side, 16);
  for (auto _ : st) benchmark::DoNotOptimize(reference::hog_scores(img, grid));
}

std::vector<Image> batch(std::size_t n) {
  std::vector<Image> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(noise_image(256, i));
  return v;
}

void BM_Dct(benchmark::State& st) {
  const auto imgs = batch(std::size_t(st.range(0)));
  std::vector<const Image*> ptrs;
  for (const auto& i : imgs) ptrs.push_back(&i);
  for (auto _ : st) benchmark::DoNotOptimize(dct_features(ptrs, 64));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_DctSerial(benchmark::State& st) {
  const auto imgs = batch(std::size_t(st.range(0)));
  std::vector<const Image*> ptrs;
  for (const auto& i : imgs) ptrs.push_back(&i);
  for (auto _ : st) benchmark::DoNotOptimize(reference::dct_features(ptrs, 64));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_Closing(benchmark::State& st) {
  const auto side = std::size_t(st.range(0));
  const auto m = disc_field(side);
  for (auto _ : st) benchmark::DoNotOptimize(erode_disc(dilate_disc(m, side, side, 5), side, side, 5));
}

void BM_ClosingSerial(benchmark::State& st) {
  const auto side = std::size_t(st.range(0));
  const auto m = disc_field(side);
  for (auto _ : st)
    benchmark::DoNotOptimize(
        reference::erode_disc(reference::dilate_disc(m, side, side, 5), side, side, 5));
}

}  // namespace

BENCHMARK(BM_Hog)->Arg(224)->Arg(512);
BENCHMARK(BM_HogSerial)->Arg(224)->Arg(512);
BENCHMARK(BM_Dct)->Arg(64);
BENCHMARK(BM_DctSerial)->Arg(64);
BENCHMARK(BM_Closing)->Arg(224)->Arg(512);
BENCHMARK(BM_ClosingSerial)->Arg(224)->Arg(512);

BENCHMARK_MAIN();
