#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usmask/image.hpp"

namespace usmask {

inline constexpr std::size_t kDctBlock = 8;
inline constexpr std::size_t kStructuralDim = kDctBlock * kDctBlock - 1;  // 63
inline constexpr std::size_t kStubEmbeddingDim = 32;
inline constexpr double kZeroNormEps = 1e-12;

// Low-frequency DCT fingerprint: 8x8 top-left block of the orthonormal
// 2-D DCT-II of the area-resized frame, DC removed, row-major.
using StructuralFeature = std::vector<double>;

struct SemanticEmbedding {
  std::string source_id;
  std::vector<double> values;
  bool degenerate = false;  // zero norm
};

StructuralFeature dct_feature(const Image& img, std::size_t dct_size = 64);
inline StructuralFeature dct_feature(const UltrasoundFrame& f, std::size_t dct_size = 64) {
  return dct_feature(f.pixels, dct_size);
}

// Batch version of dct_feature, parallel over images.
std::vector<StructuralFeature> dct_features(std::span<const Image* const> images,
                                            std::size_t dct_size = 64);

// Orthonormal DCT-II basis rows 0..rows-1 for length n: C[k][x].
std::vector<double> dct_basis(std::size_t rows, std::size_t n);

struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // a zero-norm operand forced the value to 0
};

// Cosine similarity clamped to [-1,1]; 0 with `degenerate` set when either
// norm is below 1e-12. Throws InvalidInput on length mismatch.
Similarity cosine_similarity(std::span<const double> a, std::span<const double> b);

SemanticEmbedding stub_embedding(const UltrasoundFrame& frame, std::size_t dct_size = 64);
SemanticEmbedding stub_embedding_from_feature(std::string id, const StructuralFeature& f);

enum class DropStage { none, visual, semantic };
const char* to_string(DropStage s) noexcept;

struct DedupEntry {
  std::string id;
  DropStage stage_dropped = DropStage::none;
  std::optional<std::string> keeper_id;
  std::optional<double> similarity;
  bool degenerate = false;
};

struct ScreenResult {
  std::vector<std::string> retained;
  std::vector<DedupEntry> entries;  // one per input, in input order
};

enum class VisualMode { last_keeper, all_retained };

// Greedy screen over one sequence (already sorted by frame_index). A frame is
// kept iff its similarity to the comparison keeper(s) is <= threshold.
struct VisualItem {
  std::string id;
  const StructuralFeature* feature;
};
ScreenResult visual_screen(std::span<const VisualItem> items, double threshold_vis,
                           VisualMode mode = VisualMode::last_keeper);
ScreenResult visual_screen(std::span<const UltrasoundFrame> frames, double threshold_vis,
                           std::size_t dct_size = 64,
                           VisualMode mode = VisualMode::last_keeper);

// Greedy kept-set screen: kept iff max similarity to every previously kept
// embedding is <= threshold. Throws InvalidInput on dimension mismatch.
// The kept-set rule over an arbitrary similarity oracle sim(i, j).
ScreenResult greedy_kept_set(std::span<const std::string> ids,
                             const std::function<Similarity(std::size_t, std::size_t)>& sim,
                             double threshold);

ScreenResult semantic_screen(std::span<const SemanticEmbedding> candidates,
                             double threshold_sem);

void write_dedup_report_csv(const std::string& path, std::span<const DedupEntry> entries);
std::string dedup_report_csv(std::span<const DedupEntry> entries);

}  // namespace usmask
