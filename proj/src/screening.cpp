#include "usmask/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "usmask/error.hpp"

namespace usmask {

std::vector<double> dct_basis(std::size_t rows, std::size_t n) {
  std::vector<double> c(rows * n);
  const double a0 = std::sqrt(1.0 / double(n));
  const double ak = std::sqrt(2.0 / double(n));
  for (std::size_t k = 0; k < rows; ++k)
    for (std::size_t x = 0; x < n; ++x)
      c[k * n + x] = (k == 0 ? a0 : ak) *
                     std::cos(std::numbers::pi * double(2 * x + 1) * double(k) / double(2 * n));
  return c;
}

StructuralFeature dct_feature(const Image& img, std::size_t dct_size) {
  if (dct_size < kDctBlock) throw InvalidInput("dct_size must be >= 8");
  const Image canon = resize_area(img, dct_size, dct_size).image;
  const std::size_t n = dct_size;
  const std::vector<double> c = dct_basis(kDctBlock, n);

  // rows = C8 * X  (8 x n)
  std::vector<double> rows(kDctBlock * n, 0.0);
  for (std::size_t u = 0; u < kDctBlock; ++u)
    for (std::size_t y = 0; y < n; ++y) {
      const double cu = c[u * n + y];
      const auto src = canon.row(y);
      for (std::size_t x = 0; x < n; ++x) rows[u * n + x] += cu * src[x];
    }

  StructuralFeature f;
  f.reserve(kStructuralDim);
  for (std::size_t u = 0; u < kDctBlock; ++u)
    for (std::size_t v = 0; v < kDctBlock; ++v) {
      if (u == 0 && v == 0) continue;
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += rows[u * n + x] * c[v * n + x];
      f.push_back(acc);
    }
  return f;
}

std::vector<StructuralFeature> dct_features(std::span<const Image* const> images,
                                            std::size_t dct_size) {
  std::vector<StructuralFeature> out(images.size());
  const long n = static_cast<long>(images.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[i] = dct_feature(*images[i], dct_size);
  return out;
}

Similarity cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidInput("cosine_similarity: length mismatch (" + std::to_string(a.size()) +
                       " vs " + std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kZeroNormEps || nb < kZeroNormEps) return {0.0, true};
  return {std::clamp(dot / (na * nb), -1.0, 1.0), false};
}

SemanticEmbedding stub_embedding_from_feature(std::string id, const StructuralFeature& f) {
  SemanticEmbedding e{std::move(id), std::vector<double>(kStubEmbeddingDim, 0.0), false};
  std::copy_n(f.begin(), std::min(f.size(), kStubEmbeddingDim), e.values.begin());
  double norm = 0.0;
  for (double x : e.values) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < kZeroNormEps) {
    std::fill(e.values.begin(), e.values.end(), 0.0);
    e.degenerate = true;
    return e;
  }
  for (double& x : e.values) x /= norm;
  return e;
}

SemanticEmbedding stub_embedding(const UltrasoundFrame& frame, std::size_t dct_size) {
  return stub_embedding_from_feature(frame.id, dct_feature(frame.pixels, dct_size));
}

const char* to_string(DropStage s) noexcept {
  switch (s) {
    case DropStage::none: return "none";
    case DropStage::visual: return "visual";
    case DropStage::semantic: return "semantic";
  }
  return "none";
}

ScreenResult visual_screen(std::span<const VisualItem> items, double threshold_vis,
                           VisualMode mode) {
  if (!(threshold_vis > 0.0 && threshold_vis <= 1.0))
    throw InvalidInput("threshold_vis must be in (0,1]");
  ScreenResult res;
  std::vector<std::size_t> kept;  // indices into items
  for (std::size_t i = 0; i < items.size(); ++i) {
    DedupEntry e;
    e.id = items[i].id;
    if (kept.empty()) {
      kept.push_back(i);
      res.retained.push_back(items[i].id);
      res.entries.push_back(std::move(e));
      continue;
    }
    std::size_t keeper = kept.back();
    Similarity best = cosine_similarity(*items[i].feature, *items[keeper].feature);
    if (mode == VisualMode::all_retained) {
      for (std::size_t j : kept) {
        const Similarity s = cosine_similarity(*items[i].feature, *items[j].feature);
        if (s.value > best.value) {
          best = s;
          keeper = j;
        }
      }
    }
    e.degenerate = best.degenerate;
    if (best.value <= threshold_vis) {
      kept.push_back(i);
      res.retained.push_back(items[i].id);
    } else {
      e.stage_dropped = DropStage::visual;
      e.keeper_id = items[keeper].id;
      e.similarity = best.value;
    }
    res.entries.push_back(std::move(e));
  }
  return res;
}

ScreenResult visual_screen(std::span<const UltrasoundFrame> frames, double threshold_vis,
                           std::size_t dct_size, VisualMode mode) {
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].frame_index < frames[i - 1].frame_index)
      throw InvalidInput("visual_screen: frames must be sorted by frame_index");
  std::vector<const Image*> imgs;
  imgs.reserve(frames.size());
  for (const auto& f : frames) imgs.push_back(&f.pixels);
  const auto feats = dct_features(imgs, dct_size);
  std::vector<VisualItem> items;
  items.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) items.push_back({frames[i].id, &feats[i]});
  return visual_screen(items, threshold_vis, mode);
}

ScreenResult semantic_screen(std::span<const SemanticEmbedding> candidates,
                             double threshold_sem) {
  if (!(threshold_sem > 0.0 && threshold_sem <= 1.0))
    throw InvalidInput("threshold_sem must be in (0,1]");
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].values.size() != candidates[0].values.size())
      throw InvalidInput("embedding length mismatch: '" + candidates[0].source_id + "' has " +
                         std::to_string(candidates[0].values.size()) + ", '" +
                         candidates[i].source_id + "' has " +
                         std::to_string(candidates[i].values.size()));
  std::vector<std::string> ids;
  ids.reserve(candidates.size());
  for (const auto& c : candidates) ids.push_back(c.source_id);
  ScreenResult res = greedy_kept_set(
      ids,
      [&](std::size_t i, std::size_t j) {
        return cosine_similarity(candidates[i].values, candidates[j].values);
      },
      threshold_sem);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    res.entries[i].degenerate = res.entries[i].degenerate || candidates[i].degenerate;
  return res;
}

ScreenResult greedy_kept_set(std::span<const std::string> ids,
                             const std::function<Similarity(std::size_t, std::size_t)>& sim,
                             double threshold) {
  ScreenResult res;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    DedupEntry e;
    e.id = ids[i];
    std::optional<std::size_t> keeper;
    double best = -2.0;
    for (std::size_t j : kept) {
      const Similarity s = sim(i, j);
      e.degenerate = e.degenerate || s.degenerate;
      if (s.value > best) {
        best = s.value;
        keeper = j;
      }
    }
    if (!keeper || best <= threshold) {
      kept.push_back(i);
      res.retained.push_back(ids[i]);
    } else {
      e.stage_dropped = DropStage::semantic;
      e.keeper_id = ids[*keeper];
      e.similarity = best;
    }
    res.entries.push_back(std::move(e));
  }
  return res;
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

std::string dedup_report_csv(std::span<const DedupEntry> entries) {
  std::ostringstream os;
  os << "id,stage_dropped,keeper_id,similarity\n";
  char buf[64];
  for (const auto& e : entries) {
    os << csv_field(e.id) << ',' << to_string(e.stage_dropped) << ',';
    if (e.keeper_id) os << csv_field(*e.keeper_id);
    os << ',';
    if (e.similarity) {
      std::snprintf(buf, sizeof buf, "%.6f", *e.similarity);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void write_dedup_report_csv(const std::string& path, std::span<const DedupEntry> entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  out << dedup_report_csv(entries);
}

}  // namespace usmask
