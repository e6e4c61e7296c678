#include "usmask/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <unordered_map>

#include "usmask/embedding_io.hpp"
#include "usmask/error.hpp"

namespace usmask {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Manifest indices ordered by (sequence_id, frame_index).
std::vector<std::size_t> global_order(const Manifest& m) {
  std::vector<std::size_t> idx(m.entries.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = m.entries[a];
    const auto& eb = m.entries[b];
    if (ea.sequence_id != eb.sequence_id) return ea.sequence_id < eb.sequence_id;
    return ea.frame_index < eb.frame_index;
  });
  return idx;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

std::string errors_csv(const std::vector<FrameError>& errors) {
  std::string s = "id,stage,message\n";
  for (const auto& e : errors) {
    std::string msg = e.message;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::string quoted = "\"";
    for (char c : msg) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    s += e.id + "," + e.stage + "," + quoted + "\"\n";
  }
  return s;
}

nlohmann::json PipelineSummary::to_json() const {
  nlohmann::ordered_json j;
  j["input_count"] = input_count;
  j["retained_after_visual"] = retained_after_visual;
  j["retained_after_semantic"] = retained_after_semantic;
  j["empty_roi_count"] = empty_roi_count;
  j["error_count"] = error_count;
  j["plans_written"] = plans_written;
  j["retained_fraction"] =
      input_count ? round_sig9(double(retained_after_semantic) / double(input_count)) : 0.0;
  j["threshold_vis"] = threshold_vis;
  j["threshold_sem"] = threshold_sem;
  j["elapsed_per_stage"] = {{"visual", elapsed.visual_s},
                            {"semantic", elapsed.semantic_s},
                            {"masking", elapsed.masking_s}};
  return nlohmann::json::parse(j.dump());
}

DedupOutcome run_dedup(const Manifest& manifest, const PipelineConfig& cfg) {
  manifest.validate();
  cfg.validate();
  std::optional<std::unordered_map<std::string, SemanticEmbedding>> provided;
  if (cfg.embedding_file) {
    std::vector<SemanticEmbedding> loaded;
    try {
      loaded = load_embeddings(*cfg.embedding_file);
    } catch (const Error& ex) {
      throw ConfigError(std::string("embedding_file: ") + ex.what());
    }
    provided.emplace();
    for (auto& e : loaded) provided->emplace(e.source_id, std::move(e));
  }

  const std::size_t n = manifest.entries.size();
  DedupOutcome out;
  std::vector<std::optional<DedupEntry>> report(n);
  std::vector<std::optional<FrameError>> load_errors(n);
  std::vector<StructuralFeature> features(n);

  // Stage 1: structural fingerprints (parallel), then greedy per-sequence screen.
  auto t0 = Clock::now();
  const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
  for (long i = 0; i < ln; ++i) {
    const auto& e = manifest.entries[i];
    try {
      const UltrasoundFrame f = load_frame(e.path, e.id, e.sequence_id, e.frame_index);
      features[i] = dct_feature(f.pixels, cfg.dct_size);
    } catch (const std::exception& ex) {
      load_errors[i] = FrameError{e.id, "load", ex.what()};
    }
  }

  const auto order = global_order(manifest);
  std::vector<std::size_t> survivors;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    const auto& seq = manifest.entries[order[start]].sequence_id;
    while (end < order.size() && manifest.entries[order[end]].sequence_id == seq) ++end;
    std::vector<VisualItem> items;
    std::vector<std::size_t> where;
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = order[k];
      if (load_errors[i]) continue;
      items.push_back({manifest.entries[i].id, &features[i]});
      where.push_back(i);
    }
    const ScreenResult vr = visual_screen(items, cfg.threshold_vis);
    for (std::size_t k = 0; k < where.size(); ++k) {
      report[where[k]] = vr.entries[k];
      if (vr.entries[k].stage_dropped == DropStage::none) survivors.push_back(where[k]);
    }
    start = end;
  }
  out.retained_after_visual = survivors.size();
  out.elapsed.visual_s = seconds_since(t0);

  // Stage 2: kept-set semantic screen in global order.
  t0 = Clock::now();
  std::vector<SemanticEmbedding> cands;
  std::vector<std::size_t> cand_idx;
  for (std::size_t i : survivors) {
    const auto& id = manifest.entries[i].id;
    if (provided) {
      auto it = provided->find(id);
      if (it == provided->end()) {
        load_errors[i] = FrameError{id, "semantic", "no embedding for id in embedding_file"};
        report[i].reset();
        continue;
      }
      cands.push_back(it->second);
    } else {
      cands.push_back(stub_embedding_from_feature(id, features[i]));
    }
    cand_idx.push_back(i);
  }
  const ScreenResult sr = semantic_screen(cands, cfg.threshold_sem);
  for (std::size_t k = 0; k < cand_idx.size(); ++k) {
    DedupEntry& e = *report[cand_idx[k]];
    const DedupEntry& s = sr.entries[k];
    e.degenerate = e.degenerate || s.degenerate;
    if (s.stage_dropped != DropStage::none) {
      e.stage_dropped = s.stage_dropped;
      e.keeper_id = s.keeper_id;
      e.similarity = s.similarity;
    } else {
      out.retained.push_back(cand_idx[k]);
    }
  }
  out.elapsed.semantic_s = seconds_since(t0);

  for (std::size_t i = 0; i < n; ++i) {
    if (report[i]) out.report.push_back(*report[i]);
    if (load_errors[i]) out.errors.push_back(*load_errors[i]);
  }
  return out;
}

PipelineSummary run_pipeline(const Manifest& manifest, const PipelineConfig& cfg,
                             const std::string& output_dir) {
  manifest.validate();
  cfg.validate();
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir))
    throw ConfigError(output_dir + ": output directory is not writable");
  const fs::path out_dir(output_dir);

  DedupOutcome dd = run_dedup(manifest, cfg);

  PipelineSummary summary;
  summary.input_count = manifest.entries.size();
  summary.retained_after_visual = dd.retained_after_visual;
  summary.retained_after_semantic = dd.retained.size();
  summary.threshold_vis = cfg.threshold_vis;
  summary.threshold_sem = cfg.threshold_sem;
  summary.elapsed = dd.elapsed;

  // Stage 3: per-frame ROI + masking; each frame owns its RNG substream.
  const auto t0 = Clock::now();
  struct Slot {
    std::string bytes;
    std::optional<FrameError> error;
    bool empty_roi = false;
  };
  std::vector<Slot> slots(dd.retained.size());
  const long nr = static_cast<long>(slots.size());
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
  for (long k = 0; k < nr; ++k) {
    const auto& e = manifest.entries[dd.retained[k]];
    try {
      const UltrasoundFrame f = load_frame(e.path, e.id, e.sequence_id, e.frame_index);
      slots[k].bytes = plan_file_bytes(plan_frame(f, cfg), cfg);
    } catch (const EmptyRoi& ex) {
      slots[k].error = FrameError{e.id, "roi", ex.what()};
      slots[k].empty_roi = true;
    } catch (const std::exception& ex) {
      slots[k].error = FrameError{e.id, "mask", ex.what()};
    }
  }

  std::map<std::string, std::size_t> manifest_pos;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) manifest_pos[manifest.entries[i].id] = i;
  std::vector<FrameError> errors = dd.errors;
  Manifest retained_manifest;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& e = manifest.entries[dd.retained[k]];
    retained_manifest.entries.push_back(e);
    if (slots[k].error) {
      errors.push_back(*slots[k].error);
      summary.empty_roi_count += slots[k].empty_roi ? 1 : 0;
      continue;
    }
    write_text(out_dir / (e.id + ".maskplan.json"), slots[k].bytes);
    ++summary.plans_written;
  }
  summary.elapsed.masking_s = seconds_since(t0);
  std::stable_sort(errors.begin(), errors.end(), [&](const FrameError& a, const FrameError& b) {
    return manifest_pos[a.id] < manifest_pos[b.id];
  });
  summary.error_count = errors.size();

  write_dedup_report_csv((out_dir / "dedup_report.csv").string(), dd.report);
  write_manifest((out_dir / "retained.jsonl").string(), retained_manifest);
  write_text(out_dir / "errors.csv", errors_csv(errors));
  write_text(out_dir / "summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

}  // namespace usmask
