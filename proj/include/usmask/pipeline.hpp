#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usmask/masking.hpp"
#include "usmask/screening.hpp"
#include "usmask/sector.hpp"

namespace usmask {

struct ManifestEntry {
  std::string id;
  std::string path;
  std::string sequence_id;
  long long frame_index = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  void validate() const;  // throws ConfigError
};

// JSON Lines; relative paths are resolved against the manifest's directory.
Manifest load_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

struct PipelineConfig {
  double threshold_vis = 0.95;
  double threshold_sem = 0.90;
  std::optional<std::string> embedding_file;
  double bg_threshold = 10.0 / 255.0;
  int close_radius = 5;
  std::size_t patch_size = 16;
  std::size_t dct_size = 64;
  int workers = 1;
  MaskingConfig masking;  // tau, mu, sigma, k, lambda, mask_ratio, target_fraction, seed

  RoiParams roi() const { return {bg_threshold, close_radius}; }
  void validate() const;  // throws ConfigError
};

// Applies the keys present in `j` on top of `base`; unknown keys and
// out-of-range values throw ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Everything needed to render one frame's plan file.
struct FramePlan {
  MaskPlan plan;
  CoverageGrid coverage;
  ScoreMaps scores;
  PolarGeometry geometry;
};

// detect_roi (unless `roi` is supplied) -> coverage -> landmarks -> scores -> sample.
FramePlan plan_frame(const UltrasoundFrame& frame, const PipelineConfig& cfg,
                     const RoiMask* roi = nullptr);

// Rounds to 9 significant digits; the shortest round-trip form is then
// emitted by the JSON writer.
double round_sig9(double x);

nlohmann::ordered_json plan_to_json(const FramePlan& fp, const PipelineConfig& cfg);
std::string plan_file_bytes(const FramePlan& fp, const PipelineConfig& cfg);

// Checks a serialized plan for partition/sorting/normalization invariants.
// Returns the list of violations (empty = valid).
std::vector<std::string> verify_plan(const nlohmann::json& plan);

// 8-bit PNG, grid_h x grid_w, pixel = round(255 * v / max v).
void emit_heatmap(std::span<const double> values, std::size_t grid_h, std::size_t grid_w,
                  const std::string& path);
std::vector<std::uint8_t> heatmap_pixels(std::span<const double> values);

struct StageTimings {
  double visual_s = 0, semantic_s = 0, masking_s = 0;
};

struct FrameError {
  std::string id;
  std::string stage;
  std::string message;
};

// CSV `id,stage,message`; messages are quoted with doubled inner quotes.
std::string errors_csv(const std::vector<FrameError>& errors);

struct PipelineSummary {
  std::size_t input_count = 0;
  std::size_t retained_after_visual = 0;
  std::size_t retained_after_semantic = 0;
  std::size_t empty_roi_count = 0;
  std::size_t error_count = 0;
  std::size_t plans_written = 0;
  double threshold_vis = 0, threshold_sem = 0;
  StageTimings elapsed;

  nlohmann::json to_json() const;
};

struct DedupOutcome {
  std::vector<DedupEntry> report;  // manifest order
  std::vector<std::size_t> retained;  // manifest indices, global (sequence, frame) order
  std::vector<FrameError> errors;
  std::size_t retained_after_visual = 0;
  StageTimings elapsed;
};

// Visual then semantic screening over a whole manifest.
DedupOutcome run_dedup(const Manifest& manifest, const PipelineConfig& cfg);

// Writes dedup_report.csv, retained.jsonl, <id>.maskplan.json, errors.csv and
// summary.json into output_dir. Config/manifest problems throw ConfigError;
// frame-level problems are logged and skipped.
PipelineSummary run_pipeline(const Manifest& manifest, const PipelineConfig& cfg,
                             const std::string& output_dir);

}  // namespace usmask
