// usmask: frame screening, sector ROI extraction and mask-plan generation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "usmask/error.hpp"
#include "usmask/image.hpp"
#include "usmask/pipeline.hpp"
#include "usmask/sector.hpp"

namespace fs = std::filesystem;
using namespace usmask;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBatch = 1;
constexpr int kExitConfig = 2;

// Config-key flags shared by every subcommand. Only flags actually given
// override the --config file (or the defaults).
struct ConfigFlags {
  std::string config_file;
  double threshold_vis = 0, threshold_sem = 0, bg_threshold = 0, tau = 0, mu = 0, sigma = 0,
         k = 0, lambda = 0, mask_ratio = 0, target_fraction = 0;
  std::string embedding_file;
  int close_radius = 0, workers = 0;
  long long patch_size = 0, dct_size = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, CLI::Option*>> given;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file with defaults")->check(CLI::ExistingFile);
    given = {
        {"threshold_vis", app->add_option("--threshold_vis", threshold_vis)},
        {"threshold_sem", app->add_option("--threshold_sem", threshold_sem)},
        {"embedding_file", app->add_option("--embedding_file", embedding_file)},
        {"bg_threshold", app->add_option("--bg_threshold", bg_threshold)},
        {"close_radius", app->add_option("--close_radius", close_radius)},
        {"tau", app->add_option("--tau", tau)},
        {"mu", app->add_option("--mu", mu)},
        {"sigma", app->add_option("--sigma", sigma)},
        {"k", app->add_option("--k", k)},
        {"lambda", app->add_option("--lambda", lambda)},
        {"mask_ratio", app->add_option("--mask_ratio", mask_ratio)},
        {"target_fraction", app->add_option("--target_fraction", target_fraction)},
        {"patch_size", app->add_option("--patch_size", patch_size)},
        {"dct_size", app->add_option("--dct_size", dct_size)},
        {"workers", app->add_option("--workers", workers)},
        {"seed", app->add_option("--seed", seed)},
    };
  }

  PipelineConfig resolve() const {
    PipelineConfig base = config_file.empty() ? PipelineConfig{} : load_config(config_file);
    nlohmann::json over = nlohmann::json::object();
    for (const auto& [key, opt] : given) {
      if (!opt->count()) continue;
      if (key == "embedding_file") over[key] = embedding_file;
      else if (key == "close_radius") over[key] = close_radius;
      else if (key == "workers") over[key] = workers;
      else if (key == "patch_size") over[key] = patch_size;
      else if (key == "dct_size") over[key] = dct_size;
      else if (key == "seed") over[key] = seed;
      else if (key == "threshold_vis") over[key] = threshold_vis;
      else if (key == "threshold_sem") over[key] = threshold_sem;
      else if (key == "bg_threshold") over[key] = bg_threshold;
      else if (key == "tau") over[key] = tau;
      else if (key == "mu") over[key] = mu;
      else if (key == "sigma") over[key] = sigma;
      else if (key == "k") over[key] = k;
      else if (key == "lambda") over[key] = lambda;
      else if (key == "mask_ratio") over[key] = mask_ratio;
      else if (key == "target_fraction") over[key] = target_fraction;
    }
    return config_from_json(over, base);
  }
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_dedup(const ConfigFlags& flags, const std::string& manifest_path, const std::string& out) {
  const PipelineConfig cfg = flags.resolve();
  const Manifest manifest = load_manifest(manifest_path);
  fs::create_directories(out);
  const DedupOutcome dd = run_dedup(manifest, cfg);
  write_dedup_report_csv((fs::path(out) / "dedup_report.csv").string(), dd.report);
  Manifest kept;
  for (std::size_t i : dd.retained) kept.entries.push_back(manifest.entries[i]);
  write_manifest((fs::path(out) / "retained.jsonl").string(), kept);
  std::ofstream err(fs::path(out) / "errors.csv", std::ios::binary);
  err << errors_csv(dd.errors);
  std::cout << "input " << manifest.entries.size() << ", after visual " << dd.retained_after_visual
            << ", after semantic " << dd.retained.size() << ", errors " << dd.errors.size() << "\n";
  return kExitOk;
}

int cmd_roi(const ConfigFlags& flags, const std::string& input, const std::string& out) {
  const PipelineConfig cfg = flags.resolve();
  const UltrasoundFrame f = load_frame(input, stem_of(input), "", 0);
  const RoiMask roi = detect_roi(f, cfg.roi());
  write_roi_pgm(out, roi);
  std::cout << "roi pixels " << roi.pixel_count << " of " << roi.mask.size() << "\n";
  return kExitOk;
}

int cmd_mask(const ConfigFlags& flags, const std::string& input, std::string id,
             const std::string& roi_path, const std::string& out, const std::string& viz) {
  const PipelineConfig cfg = flags.resolve();
  if (id.empty()) id = stem_of(input);
  const UltrasoundFrame f = load_frame(input, id, "", 0);
  std::optional<RoiMask> roi;
  if (!roi_path.empty()) roi = read_roi_pgm(roi_path);
  const FramePlan fp = plan_frame(f, cfg, roi ? &*roi : nullptr);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw IoError(out, "cannot open for writing");
  os << plan_file_bytes(fp, cfg);
  if (!viz.empty()) {
    fs::create_directories(viz);
    const auto gh = fp.plan.grid_h, gw = fp.plan.grid_w;
    const auto base = fs::path(viz) / id;
    emit_heatmap(fp.coverage.v, gh, gw, base.string() + ".coverage.png");
    emit_heatmap(fp.scores.p_polar, gh, gw, base.string() + ".p_polar.png");
    emit_heatmap(fp.scores.p_hog, gh, gw, base.string() + ".p_hog.png");
    emit_heatmap(fp.scores.p_joint, gh, gw, base.string() + ".p_joint.png");
  }
  for (const auto& w : fp.plan.warnings) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_pipeline(const ConfigFlags& flags, const std::string& manifest_path, const std::string& out) {
  const PipelineConfig cfg = flags.resolve();
  const Manifest manifest = load_manifest(manifest_path);
  const PipelineSummary s = run_pipeline(manifest, cfg, out);
  std::cout << s.to_json().dump(2) << "\n";
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& de : fs::directory_iterator(in))
        if (de.path().string().ends_with(".maskplan.json")) files.push_back(de.path());
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  std::size_t failed = 0;
  for (const auto& p : files) {
    std::vector<std::string> problems;
    try {
      std::ifstream is(p);
      if (!is) throw IoError(p.string(), "cannot open");
      problems = verify_plan(nlohmann::json::parse(is));
    } catch (const std::exception& ex) {
      problems.push_back(ex.what());
    }
    if (problems.empty()) {
      std::cout << "OK   " << p.string() << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << p.string() << "\n";
      for (const auto& pr : problems) std::cout << "     " << pr << "\n";
    }
  }
  std::cout << files.size() - failed << "/" << files.size() << " plan files valid\n";
  return failed ? kExitBatch : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usmask: ultrasound frame screening, sector ROI and mask-plan generation"};
  app.require_subcommand(1);

  ConfigFlags dedup_flags, roi_flags, mask_flags, pipe_flags;
  std::string manifest, out, input, id, roi_path, viz;
  std::vector<std::string> verify_inputs;

  auto* dedup = app.add_subcommand("dedup", "Screen a manifest: report + retained manifest");
  dedup_flags.attach(dedup);
  dedup->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  dedup->add_option("--out", out, "Output directory")->required();

  auto* roi = app.add_subcommand("roi", "Detect the sector ROI of one frame and write a PGM mask");
  roi_flags.attach(roi);
  roi->add_option("--input", input, "PNG or PGM frame")->required();
  roi->add_option("--out", out, "Output PGM mask")->required();

  auto* mask = app.add_subcommand("mask", "Generate a mask plan for one frame");
  mask_flags.attach(mask);
  mask->add_option("--input", input, "PNG or PGM frame")->required();
  mask->add_option("--id", id, "Image id (default: file stem)");
  mask->add_option("--roi", roi_path, "Precomputed ROI mask (PGM/PNG) instead of detection");
  mask->add_option("--out", out, "Output mask-plan JSON")->required();
  mask->add_option("--viz", viz, "Directory for coverage/p_polar/p_hog/p_joint heatmaps");

  auto* pipe = app.add_subcommand("pipeline", "Full run: screen, ROI, mask plans, reports");
  pipe_flags.attach(pipe);
  pipe->add_option("--manifest", manifest, "JSON Lines manifest")->required();
  pipe->add_option("--out", out, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Re-check invariants of mask-plan files");
  verify->add_option("plans", verify_inputs, "Plan files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*dedup) return cmd_dedup(dedup_flags, manifest, out);
    if (*roi) return cmd_roi(roi_flags, input, out);
    if (*mask) return cmd_mask(mask_flags, input, id, roi_path, out, viz);
    if (*pipe) return cmd_pipeline(pipe_flags, manifest, out);
    if (*verify) return cmd_verify(verify_inputs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBatch;
  }
  return kExitOk;
}
