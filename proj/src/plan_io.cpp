#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "usmask/error.hpp"
#include "usmask/image_io.hpp"
#include "usmask/pipeline.hpp"

namespace usmask {

FramePlan plan_frame(const UltrasoundFrame& frame, const PipelineConfig& cfg,
                     const RoiMask* roi) {
  const PatchGrid grid = patchify(frame, cfg.patch_size);
  const RoiMask detected = roi ? RoiMask{} : detect_roi(frame, cfg.roi());
  const RoiMask& mask = roi ? *roi : detected;
  FramePlan fp;
  fp.coverage = patch_coverage(mask, grid);
  fp.geometry = polar_landmarks(fp.coverage, cfg.masking.tau);
  fp.scores = compute_score_maps(frame.pixels, grid, fp.coverage, fp.geometry, cfg.masking);
  fp.plan = sample_mask_plan(fp.scores.p_joint, fp.coverage, cfg.masking,
                             substream_seed(cfg.masking.seed, frame.id));
  fp.plan.image_id = frame.id;
  fp.plan.patch_size = cfg.patch_size;
  if (fp.scores.polar_fallback)
    fp.plan.warnings.insert(fp.plan.warnings.begin(), "degenerate_polar_prior");
  return fp;
}

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::ordered_json plan_to_json(const FramePlan& fp, const PipelineConfig& cfg) {
  auto rounded = [](const std::vector<double>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (double x : v) a.push_back(round_sig9(x));
    return a;
  };
  const MaskingConfig& m = cfg.masking;
  nlohmann::ordered_json j;
  j["image_id"] = fp.plan.image_id;
  j["grid_h"] = fp.plan.grid_h;
  j["grid_w"] = fp.plan.grid_w;
  j["patch_size"] = fp.plan.patch_size;
  j["visible"] = fp.plan.visible;
  j["masked"] = fp.plan.masked;
  j["targets"] = fp.plan.targets;
  j["supplemented"] = fp.plan.supplemented;
  j["coverage"] = rounded(fp.coverage.v);
  j["p_joint"] = rounded(fp.scores.p_joint);
  j["config"] = {{"bg_threshold", round_sig9(cfg.bg_threshold)},
                 {"close_radius", cfg.close_radius},
                 {"tau", m.tau},
                 {"mu", m.mu},
                 {"sigma", m.sigma},
                 {"k", m.k},
                 {"lambda", m.lambda},
                 {"mask_ratio", m.mask_ratio},
                 {"target_fraction", m.target_fraction},
                 {"patch_size", cfg.patch_size},
                 {"seed", m.seed}};
  j["seed"] = fp.plan.seed;
  j["warnings"] = fp.plan.warnings;
  return j;
}

namespace {

// Compact writer; floats use std::to_chars, which is guaranteed shortest
// round-trip (the JSON library's own printer is not always shortest, so a
// 9-digit value could come out with 17).
void write_compact(const nlohmann::ordered_json& j, std::string& out) {
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(k).dump();
        out += ':';
        write_compact(v, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_compact(j[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        break;
      }
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, x);
      std::string s(buf, res.ptr);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      out += s;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string plan_file_bytes(const FramePlan& fp, const PipelineConfig& cfg) {
  std::string out;
  write_compact(plan_to_json(fp, cfg), out);
  out += '\n';
  return out;
}

std::vector<std::string> verify_plan(const nlohmann::json& plan) {
  std::vector<std::string> bad;
  auto fail = [&](std::string s) { bad.push_back(std::move(s)); };
  try {
    const auto gh = plan.at("grid_h").get<std::size_t>();
    const auto gw = plan.at("grid_w").get<std::size_t>();
    const std::size_t n = gh * gw;
    if (n == 0) fail("empty grid");
    if (plan.at("patch_size").get<long long>() < 1) fail("patch_size < 1");
    plan.at("image_id").get<std::string>();
    plan.at("seed").get<std::uint64_t>();

    auto index_set = [&](const char* key) {
      const auto v = plan.at(key).get<std::vector<long long>>();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0 || std::size_t(v[i]) >= n) {
          fail(std::string(key) + ": index out of range");
          break;
        }
        if (i > 0 && v[i] <= v[i - 1]) {
          fail(std::string(key) + ": not strictly ascending");
          break;
        }
      }
      return v;
    };
    const auto visible = index_set("visible");
    const auto masked = index_set("masked");
    const auto targets = index_set("targets");
    const auto supplemented = index_set("supplemented");
    const auto coverage = plan.at("coverage").get<std::vector<double>>();
    const auto p = plan.at("p_joint").get<std::vector<double>>();
    const auto& cfg = plan.at("config");
    const double tau = cfg.at("tau").get<double>();
    const double mask_ratio = cfg.at("mask_ratio").get<double>();
    if (!bad.empty()) return bad;

    if (coverage.size() != n) fail("coverage length != grid_h*grid_w");
    if (p.size() != n) fail("p_joint length != grid_h*grid_w");
    if (!bad.empty()) return bad;

    std::vector<int> seen(n, 0);
    for (auto i : visible) seen[i] |= 1;
    for (auto i : masked) seen[i] |= 2;
    for (std::size_t i = 0; i < n; ++i) {
      if (seen[i] == 3) fail("patch " + std::to_string(i) + " is both visible and masked");
      if (seen[i] == 0) fail("patch " + std::to_string(i) + " is neither visible nor masked");
    }
    for (auto i : targets)
      if (!(seen[i] & 2)) fail("target " + std::to_string(i) + " is not masked");
    if (visible.size() != visible_count(n, mask_ratio))
      fail("visible count " + std::to_string(visible.size()) + " != round((1-mask_ratio)*N)");

    // Serialized values carry 9 significant digits.
    constexpr double kSlack = 1e-8;
    double total = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) fail("negative or NaN probability in p_joint");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-6) fail("p_joint sums to " + std::to_string(total));
    for (double v : coverage)
      if (!(v >= 0.0 && v <= 1.0)) fail("coverage value outside [0,1]");
    for (auto i : targets)
      if (coverage[i] < tau - kSlack) fail("target " + std::to_string(i) + " lies outside the ROI");
    for (auto i : supplemented)
      if (coverage[i] > tau + kSlack) fail("supplemented patch " + std::to_string(i) + " is an ROI candidate");
    for (auto i : visible)
      if (coverage[i] <= tau - kSlack &&
          !std::binary_search(supplemented.begin(), supplemented.end(), i))
        fail("visible patch " + std::to_string(i) + " is neither a candidate nor supplemented");
  } catch (const nlohmann::json::exception& ex) {
    fail(std::string("schema: ") + ex.what());
  }
  return bad;
}

std::vector<std::uint8_t> heatmap_pixels(std::span<const double> values) {
  double mx = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("emit_heatmap: non-finite value");
    mx = std::max(mx, v);
  }
  std::vector<std::uint8_t> px(values.size(), 0);
  if (mx <= 0.0) return px;
  for (std::size_t i = 0; i < px.size(); ++i)
    px[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::max(0.0, values[i]) / mx));
  return px;
}

void emit_heatmap(std::span<const double> values, std::size_t grid_h, std::size_t grid_w,
                  const std::string& path) {
  if (values.size() != grid_h * grid_w) throw InvalidInput("emit_heatmap: value count != grid size");
  write_png_gray(path, grid_h, grid_w, heatmap_pixels(values));
}

}  // namespace usmask
