// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "support/corpus.hpp"
#include "support/fixtures.hpp"
#include "support/synth.hpp"
#include "usmask/error.hpp"
#include "usmask/masking.hpp"
#include "usmask/pipeline.hpp"
#include "usmask/screening.hpp"
#include "usmask/sector.hpp"

using namespace usmask;
namespace ut = usmask::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o = {false, std::string("exception: ") + ex.what()};
  }
  const double dt = seconds_since(t0);
  if (budget_s > 0 && dt >= budget_s) {
    o.ok = false;
    o.detail += " (over budget " + std::to_string(int(budget_s)) + " s)";
  }
  if (!o.ok) ++failures;
  std::printf("%s  %-22s %8.2f s  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), dt, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every manifest id must be in exactly one of: plan file, dropped report row, error row.
bool accounting_holds(const Manifest& m, const fs::path& out) {
  std::map<std::string, int> seen;
  for (const auto& e : m.entries) seen[e.id] = 0;
  for (const auto& e : m.entries)
    if (fs::exists(out / (e.id + ".maskplan.json"))) ++seen[e.id];
  std::istringstream rep(slurp(out / "dedup_report.csv"));
  std::string line;
  std::getline(rep, line);
  while (std::getline(rep, line)) {
    const auto c = line.find(',');
    if (line.compare(c + 1, 5, "none,") != 0) ++seen[line.substr(0, c)];
  }
  std::istringstream err(slurp(out / "errors.csv"));
  std::getline(err, line);
  while (std::getline(err, line)) ++seen[line.substr(0, line.find(','))];
  for (const auto& [id, n] : seen)
    if (n != 1) return false;
  return seen.size() == m.entries.size();
}

double max_abs_sum_error(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) s += x;
  return std::abs(s - 1.0);
}

}  // namespace

int main() {
  const auto start = Clock::now();

  criterion("distributions", 10.0, [] {
    double worst = 0.0;
    std::size_t negatives = 0, gate_violations = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto fx = ut::random_masking_fixture(1000 + s);
      const auto pd = polar_distribution(fx.geometry, fx.coverage, fx.cfg);
      const auto sm = compute_score_maps(fx.image, fx.grid, fx.coverage, fx.geometry, fx.cfg);
      for (const auto* p : {&pd.p_polar, &sm.p_polar, &sm.p_hog, &sm.p_joint}) {
        worst = std::max(worst, max_abs_sum_error(*p));
        for (double x : *p) negatives += x < 0.0;
      }
      for (std::size_t i = 0; i < fx.coverage.v.size(); ++i)
        if (fx.coverage.v[i] <= fx.cfg.tau && pd.s_polar[i] != 0.0) ++gate_violations;
    }
    return Outcome{worst < 1e-9 && negatives == 0 && gate_violations == 0,
                   "max |sum-1| " + fmt("%.2e", worst) + ", negatives " +
                       std::to_string(negatives) + ", gate violations " +
                       std::to_string(gate_violations)};
  });

  criterion("sampling fidelity", 60.0, [] {
    const auto fx = ut::random_masking_fixture(7);
    const auto sm = compute_score_maps(fx.image, fx.grid, fx.coverage, fx.geometry, fx.cfg);
    const std::size_t n = sm.p_joint.size();
    const std::size_t k = visible_count(n, 0.75);
    const int draws = 200000;
    std::vector<double> first(n, 0.0);
    for (int d = 0; d < draws; ++d) {
      Rng rng(substream_seed(fx.cfg.seed, "draw" + std::to_string(d)));
      first[weighted_sample_without_replacement(sm.p_joint, k, rng).front()] += 1.0;
    }
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(first[i] / draws - sm.p_joint[i]));
    return Outcome{n == 196 && dev < 0.005,
                   std::to_string(n) + " patches, max deviation " + fmt("%.5f", dev)};
  });

  criterion("closed-form checks", 0, [] {
    MaskingConfig cfg;
    const double f = polar_terms(0.75, 0.0, 1.0, cfg).f_r;
    const std::vector<double> z{0.0, 1.0};
    const auto sm = hog_distribution(z);
    std::vector<std::vector<double>> pred{{0.5, 0.5}, {1.0, std::sqrt(0.5)}};
    std::vector<std::vector<double>> orig{{0.0, 0.0}, {0.0, 0.0}};
    const std::vector<std::size_t> m{0, 1};
    const double loss = reconstruction_loss(pred, orig, m);
    const bool ok = std::abs(f - std::exp(-0.5)) < 1e-9 && std::abs(sm[0] - 0.268941) < 1e-6 &&
                    std::abs(sm[1] - 0.731059) < 1e-6 && std::abs(loss - 1.0) < 1e-12;
    return Outcome{ok, "f_r " + fmt("%.10f", f) + ", softmax [" + fmt("%.6f", sm[0]) + ", " +
                           fmt("%.6f", sm[1]) + "], loss " + fmt("%.15f", loss)};
  });

  criterion("fusion endpoints", 0, [] {
    std::size_t mismatches = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto fx = ut::random_masking_fixture(2000 + s);
      fx.cfg.lambda = 0.0;
      const auto a = compute_score_maps(fx.image, fx.grid, fx.coverage, fx.geometry, fx.cfg);
      fx.cfg.lambda = 1.0;
      const auto b = compute_score_maps(fx.image, fx.grid, fx.coverage, fx.geometry, fx.cfg);
      mismatches += a.p_joint != a.p_hog;
      mismatches += b.p_joint != b.p_polar;
    }
    return Outcome{mismatches == 0, "20 fixtures, " + std::to_string(mismatches) + " mismatches"};
  });

  criterion("ROI recovery", 30.0, [] {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 1.0;
    for (int i = 0; i < 20; ++i) {
      ut::FanSpec s;
      s.height = s.width = 256;
      s.apex_x = 256 * (0.35 + 0.3 * u(rng));
      s.apex_y = 256 * 0.08 * u(rng);
      s.inner_radius = 256 * 0.08 * u(rng);
      s.outer_radius = 256 * (0.7 + 0.2 * u(rng));
      s.opening_deg = 45.0 + 45.0 * u(rng);
      const Image img = ut::render_fan(s, ut::Texture::random(rng), 0.05, rng());
      const RoiMask roi = detect_roi(img);
      worst = std::min(worst, ut::iou(roi.mask, ut::fan_mask(s)));
    }
    return Outcome{worst >= 0.95, "20 fans, min IoU " + fmt("%.4f", worst)};
  });

  criterion("dedup correctness", 0, [] {
    std::mt19937_64 rng(5);
    auto frame = [&](const std::string& id, const Image& img, long long idx) {
      return UltrasoundFrame{id, "s", idx, img};
    };
    ut::FanSpec fan;
    const Image a = ut::render_fan(fan, ut::Texture::random(rng), 0.05, 1);
    Image scaled = a;
    for (double& x : scaled.pixels()) x *= 0.6;
    Image a_prime = a;
    std::normal_distribution<double> jitter(0.0, 0.01);
    for (double& x : a_prime.pixels()) x = std::clamp(x + (x > 0 ? jitter(rng) : 0.0), 0.0, 1.0);
    std::mt19937_64 rng_b(77);
    const Image b = ut::render_fan(ut::random_fan(rng_b, 128),
                                   ut::broadband_texture(rng_b, 24, 1.75, 3.75), 0.05, 2, 0.2, 0.8);

    const double s_dup = cosine_similarity(dct_feature(a), dct_feature(a)).value;
    const double s_scaled = cosine_similarity(dct_feature(a), dct_feature(scaled)).value;
    const std::vector<UltrasoundFrame> dups{frame("a", a, 0), frame("a_copy", a, 1),
                                            frame("a_dim", scaled, 2)};
    const auto collapsed = visual_screen(dups, 0.95);

    const std::vector<UltrasoundFrame> trace{frame("A", a, 0), frame("A'", a_prime, 1),
                                             frame("B", b, 2), frame("A2", a, 3)};
    const auto tr = visual_screen(trace, 0.95);
    const bool trace_ok = tr.retained == std::vector<std::string>{"A", "B", "A2"};

    bool accounting = true;
    for (const auto* r : {&collapsed, &tr}) {
      std::size_t dropped = 0;
      for (const auto& e : r->entries) dropped += e.stage_dropped != DropStage::none;
      accounting = accounting && r->retained.size() + dropped == r->entries.size();
    }
    const auto dir = ut::temp_dir("accept_dedup");
    const auto corpus = ut::build_corpus(dir, 30, 20, 9, 3);
    const auto dd = run_dedup(corpus.manifest, PipelineConfig{});
    std::size_t dropped = 0;
    for (const auto& e : dd.report) dropped += e.stage_dropped != DropStage::none;
    accounting = accounting && dd.retained.size() + dropped + dd.errors.size() ==
                                   corpus.manifest.entries.size();

    const bool ok = std::abs(s_dup - 1.0) < 1e-9 && std::abs(s_scaled - 1.0) < 1e-9 &&
                    collapsed.retained.size() == 1 && trace_ok && accounting;
    return Outcome{ok, "dup sim " + fmt("%.12f", s_dup) + ", scaled sim " + fmt("%.12f", s_scaled) +
                           ", trace " + (trace_ok ? "[A, B, A]" : "wrong") + ", accounting " +
                           (accounting ? "ok" : "broken")};
  });

  const auto corpus_dir = ut::temp_dir("accept_corpus");
  ut::Corpus corpus;
  PipelineSummary s8, s1;

  criterion("data reduction", 0, [&] {
    corpus = ut::build_corpus(corpus_dir, 600, 400, 42);
    PipelineConfig cfg;
    cfg.workers = 8;
    s8 = run_pipeline(corpus.manifest, cfg, (corpus_dir / "w8").string());
    const auto kept = s8.retained_after_semantic;
    const bool ok = corpus.manifest.entries.size() == 1000 && kept >= 570 && kept <= 630 &&
                    accounting_holds(corpus.manifest, corpus_dir / "w8");
    return Outcome{ok, "1000 frames (600 unique), retained " + std::to_string(kept) +
                           " (after visual " + std::to_string(s8.retained_after_visual) + ")"};
  });

  criterion("determinism", 0, [&] {
    PipelineConfig cfg;
    cfg.workers = 1;
    s1 = run_pipeline(corpus.manifest, cfg, (corpus_dir / "w1").string());
    std::size_t compared = 0, differing = 0;
    for (const auto& de : fs::directory_iterator(corpus_dir / "w1")) {
      const auto name = de.path().filename().string();
      if (!name.ends_with(".maskplan.json")) continue;
      ++compared;
      differing += slurp(de.path()) != slurp(corpus_dir / "w8" / name);
    }
    auto counts = [](nlohmann::json j) {
      j.erase("elapsed_per_stage");
      return j.dump();
    };
    const bool summary_same = counts(s1.to_json()) == counts(s8.to_json());
    const bool reports_same =
        slurp(corpus_dir / "w1" / "dedup_report.csv") == slurp(corpus_dir / "w8" / "dedup_report.csv") &&
        slurp(corpus_dir / "w1" / "retained.jsonl") == slurp(corpus_dir / "w8" / "retained.jsonl");
    const bool ok = compared == s1.plans_written && compared > 0 && differing == 0 &&
                    summary_same && reports_same;
    return Outcome{ok, "workers 1 vs 8: " + std::to_string(compared) + " plan files, " +
                           std::to_string(differing) + " differ, summary counts " +
                           (summary_same ? "equal" : "differ")};
  });

  fs::remove_all(corpus_dir);
  const double total = seconds_since(start);
  criterion("total runtime", 0, [&] {
    return Outcome{total < 300.0, fmt("%.1f", total) + " s for the acceptance run"};
  });

  std::printf("%s\n", failures ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED");
  return failures ? 1 : 0;
}
