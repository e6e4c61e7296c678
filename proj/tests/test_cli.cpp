#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support/corpus.hpp"
#include "usmask/image_io.hpp"
#include "usmask/pipeline.hpp"

namespace fs = std::filesystem;
namespace ut = usmask::testing;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(USMASK_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir = ut::temp_dir("cli");
  fs::path frame = dir / "frame.pgm";
  fs::path manifest = dir / "m.jsonl";

  Workspace() {
    std::mt19937_64 rng(8);
    ut::save_pgm(frame, ut::render_fan(ut::FanSpec{}, ut::Texture::random(rng), 0.05, 1));
    const auto c = ut::build_corpus(dir, 12, 6, 5, 3);
    usmask::write_manifest(manifest.string(), c.manifest);
  }
};

}  // namespace

TEST_CASE("cli") {
  Workspace ws;
  const std::string d = ws.dir.string();

  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("mask --input " + ws.frame.string()) == 2);  // missing --out

  SUBCASE("roi") {
    CHECK(run("roi --input " + ws.frame.string() + " --out " + d + "/roi.pgm") == 0);
    const auto r = usmask::read_raster(d + "/roi.pgm");
    CHECK(r.height == 128);
    for (auto v : r.data) CHECK((v == 0 || v == 255));
  }

  SUBCASE("mask, viz and verify") {
    const std::string plan = d + "/frame.maskplan.json";
    CHECK(run("mask --input " + ws.frame.string() + " --out " + plan + " --viz " + d + "/viz") == 0);
    const auto j = nlohmann::json::parse(slurp(plan));
    CHECK(j["image_id"] == "frame");
    CHECK(j["masked"].size() == 48);
    for (const char* m : {"coverage", "p_polar", "p_hog", "p_joint"})
      CHECK(fs::exists(d + "/viz/frame." + m + ".png"));
    CHECK(run("verify " + plan) == 0);

    // Flags override the config file; the same seed reproduces the bytes.
    std::ofstream(d + "/cfg.json") << R"({"mask_ratio": 0.5, "seed": 3})";
    CHECK(run("mask --config " + d + "/cfg.json --mask_ratio 0.25 --input " + ws.frame.string() +
              " --out " + d + "/a.json") == 0);
    CHECK(run("mask --config " + d + "/cfg.json --mask_ratio 0.25 --input " + ws.frame.string() +
              " --out " + d + "/b.json") == 0);
    const auto a = nlohmann::json::parse(slurp(d + "/a.json"));
    CHECK(a["visible"].size() == 48);
    CHECK(a["config"]["seed"] == 3);
    CHECK(slurp(d + "/a.json") == slurp(d + "/b.json"));

    // Precomputed ROI.
    CHECK(run("roi --input " + ws.frame.string() + " --out " + d + "/roi.pgm") == 0);
    CHECK(run("mask --roi " + d + "/roi.pgm --input " + ws.frame.string() + " --out " + d +
              "/c.json") == 0);
    CHECK(slurp(d + "/c.json") == slurp(plan));

    auto tampered = j;
    tampered["visible"].push_back(tampered["masked"][0]);
    std::ofstream(d + "/bad.maskplan.json") << tampered.dump();
    CHECK(run("verify " + d + "/bad.maskplan.json") == 1);
    CHECK(run("verify " + d) == 1);
  }

  SUBCASE("config errors exit 2") {
    CHECK(run("mask --tau 1.5 --input " + ws.frame.string() + " --out " + d + "/x.json") == 2);
    std::ofstream(d + "/unknown.json") << R"({"taux": 0.5})";
    CHECK(run("mask --config " + d + "/unknown.json --input " + ws.frame.string() + " --out " + d +
              "/x.json") == 2);
    CHECK(run("pipeline --manifest " + d + "/nope.jsonl --out " + d + "/o") == 2);
    CHECK(run("dedup --manifest " + d + "/nope.jsonl --out " + d + "/o") == 2);
  }

  SUBCASE("frame-level failure exits 1") {
    std::ofstream(d + "/junk.png") << "junk";
    CHECK(run("mask --input " + d + "/junk.png --out " + d + "/x.json") == 1);
    usmask::Image black(64, 64, 0.0);
    ut::save_pgm(d + "/black.pgm", black);
    CHECK(run("mask --input " + d + "/black.pgm --out " + d + "/x.json") == 1);
  }

  SUBCASE("dedup and pipeline") {
    CHECK(run("dedup --manifest " + ws.manifest.string() + " --out " + d + "/dd") == 0);
    CHECK(fs::exists(d + "/dd/dedup_report.csv"));
    CHECK(fs::exists(d + "/dd/retained.jsonl"));
    CHECK(usmask::load_manifest(d + "/dd/retained.jsonl").entries.size() == 12);

    CHECK(run("pipeline --manifest " + ws.manifest.string() + " --workers 2 --out " + d + "/pp") == 0);
    const auto s = nlohmann::json::parse(slurp(d + "/pp/summary.json"));
    CHECK(s["input_count"] == 18);
    CHECK(s["retained_after_semantic"] == 12);
    CHECK(run("verify " + d + "/pp") == 0);
  }
}
