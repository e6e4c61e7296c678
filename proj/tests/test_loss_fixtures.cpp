#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "usmask/masking.hpp"

// The shared fixtures carry losses computed by an independent Python oracle.
TEST_CASE("reconstruction_loss agrees with the shared loss fixtures") {
  std::ifstream in(USMASK_FIXTURE_DIR "/loss_fixtures.json");
  REQUIRE(in);
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["format"] == "usmask-loss-fixtures");
  CHECK(doc["version"] == 1);
  REQUIRE(doc["cases"].size() >= 3);
  for (const auto& c : doc["cases"]) {
    const auto name = c["name"].get<std::string>();
    const auto pred = c["predicted"].get<std::vector<std::vector<double>>>();
    const auto orig = c["original"].get<std::vector<std::vector<double>>>();
    const auto masked = c["masked"].get<std::vector<std::size_t>>();
    const double want = c["loss"].get<double>();
    const double got =
        usmask::reconstruction_loss(pred, orig, masked, {c["normalize_target"].get<bool>()});
    CHECK_MESSAGE(std::abs(got - want) <= 1e-12 * std::max(1.0, want), name);
  }
}
