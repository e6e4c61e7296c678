#include <cmath>
#include <fstream>
#include <set>

#include "usmask/error.hpp"
#include "usmask/pipeline.hpp"

namespace usmask {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <typename T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

double get_number(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

long long get_integer(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("config key '") + key + "' must be an integer");
  return v.get<long long>();
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "threshold_vis", "threshold_sem", "embedding_file", "bg_threshold", "close_radius",
      "tau",           "mu",            "sigma",          "k",            "lambda",
      "mask_ratio",    "target_fraction", "patch_size",   "dct_size",     "workers",
      "seed"};
  return keys;
}

}  // namespace

void PipelineConfig::validate() const {
  require(threshold_vis > 0.0 && threshold_vis <= 1.0, "threshold_vis must be in (0,1]");
  require(threshold_sem > 0.0 && threshold_sem <= 1.0, "threshold_sem must be in (0,1]");
  require(bg_threshold > 0.0 && bg_threshold < 1.0, "bg_threshold must be in (0,1)");
  require(close_radius >= 0, "close_radius must be >= 0");
  require(patch_size >= 1, "patch_size must be >= 1");
  require(dct_size >= 8, "dct_size must be >= 8");
  require(workers >= 1, "workers must be >= 1");
  if (embedding_file) require(!embedding_file->empty(), "embedding_file must not be empty");
  masking.validate();
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig cfg) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  if (j.contains("threshold_vis")) cfg.threshold_vis = get_number(j, "threshold_vis");
  if (j.contains("threshold_sem")) cfg.threshold_sem = get_number(j, "threshold_sem");
  if (j.contains("embedding_file")) {
    if (j["embedding_file"].is_null())
      cfg.embedding_file.reset();
    else
      cfg.embedding_file = get_as<std::string>(j, "embedding_file");
  }
  if (j.contains("bg_threshold")) cfg.bg_threshold = get_number(j, "bg_threshold");
  if (j.contains("close_radius")) cfg.close_radius = int(get_integer(j, "close_radius"));
  if (j.contains("tau")) cfg.masking.tau = get_number(j, "tau");
  if (j.contains("mu")) cfg.masking.mu = get_number(j, "mu");
  if (j.contains("sigma")) cfg.masking.sigma = get_number(j, "sigma");
  if (j.contains("k")) cfg.masking.k = get_number(j, "k");
  if (j.contains("lambda")) cfg.masking.lambda = get_number(j, "lambda");
  if (j.contains("mask_ratio")) cfg.masking.mask_ratio = get_number(j, "mask_ratio");
  if (j.contains("target_fraction")) cfg.masking.target_fraction = get_number(j, "target_fraction");
  if (j.contains("patch_size")) {
    const auto v = get_integer(j, "patch_size");
    require(v >= 1, "patch_size must be >= 1");
    cfg.patch_size = std::size_t(v);
  }
  if (j.contains("dct_size")) {
    const auto v = get_integer(j, "dct_size");
    require(v >= 8, "dct_size must be >= 8");
    cfg.dct_size = std::size_t(v);
  }
  if (j.contains("workers")) cfg.workers = int(get_integer(j, "workers"));
  if (j.contains("seed")) {
    const auto& v = j["seed"];
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
            "seed must be a non-negative integer");
    cfg.masking.seed = v.get<std::uint64_t>();
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(path + ": malformed config JSON: " + ex.what());
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j = {{"threshold_vis", cfg.threshold_vis},
                      {"threshold_sem", cfg.threshold_sem},
                      {"bg_threshold", cfg.bg_threshold},
                      {"close_radius", cfg.close_radius},
                      {"tau", cfg.masking.tau},
                      {"mu", cfg.masking.mu},
                      {"sigma", cfg.masking.sigma},
                      {"k", cfg.masking.k},
                      {"lambda", cfg.masking.lambda},
                      {"mask_ratio", cfg.masking.mask_ratio},
                      {"target_fraction", cfg.masking.target_fraction},
                      {"patch_size", cfg.patch_size},
                      {"dct_size", cfg.dct_size},
                      {"workers", cfg.workers},
                      {"seed", cfg.masking.seed}};
  if (cfg.embedding_file) j["embedding_file"] = *cfg.embedding_file;
  return j;
}

}  // namespace usmask
