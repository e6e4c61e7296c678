#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "usmask/error.hpp"
#include "usmask/pipeline.hpp"

namespace usmask {

namespace fs = std::filesystem;

void Manifest::validate() const {
  std::set<std::string> ids;
  std::set<std::pair<std::string, long long>> positions;
  for (const auto& e : entries) {
    if (e.id.empty()) throw ConfigError("manifest: empty id");
    if (e.id == "." || e.id == ".." || e.id.find_first_of("/\\") != std::string::npos)
      throw ConfigError("manifest: id '" + e.id + "' cannot be used as a file name");
    if (e.path.empty()) throw ConfigError("manifest: empty path for '" + e.id + "'");
    if (e.frame_index < 0) throw ConfigError("manifest: negative frame_index for '" + e.id + "'");
    if (!ids.insert(e.id).second) throw ConfigError("manifest: duplicate id '" + e.id + "'");
    if (!positions.insert({e.sequence_id, e.frame_index}).second)
      throw ConfigError("manifest: duplicate (sequence_id, frame_index) = ('" + e.sequence_id +
                        "', " + std::to_string(e.frame_index) + ")");
  }
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open manifest");
  const fs::path base = fs::path(path).parent_path();
  Manifest m;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(where + "malformed JSON: " + ex.what());
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.path = j.at("path").get<std::string>();
      e.sequence_id = j.at("sequence_id").get<std::string>();
      if (!j.at("frame_index").is_number_integer()) throw ConfigError(where + "frame_index must be an integer");
      e.frame_index = j.at("frame_index").get<long long>();
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(where + "bad manifest entry: " + ex.what());
    }
    if (!e.path.empty() && fs::path(e.path).is_relative()) e.path = (base / e.path).string();
    m.entries.push_back(std::move(e));
  }
  m.validate();
  return m;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j = {{"id", e.id},
                                {"path", e.path},
                                {"sequence_id", e.sequence_id},
                                {"frame_index", e.frame_index}};
    out << j.dump() << '\n';
  }
}

}  // namespace usmask
