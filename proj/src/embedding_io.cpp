#include "usmask/embedding_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "usmask/error.hpp"

namespace usmask {
namespace {

static_assert(std::endian::native == std::endian::little,
              "embedding I/O assumes a little-endian host");

constexpr char kMagic[4] = {'P', 'M', 'E', 'B'};
constexpr std::uint8_t kVersion = 1;

class Reader {
 public:
  Reader(const std::vector<char>& buf, const std::string& path) : buf_(buf), path_(path) {}

  template <typename T>
  T read() {
    T v;
    need(sizeof v);
    std::memcpy(&v, buf_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string read_string(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw IoError(path_, "truncated embedding file");
  }
  const std::vector<char>& buf_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

void check_embeddings(const std::vector<SemanticEmbedding>& out, const std::string& path) {
  std::unordered_set<std::string> seen;
  for (const auto& e : out) {
    if (!seen.insert(e.source_id).second)
      throw InvalidInput(path + ": duplicate embedding id '" + e.source_id + "'");
    if (e.values.size() != out.front().values.size())
      throw InvalidInput(path + ": embedding length mismatch between '" +
                         out.front().source_id + "' and '" + e.source_id + "'");
    double norm = 0.0;
    for (double x : e.values) {
      if (!std::isfinite(x)) throw InvalidInput(path + ": non-finite value in '" + e.source_id + "'");
      norm += x * x;
    }
    if (std::sqrt(norm) < kZeroNormEps)
      throw InvalidInput(path + ": zero-norm embedding for '" + e.source_id + "'");
  }
}

}  // namespace

std::vector<SemanticEmbedding> load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open");
  const std::vector<char> buf{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  std::vector<SemanticEmbedding> out;
  if (buf.size() >= 4 && std::memcmp(buf.data(), kMagic, 4) == 0) {
    Reader r(buf, path);
    r.read_string(4);
    if (const auto ver = r.read<std::uint8_t>(); ver != kVersion)
      throw IoError(path, "unsupported embedding file version " + std::to_string(ver));
    const auto count = r.read<std::uint32_t>();
    const auto dim = r.read<std::uint32_t>();
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      SemanticEmbedding e;
      e.source_id = r.read_string(r.read<std::uint16_t>());
      e.values.resize(dim);
      for (auto& v : e.values) v = r.read<float>();
      out.push_back(std::move(e));
    }
    if (!r.at_end()) throw IoError(path, "trailing bytes after embedding records");
  } else {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(buf.begin(), buf.end());
    } catch (const nlohmann::json::exception& ex) {
      throw IoError(path, std::string("malformed embedding JSON: ") + ex.what());
    }
    if (!j.is_array()) throw IoError(path, "embedding JSON must be an array");
    for (const auto& rec : j) {
      SemanticEmbedding e;
      try {
        e.source_id = rec.at("id").get<std::string>();
        // f32 on disk in the binary form; round identically here.
        for (const auto& v : rec.at("values")) e.values.push_back(double(v.get<float>()));
      } catch (const nlohmann::json::exception& ex) {
        throw IoError(path, std::string("bad embedding record: ") + ex.what());
      }
      out.push_back(std::move(e));
    }
  }
  check_embeddings(out, path);
  return out;
}

void write_embeddings_binary(const std::string& path,
                             const std::vector<SemanticEmbedding>& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  auto put = [&](const auto& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kMagic, 4);
  put(kVersion);
  put(static_cast<std::uint32_t>(embeddings.size()));
  put(static_cast<std::uint32_t>(embeddings.empty() ? 0 : embeddings.front().values.size()));
  for (const auto& e : embeddings) {
    if (e.source_id.size() > 0xFFFF) throw InvalidInput("embedding id too long: " + e.source_id);
    put(static_cast<std::uint16_t>(e.source_id.size()));
    out.write(e.source_id.data(), std::streamsize(e.source_id.size()));
    for (double v : e.values) put(static_cast<float>(v));
  }
  if (!out) throw IoError(path, "write failed");
}

void write_embeddings_json(const std::string& path,
                           const std::vector<SemanticEmbedding>& embeddings) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : embeddings) {
    nlohmann::json vals = nlohmann::json::array();
    for (double v : e.values) vals.push_back(static_cast<float>(v));
    j.push_back({{"id", e.source_id}, {"values", vals}});
  }
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << j.dump() << '\n';
}

}  // namespace usmask
