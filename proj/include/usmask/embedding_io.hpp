#pragma once

#include <string>
#include <vector>

#include "usmask/screening.hpp"

namespace usmask {

// Binary layout (little-endian): "PMEB", u8 version=1, u32 count, u32 dim,
// then count x (u16 id_len, id bytes, dim x f32).
// JSON alternative: [{"id": "...", "values": [..]}, ...].
// Format is sniffed from the first four bytes. Zero-norm vectors and
// inconsistent dimensions are rejected with InvalidInput.
std::vector<SemanticEmbedding> load_embeddings(const std::string& path);

void write_embeddings_binary(const std::string& path,
                             const std::vector<SemanticEmbedding>& embeddings);
void write_embeddings_json(const std::string& path,
                           const std::vector<SemanticEmbedding>& embeddings);

}  // namespace usmask
