#pragma once

#include <filesystem>
#include <memory>

#include "logtex/encoder.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex {

struct Checkpoint {
  Tokenizer tokenizer;
  Encoder model;
  TokenId param_token_id = -1;
};

// Self-describing binary container: magic, format version, config block,
// tokenizer block, PARAM id, named float32 little-endian tensors, CRC32
// trailer. load(save(x)) reproduces every tensor bit for bit.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32(const void* data, size_t length, std::uint32_t seed = 0);

}  // namespace logtex
