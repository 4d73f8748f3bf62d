#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "logtex/corpus.hpp"
#include "logtex/encoder.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex::testing {

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("logtex_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline Tokenizer tiny_tokenizer(const std::vector<std::string>& corpus, int vocab = 300) {
  return Tokenizer::train(corpus, vocab);
}

inline EncoderConfig tiny_encoder_config(std::int32_t vocab_size, std::uint64_t seed = 7) {
  EncoderConfig config;
  config.vocab_size = vocab_size;
  config.d_model = 32;
  config.n_layers = 2;
  config.n_heads = 4;
  config.d_ff = 64;
  config.max_len = 64;
  config.dropout = 0.0;
  config.seed = seed;
  return config;
}

}  // namespace logtex::testing
