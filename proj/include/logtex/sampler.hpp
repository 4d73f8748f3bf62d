#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logtex/corpus.hpp"
#include "logtex/rng.hpp"

namespace logtex {

struct CleanedLog {
  std::vector<std::string> cln;
  std::string org;
  std::int64_t source_id = 0;
};

struct SamplerConfig {
  std::int64_t k = 32;
  std::int64_t eta = 32;
  std::uint64_t seed = 0;
};

struct LabeledExample {
  std::string message;
  std::string template_text;
};

// Lowercased word tokens: camel-case split, tokens containing non-alphabetic
// characters dropped, stop words dropped. Falls back to a plain whitespace
// split of the original message when nothing survives.
CleanedLog preprocess(const std::string& message, std::int64_t source_id = 0);

std::vector<std::string> split_camel_case(const std::string& word);

const std::vector<std::string>& stop_words();

// Jaccard similarity over the cleaned token sets; two empty sets count as 1.
double token_similarity(const CleanedLog& a, const CleanedLog& b);

// Adaptive random sampling: seed with the shortest cleaned log, then greedily
// add, from an eta-sized random candidate pool, the log whose similarity to
// its nearest selected neighbour is smallest. Returns line ids in selection
// order. Deterministic for a given seed.
std::vector<std::int64_t> adaptive_sample(const Dataset& dataset, const SamplerConfig& config);

// Ablation baseline: K uniformly random records with distinct contents.
std::vector<std::int64_t> uniform_sample(const Dataset& dataset, std::int64_t k,
                                         std::uint64_t seed);

void write_annotation_sheet(const Dataset& dataset, const std::vector<std::int64_t>& ids,
                            const std::filesystem::path& path);

std::vector<LabeledExample> read_annotation_sheet(const std::filesystem::path& path);

}  // namespace logtex
