#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logtex/corpus.hpp"

namespace logtex {

enum class SlotKind {
  Number,    // decimal integer
  BlockId,   // blk_-prefixed signed id
  Hex,       // 0x-prefixed hex word
  HostPort,  // dotted quad with port
  Path,      // unix-style path
  TaskId,    // task_N.N identifier
  User,      // short lowercase name with digit suffix
  Duration,  // integer milliseconds
};

struct SynthTemplate {
  std::string text;             // with "<*>" slots
  std::vector<SlotKind> slots;  // one per placeholder
  std::int64_t count = 0;       // messages generated from this template
};

struct GeneratorSpec {
  std::vector<SynthTemplate> templates;
  std::uint64_t seed = 0;
};

// 12 templates, skewed counts (largest 800, three singletons), 2,000 messages.
GeneratorSpec default_generator_spec(std::uint64_t seed);

// Seeded, reproducible dataset with ground truth; every generated pair
// matches its template. Messages are interleaved deterministically.
Dataset generate(const GeneratorSpec& spec);

// Writes <name>.log and <name>_templates.csv in the corpus file formats.
void write_dataset(const Dataset& dataset, const std::filesystem::path& directory,
                   const std::string& name);

}  // namespace logtex
