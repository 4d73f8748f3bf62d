#include "logtex/synth.hpp"

#include <algorithm>
#include <fstream>

#include "logtex/error.hpp"
#include "logtex/rng.hpp"
#include "logtex/table.hpp"

namespace logtex {

namespace {

std::string gen_value(SlotKind kind, Rng& rng) {
  switch (kind) {
    case SlotKind::Number:
      return std::to_string(rng.next_below(100000));
    case SlotKind::BlockId: {
      std::string sign = rng.next_below(2) ? "-" : "";
      return "blk_" + sign + std::to_string(1000000000ULL + rng.next_below(9000000000ULL));
    }
    case SlotKind::Hex: {
      static const char* digits = "0123456789abcdef";
      std::string out = "0x";
      size_t len = 4 + rng.next_below(5);
      for (size_t i = 0; i < len; ++i) out += digits[rng.next_below(16)];
      return out;
    }
    case SlotKind::HostPort:
      return "10." + std::to_string(rng.next_below(256)) + "." + std::to_string(rng.next_below(256)) +
             "." + std::to_string(rng.next_below(256)) + ":" + std::to_string(1024 + rng.next_below(60000));
    case SlotKind::Path: {
      static const char* roots[] = {"data", "log", "tmp", "spool"};
      std::string out = "/var/";
      out += roots[rng.next_below(4)];
      out += "/part-";
      std::string digits = std::to_string(rng.next_below(10000));
      out += std::string(4 - digits.size(), '0') + digits;
      return out;
    }
    case SlotKind::TaskId:
      return "tsk_" + std::to_string(rng.next_below(4096)) + "." + std::to_string(rng.next_below(16));
    case SlotKind::User: {
      static const char* names[] = {"alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi"};
      return std::string(names[rng.next_below(8)]) + std::to_string(rng.next_below(100));
    }
    case SlotKind::Duration:
      return std::to_string(rng.next_below(30000));
  }
  return "0";
}

}  // namespace

GeneratorSpec default_generator_spec(std::uint64_t seed) {
  GeneratorSpec spec;
  spec.seed = seed;
  spec.templates = {
      {"Received block <*> of size <*> from <*>",
       {SlotKind::BlockId, SlotKind::Number, SlotKind::HostPort}, 800},
      {"PacketResponder <*> for block <*> terminating", {SlotKind::Number, SlotKind::BlockId}, 420},
      {"Verification succeeded for <*>", {SlotKind::BlockId}, 260},
      {"Starting task <*> in stage <*> on executor <*>",
       {SlotKind::TaskId, SlotKind::Number, SlotKind::HostPort}, 190},
      {"Connection from <*> closed after <*> ms", {SlotKind::HostPort, SlotKind::Duration}, 130},
      {"Failed to open file <*> with error code <*>", {SlotKind::Path, SlotKind::Number}, 90},
      {"Registered signal handler for event <*>", {SlotKind::Hex}, 60},
      {"Memory usage <*> exceeds threshold <*>", {SlotKind::Number, SlotKind::Number}, 30},
      {"Session <*> authenticated for user <*> from host <*>",
       {SlotKind::Hex, SlotKind::User, SlotKind::HostPort}, 17},
      {"Checkpoint written to <*> in <*> ms", {SlotKind::Path, SlotKind::Duration}, 1},
      {"Rebalancing shard <*> to node <*> after <*> failures",
       {SlotKind::Number, SlotKind::HostPort, SlotKind::Number}, 1},
      {"License server heartbeat lost, retrying in <*> seconds", {SlotKind::Number}, 1},
  };
  return spec;
}

Dataset generate(const GeneratorSpec& spec) {
  if (spec.templates.empty()) raise(ErrorKind::InvalidSpec, "no templates");
  std::int64_t total = 0;
  for (const auto& templ : spec.templates) {
    if (templ.count < 0) raise(ErrorKind::InvalidSpec, "negative count");
    size_t placeholders = 0;
    for (size_t pos = 0; (pos = templ.text.find("<*>", pos)) != std::string::npos; pos += 3)
      ++placeholders;
    if (placeholders != templ.slots.size())
      raise(ErrorKind::InvalidSpec, "slot kinds do not match placeholders in \"" + templ.text + "\"");
    total += templ.count;
  }
  if (total == 0) raise(ErrorKind::InvalidSpec, "zero messages requested");

  Rng value_rng(derive_seed(spec.seed, "synth-values"));
  std::vector<std::pair<std::string, std::string>> pairs;  // (message, template)
  pairs.reserve(total);
  for (const auto& templ : spec.templates) {
    for (std::int64_t i = 0; i < templ.count; ++i) {
      std::vector<std::string> values;
      values.reserve(templ.slots.size());
      for (SlotKind kind : templ.slots) values.push_back(gen_value(kind, value_rng));
      pairs.emplace_back(substitute_params(templ.text, values), templ.text);
    }
  }

  // Deterministic interleaving: one shuffle of the whole pool.
  Rng order_rng(derive_seed(spec.seed, "synth-order"));
  for (size_t i = pairs.size(); i > 1; --i)
    std::swap(pairs[i - 1], pairs[order_rng.next_below(i)]);

  Dataset dataset;
  dataset.name = "synthetic";
  dataset.ground_truth.emplace();
  dataset.records.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    LogRecord record;
    record.line_id = static_cast<std::int64_t>(i + 1);
    record.content = pairs[i].first;
    dataset.records.push_back(std::move(record));
    (*dataset.ground_truth)[static_cast<std::int64_t>(i + 1)] = pairs[i].second;
  }
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& directory,
                   const std::string& name) {
  std::filesystem::create_directories(directory);
  {
    std::ofstream log(directory / (name + ".log"), std::ios::binary);
    if (!log) raise(ErrorKind::IoError, "cannot write log file");
    for (const auto& record : dataset.records) log << record.content << "\n";
  }
  if (dataset.ground_truth) {
    Table table;
    table.header = {"LineId", "Content", "EventTemplate"};
    for (const auto& record : dataset.records)
      table.rows.push_back({std::to_string(record.line_id), record.content,
                            dataset.ground_truth->at(record.line_id)});
    write_table(table, directory / (name + "_templates.csv"));
  }
}

}  // namespace logtex
