#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logtex/checkpoint.hpp"
#include "logtex/corpus.hpp"
#include "logtex/encoder.hpp"
#include "logtex/metrics.hpp"
#include "logtex/parser.hpp"
#include "logtex/sampler.hpp"
#include "logtex/trainer.hpp"
#include "logtex/vtoken.hpp"

namespace logtex {

// One configuration drives the whole pipeline; a single seed fans out into
// per-module streams, so identical configs produce identical artifacts.
struct RunConfig {
  std::string log_path;
  std::string truth_path;  // empty: no ground truth
  std::string format = "<Content>";

  SamplerConfig sampler;          // k=32, eta=32
  TrainConfig train;              // 200 steps, batch 8, lr 5e-5, 10% warmup
  EncoderConfig encoder;          // d_model 128, 4 layers, 4 heads, d_ff 512
  VTokenConfig vtoken;            // k_top 8, m 8
  std::int32_t tokenizer_vocab = 2048;
  std::int32_t parse_batch_size = 32;

  bool random_sampling = false;   // ablation: uniform instead of adaptive
  bool no_virtual_token = false;  // ablation: default PARAM init

  std::string out_dir = "out";
  std::uint64_t seed = 0;

  // Copy with per-module seeds derived from the run seed.
  RunConfig with_derived_seeds() const;
};

// Flat key=value config file ('#' comments). Unknown keys are a ConfigError.
// Precedence when used from the CLI: defaults < config file < environment
// (LOGTEX_SEED, LOGTEX_OUT) < explicit flags.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_env_overrides(RunConfig& config);

Dataset load_run_dataset(const RunConfig& config);

// sample stage: selects ids and writes the annotation sheet (prefilled with
// ground truth when available).
std::vector<std::int64_t> run_sample(const RunConfig& config, const Dataset& dataset,
                                     const std::filesystem::path& sheet_path);

struct TrainOutput {
  std::filesystem::path checkpoint_path;
  std::filesystem::path report_path;
  std::filesystem::path loss_curve_path;
  std::vector<TrainStepResult> curve;
  VirtualTokenReport vtoken_report;
};

// train stage: tokenizer training, virtual-token generation, tuning, and the
// checkpoint + report artifacts.
TrainOutput run_train(const RunConfig& config, const Dataset& corpus,
                      const std::vector<LabeledExample>& d_train);

// parse stage: structured output rows for every record.
struct ParseOutput {
  std::vector<ParseResult> results;
  double seconds = 0.0;
};
ParseOutput run_parse(const Checkpoint& checkpoint, const std::vector<std::string>& messages,
                      std::int32_t batch_size);

void write_structured_output(const Dataset& dataset, const std::vector<ParseResult>& results,
                             const std::filesystem::path& path);
TemplateMap read_structured_templates(const std::filesystem::path& path);

TemplateMap truth_templates(const Dataset& dataset);

// Full pipeline on one dataset: sample -> annotate(auto) -> train -> parse ->
// evaluate. Requires ground truth (for auto-annotation and scoring).
EvalReport run_end_to_end(const RunConfig& config);

}  // namespace logtex
