#pragma once

#include <cstdint>
#include <vector>

#include "logtex/corpus.hpp"
#include "logtex/encoder.hpp"
#include "logtex/sampler.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex {

// Per-position training targets: PARAM at subwords overlapping a parameter
// span, the input id elsewhere.
struct TargetSequence {
  std::vector<TokenId> ids;
};

struct TrainConfig {
  std::int64_t steps = 200;
  std::int64_t batch_size = 8;
  double learning_rate = 5e-5;
  double warmup_fraction = 0.10;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
};

struct TrainStepResult {
  std::int64_t step = 0;  // 1-based
  double loss = 0.0;
  double learning_rate = 0.0;
};

TargetSequence build_target(const Tokenizer::Sequence& tokens, const ParamExtraction& extraction,
                            TokenId param_id);

// Mean NLL of targets under row-softmaxed logits; PAD positions excluded.
double sequence_loss(const Mat& logits, const TargetSequence& target);

// Learning rate for 1-based step: linear ramp from zero over the warmup
// steps, then linear decay to zero at the final step.
double learning_rate_at(const TrainConfig& config, std::int64_t step);

// AdamW on the Eq-style objective: exactly config.steps optimizer steps over
// seeded shuffled batches (whole set when it fits in one batch). Deterministic
// for a given seed. The model must already carry the PARAM token.
std::vector<TrainStepResult> train(Encoder& model, const Tokenizer& tokenizer,
                                   const std::vector<LabeledExample>& d_train,
                                   const TrainConfig& config);

}  // namespace logtex
