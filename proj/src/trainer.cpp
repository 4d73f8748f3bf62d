#include "logtex/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "logtex/error.hpp"

namespace logtex {

TargetSequence build_target(const Tokenizer::Sequence& tokens, const ParamExtraction& extraction,
                            TokenId param_id) {
  // The extraction must come from this exact source text.
  size_t previous_end = 0;
  for (size_t i = 0; i < extraction.param_spans.size(); ++i) {
    auto [start, end] = extraction.param_spans[i];
    if (start >= end || end > tokens.source.size() || start < previous_end)
      raise(ErrorKind::MisalignedExtraction, "parameter spans out of order or out of range");
    if (tokens.source.substr(start, end - start) != extraction.params[i])
      raise(ErrorKind::MisalignedExtraction, "parameter text does not match source span");
    previous_end = end;
  }

  TargetSequence target;
  target.ids.reserve(tokens.ids.size());
  for (size_t i = 0; i < tokens.ids.size(); ++i) {
    auto [tok_start, tok_end] = tokens.offsets[i];
    bool overlaps = false;
    for (auto [start, end] : extraction.param_spans) {
      if (tok_start < end && start < tok_end) {  // >= 1 byte of overlap
        overlaps = true;
        break;
      }
    }
    target.ids.push_back(overlaps ? param_id : tokens.ids[i]);
  }
  return target;
}

double sequence_loss(const Mat& logits, const TargetSequence& target) {
  if (static_cast<size_t>(logits.rows()) != target.ids.size())
    raise(ErrorKind::ShapeMismatch, "logits rows != target length");
  std::int64_t live = 0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    TokenId t = target.ids[i];
    if (t == Tokenizer::kPadId) continue;
    if (t < 0 || t >= logits.cols())
      raise(ErrorKind::ShapeMismatch, "target id outside vocab");
    total -= log_softmax(logits.row(i).transpose())(t);
    ++live;
  }
  if (live == 0) raise(ErrorKind::ShapeMismatch, "no non-PAD positions");
  return total / static_cast<double>(live);
}

double learning_rate_at(const TrainConfig& config, std::int64_t step) {
  const double peak = config.learning_rate;
  const auto warmup = static_cast<std::int64_t>(
      std::ceil(config.warmup_fraction * static_cast<double>(config.steps)));
  if (warmup > 0 && step <= warmup)
    return peak * static_cast<double>(step) / static_cast<double>(warmup);
  if (config.steps == warmup) return peak;
  // Decay reaches zero one step past the end, so the final step still moves.
  return peak * static_cast<double>(config.steps - step + 1) /
         static_cast<double>(config.steps - warmup);
}

namespace {

struct AdamState {
  Params m;
  Params v;
  std::int64_t t = 0;
};

void adam_step(Params& params, const Params& grads, AdamState& state, double lr,
               double weight_decay) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  ++state.t;
  const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  visit_tensors(
      [&](const std::string&, auto& theta, auto& grad, auto& m, auto& v) {
        using T = std::decay_t<decltype(theta)>;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
        auto m_hat = m.array() / bias1;
        auto v_hat = v.array() / bias2;
        theta.array() -= lr * (m_hat / (v_hat.sqrt() + eps));
        // Decoupled decay on matrices only (embeddings and projections);
        // biases and layer-norm parameters are left undecayed.
        if constexpr (std::is_same_v<T, Mat>) theta.array() -= lr * weight_decay * theta.array();
      },
      params, const_cast<Params&>(grads), state.m, state.v);
}

}  // namespace

std::vector<TrainStepResult> train(Encoder& model, const Tokenizer& tokenizer,
                                   const std::vector<LabeledExample>& d_train,
                                   const TrainConfig& config) {
  if (config.steps < 1) raise(ErrorKind::ConfigError, "steps must be >= 1");
  if (config.batch_size < 1) raise(ErrorKind::ConfigError, "batch_size must be >= 1");
  if (config.warmup_fraction < 0.0 || config.warmup_fraction >= 1.0)
    raise(ErrorKind::ConfigError, "warmup_fraction must be in [0, 1)");
  if (d_train.empty()) raise(ErrorKind::ValidationError, "empty training set");
  auto param_id = model.added_token_id("PARAM");
  if (!param_id) raise(ErrorKind::ParamTokenMissing, "install the PARAM token before training");

  struct Sample {
    std::vector<TokenId> inputs;
    std::vector<TokenId> targets;
  };
  std::vector<Sample> samples;
  samples.reserve(d_train.size());
  const size_t max_len = static_cast<size_t>(model.config().max_len);
  for (const auto& example : d_train) {
    Tokenizer::Sequence tokens = tokenizer.encode(example.message);
    ParamExtraction extraction = match_template(example.message, example.template_text);
    TargetSequence target = build_target(tokens, extraction, *param_id);
    Sample sample{std::move(tokens.ids), std::move(target.ids)};
    if (sample.inputs.size() > max_len) {  // truncated tail trains as-is
      sample.inputs.resize(max_len);
      sample.targets.resize(max_len);
    }
    if (!sample.inputs.empty()) samples.push_back(std::move(sample));
  }
  if (samples.empty()) raise(ErrorKind::ValidationError, "no non-empty training sequences");

  Rng shuffle_rng(derive_seed(config.seed, "train-shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "train-dropout"));

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();  // forces a shuffle before the first batch

  AdamState adam{Params::zeros_like(model.params()), Params::zeros_like(model.params())};
  Params grads = Params::zeros_like(model.params());

  const bool whole_set = samples.size() <= static_cast<size_t>(config.batch_size);
  std::vector<TrainStepResult> curve;
  curve.reserve(config.steps);

  for (std::int64_t step = 1; step <= config.steps; ++step) {
    std::vector<size_t> batch;
    if (whole_set) {
      batch = order;
    } else {
      while (batch.size() < static_cast<size_t>(config.batch_size)) {
        if (cursor == order.size()) {
          for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
          cursor = 0;
        }
        batch.push_back(order[cursor++]);
      }
    }

    visit_tensors([](const std::string&, auto& g) { g.setZero(); }, grads);
    double batch_loss = 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (size_t index : batch) {
      const auto& sample = samples[index];
      batch_loss +=
          scale * model.loss_and_grad(sample.inputs, sample.targets, scale, grads, &dropout_rng);
    }

    double lr = learning_rate_at(config, step);
    adam_step(model.params(), grads, adam, lr, config.weight_decay);
    curve.push_back({step, batch_loss, lr});
  }
  return curve;
}

}  // namespace logtex
