#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logtex/rng.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct EncoderConfig {
  std::int32_t vocab_size = 0;
  std::int32_t d_model = 128;
  std::int32_t n_layers = 4;
  std::int32_t n_heads = 4;
  std::int32_t d_ff = 512;
  std::int32_t max_len = 256;
  double dropout = 0.1;
  std::uint64_t seed = 0;

  std::int32_t head_dim() const { return d_model / n_heads; }
};

struct LayerParams {
  Mat wq, wk, wv, wo;
  Vec bq, bk, bv, bo;
  Vec ln1_g, ln1_b, ln2_g, ln2_b;
  Mat w1, w2;
  Vec b1, b2;
};

// All learnable tensors. tok_emb doubles as the output projection (tied), so
// extending the vocabulary makes the new token both encodable and predictable.
struct Params {
  Mat tok_emb;  // vocab x d, tied input/output embedding
  Mat pos_emb;  // max_len x d
  Vec emb_ln_g, emb_ln_b;
  std::vector<LayerParams> layers;
  Vec final_ln_g, final_ln_b;
  Mat head_w;  // d x d, MLM head transform
  Vec head_b;
  Vec head_ln_g, head_ln_b;
  Vec out_bias;  // vocab

  static Params zeros_like(const Params& other);
  bool all_finite() const;
  std::int64_t tensor_count() const;
  std::int64_t coefficient_count() const;
};

// Applies f(name, tensor...) to every tensor, in a fixed order shared by all
// Params instances passed in. f must accept both Mat& and Vec& packs.
template <class F, class... Ps>
void visit_tensors(F&& f, Ps&... ps) {
  f("tok_emb", ps.tok_emb...);
  f("pos_emb", ps.pos_emb...);
  f("emb_ln_g", ps.emb_ln_g...);
  f("emb_ln_b", ps.emb_ln_b...);
  const size_t n_layers = std::get<0>(std::tie(ps...)).layers.size();
  for (size_t l = 0; l < n_layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    f(prefix + "wq", ps.layers[l].wq...);
    f(prefix + "wk", ps.layers[l].wk...);
    f(prefix + "wv", ps.layers[l].wv...);
    f(prefix + "wo", ps.layers[l].wo...);
    f(prefix + "bq", ps.layers[l].bq...);
    f(prefix + "bk", ps.layers[l].bk...);
    f(prefix + "bv", ps.layers[l].bv...);
    f(prefix + "bo", ps.layers[l].bo...);
    f(prefix + "ln1_g", ps.layers[l].ln1_g...);
    f(prefix + "ln1_b", ps.layers[l].ln1_b...);
    f(prefix + "ln2_g", ps.layers[l].ln2_g...);
    f(prefix + "ln2_b", ps.layers[l].ln2_b...);
    f(prefix + "w1", ps.layers[l].w1...);
    f(prefix + "b1", ps.layers[l].b1...);
    f(prefix + "w2", ps.layers[l].w2...);
    f(prefix + "b2", ps.layers[l].b2...);
  }
  f("final_ln_g", ps.final_ln_g...);
  f("final_ln_b", ps.final_ln_b...);
  f("head_w", ps.head_w...);
  f("head_b", ps.head_b...);
  f("head_ln_g", ps.head_ln_g...);
  f("head_ln_b", ps.head_ln_b...);
  f("out_bias", ps.out_bias...);
}

// Read/extend surface every masked-LM backend provides. The bundled Encoder
// implements it; an adapter over an externally pre-trained masked LM can
// stand in for everything downstream of training (virtual-token generation
// and parsing consume only this surface). The in-process tuning hook is the
// concrete Encoder's loss_and_grad/params pair.
class LmBackend {
 public:
  virtual ~LmBackend() = default;

  virtual std::int32_t vocab_size() const = 0;
  virtual std::int32_t embedding_dim() const = 0;
  virtual std::int32_t max_len() const = 0;

  // Logits [n x vocab_size]; rows softmax to probability distributions.
  virtual Mat forward(const std::vector<TokenId>& ids) const = 0;

  virtual std::vector<std::pair<TokenId, double>> top_k_at(const std::vector<TokenId>& ids,
                                                           size_t position,
                                                           std::int32_t k) const = 0;

  virtual TokenId extend_vocab(const Vec& embedding, const std::string& name) = 0;
  virtual Vec token_embedding(TokenId id) const = 0;
  virtual Vec default_new_token_embedding(std::uint64_t salt) const = 0;
  virtual std::optional<TokenId> added_token_id(const std::string& name) const = 0;
};

// Masked-sequence encoder with an MLM head. Double precision throughout;
// inference is pure, training mutates parameters under a single writer.
class Encoder : public LmBackend {
 public:
  explicit Encoder(const EncoderConfig& config);

  Encoder(const Encoder& other);
  Encoder& operator=(const Encoder& other);

  const EncoderConfig& config() const { return config_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  std::int32_t vocab_size() const override { return config_.vocab_size; }
  std::int32_t embedding_dim() const override { return config_.d_model; }
  std::int32_t max_len() const override { return config_.max_len; }

  // Logits [n x vocab_size], eval mode. Rows softmax to probabilities.
  Mat forward(const std::vector<TokenId>& ids) const override;

  // k best (token id, probability) at one position, probability descending,
  // ties by smaller id.
  std::vector<std::pair<TokenId, double>> top_k_at(const std::vector<TokenId>& ids,
                                                   size_t position, std::int32_t k) const override;

  // Appends a row to the tied embedding; the token becomes predictable (and
  // encodable) immediately. Returns the new id, which is the largest so far.
  TokenId extend_vocab(const Vec& embedding, const std::string& name) override;

  Vec token_embedding(TokenId id) const override;
  Vec default_new_token_embedding(std::uint64_t salt) const override;

  const std::vector<std::pair<std::string, TokenId>>& added_tokens() const { return added_tokens_; }
  std::optional<TokenId> added_token_id(const std::string& name) const override;

  // Re-registers a token recorded in a checkpoint; the embedding row must
  // already be part of tok_emb.
  void restore_added_token(const std::string& name, TokenId id);

  // Mean negative log-likelihood of targets (PAD positions excluded),
  // eval mode. Used by the finite-difference side of grad_check.
  double loss(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets) const;

  // Same loss with dropout active; accumulates scale * dLoss/dParams into
  // grads. dropout_rng may be null for eval-mode gradients.
  double loss_and_grad(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets,
                       double scale, Params& grads, Rng* dropout_rng);

  // Central finite differences (step 1e-3) against analytic gradients on a
  // random coordinate subset. Returns the max relative error.
  double grad_check(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets,
                    std::int32_t probes_per_tensor = 6, std::uint64_t probe_seed = 0);

  std::int64_t forward_calls() const { return forward_calls_.load(); }
  void reset_forward_calls() { forward_calls_.store(0); }

 private:
  struct Cache;
  Mat run_forward(const std::vector<TokenId>& ids, Cache* cache, Rng* dropout_rng) const;
  void run_backward(const Cache& cache, const Mat& dlogits, Params& grads) const;

  EncoderConfig config_;
  Params params_;
  std::vector<std::pair<std::string, TokenId>> added_tokens_;
  mutable std::atomic<std::int64_t> forward_calls_{0};
};

// Log-softmax of one logits row; shared by loss code and tests.
Vec log_softmax(const Vec& logits);

}  // namespace logtex
