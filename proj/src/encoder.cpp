#include "logtex/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "logtex/error.hpp"

namespace logtex {

namespace {

constexpr double kLnEps = 1e-5;
// Compact-embedding regime: rows start small and the output scale amplifies
// them, so fine-tuning-sized learning rates produce decisive logits within a
// few hundred steps.
constexpr double kTokenInitScale = 0.01;
constexpr double kPosInitScale = 0.01;
constexpr double kLogitScale = 28.0;

constexpr double kInvSqrt2 = 0.7071067811865476;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

struct LnCache {
  Mat x_hat;    // normalized input
  Vec inv_std;  // per row
};

// y = x_hat * diag(g) + b, row-wise statistics.
Mat layer_norm(const Mat& x, const Vec& g, const Vec& b, LnCache& cache) {
  const auto n = x.rows();
  const auto d = x.cols();
  cache.x_hat.resize(n, d);
  cache.inv_std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mean = x.row(i).mean();
    double var = (x.row(i).array() - mean).square().sum() / static_cast<double>(d);
    double inv_std = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_std(i) = inv_std;
    cache.x_hat.row(i) = (x.row(i).array() - mean) * inv_std;
  }
  Mat y = cache.x_hat.array().rowwise() * g.transpose().array();
  y.array().rowwise() += b.transpose().array();
  return y;
}

Mat layer_norm_backward(const Mat& dy, const LnCache& cache, const Vec& g, Vec& dg, Vec& db) {
  const auto n = dy.rows();
  const auto d = dy.cols();
  dg.noalias() += (dy.array() * cache.x_hat.array()).colwise().sum().matrix().transpose();
  db.noalias() += dy.colwise().sum().transpose();
  Mat dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::ArrayXd dxh = dy.row(i).array().transpose() * g.array();
    double m1 = dxh.mean();
    double m2 = (dxh * cache.x_hat.row(i).array().transpose()).mean();
    dx.row(i) = ((dxh - m1 - cache.x_hat.row(i).array().transpose() * m2) * cache.inv_std(i))
                    .matrix()
                    .transpose();
  }
  return dx;
}

Mat softmax_rows(const Mat& scores) {
  Mat probs(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double mx = scores.row(i).maxCoeff();
    Eigen::ArrayXd e = (scores.row(i).array() - mx).exp();
    probs.row(i) = (e / e.sum()).matrix();
  }
  return probs;
}

// Inverted dropout; mask entries are 0 or 1/(1-p).
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Mat mask(rows, cols);
  const double keep = 1.0 - p;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      mask(i, j) = rng.next_double() < keep ? 1.0 / keep : 0.0;
  return mask;
}

}  // namespace

Vec log_softmax(const Vec& logits) {
  double mx = logits.maxCoeff();
  double lse = std::log((logits.array() - mx).exp().sum()) + mx;
  return logits.array() - lse;
}

Params Params::zeros_like(const Params& other) {
  Params zeros = other;
  visit_tensors([](const std::string&, auto& tensor) { tensor.setZero(); }, zeros);
  return zeros;
}

bool Params::all_finite() const {
  bool finite = true;
  visit_tensors(
      [&](const std::string&, const auto& tensor) { finite = finite && tensor.allFinite(); },
      *this);
  return finite;
}

std::int64_t Params::tensor_count() const {
  std::int64_t count = 0;
  visit_tensors([&](const std::string&, const auto&) { ++count; }, *this);
  return count;
}

std::int64_t Params::coefficient_count() const {
  std::int64_t count = 0;
  visit_tensors([&](const std::string&, const auto& tensor) { count += tensor.size(); }, *this);
  return count;
}

Encoder::Encoder(const EncoderConfig& config) : config_(config) {
  if (config.vocab_size < 1 || config.d_model < 1 || config.n_layers < 1 || config.n_heads < 1 ||
      config.d_ff < 1 || config.max_len < 1)
    raise(ErrorKind::InvalidConfig, "all dimensions must be positive");
  if (config.d_model % config.n_heads != 0)
    raise(ErrorKind::InvalidConfig, "d_model " + std::to_string(config.d_model) +
                                        " not divisible by n_heads " + std::to_string(config.n_heads));
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    raise(ErrorKind::InvalidConfig, "dropout must be in [0, 1)");

  const auto d = config.d_model;
  params_.tok_emb.resize(config.vocab_size, d);
  params_.pos_emb.resize(config.max_len, d);
  params_.emb_ln_g = Vec::Ones(d);
  params_.emb_ln_b = Vec::Zero(d);
  params_.layers.resize(config.n_layers);
  for (auto& layer : params_.layers) {
    layer.wq.resize(d, d);
    layer.wk.resize(d, d);
    layer.wv.resize(d, d);
    layer.wo.resize(d, d);
    layer.bq = Vec::Zero(d);
    layer.bk = Vec::Zero(d);
    layer.bv = Vec::Zero(d);
    layer.bo = Vec::Zero(d);
    layer.ln1_g = Vec::Ones(d);
    layer.ln1_b = Vec::Zero(d);
    layer.ln2_g = Vec::Ones(d);
    layer.ln2_b = Vec::Zero(d);
    layer.w1.resize(d, config.d_ff);
    layer.b1 = Vec::Zero(config.d_ff);
    layer.w2.resize(config.d_ff, d);
    layer.b2 = Vec::Zero(d);
  }
  params_.final_ln_g = Vec::Ones(d);
  params_.final_ln_b = Vec::Zero(d);
  params_.head_w.resize(d, d);
  params_.head_b = Vec::Zero(d);
  params_.head_ln_g = Vec::Ones(d);
  params_.head_ln_b = Vec::Zero(d);
  params_.out_bias = Vec::Zero(config.vocab_size);

  // Scaled-uniform init, deterministic in visitation order. Embeddings use a
  // small fixed scale so the tied output layer starts near-flat; weight
  // matrices use Glorot limits. Residual output projections (wo, w2) start at
  // zero, so the untuned model is an identity map from token embedding to
  // prediction and fades the attention/FFN branches in during tuning.
  Rng rng(config.seed);
  visit_tensors(
      [&](const std::string& name, auto& tensor) {
        using T = std::decay_t<decltype(tensor)>;
        if constexpr (std::is_same_v<T, Mat>) {
          bool residual_out = name.ends_with(".wo") || name.ends_with(".w2");
          double limit = std::sqrt(6.0 / static_cast<double>(tensor.rows() + tensor.cols()));
          if (name == "tok_emb") limit = kTokenInitScale;
          else if (name == "pos_emb") limit = kPosInitScale;
          for (Eigen::Index i = 0; i < tensor.rows(); ++i)
            for (Eigen::Index j = 0; j < tensor.cols(); ++j) {
              double draw = rng.next_uniform(limit);  // fixed stream layout
              tensor(i, j) = residual_out ? 0.0 : draw;
            }
        }
        // Vectors keep their ones/zeros init.
      },
      params_);
}

Encoder::Encoder(const Encoder& other)
    : config_(other.config_), params_(other.params_), added_tokens_(other.added_tokens_) {
  forward_calls_.store(other.forward_calls_.load());
}

Encoder& Encoder::operator=(const Encoder& other) {
  if (this != &other) {
    config_ = other.config_;
    params_ = other.params_;
    added_tokens_ = other.added_tokens_;
    forward_calls_.store(other.forward_calls_.load());
  }
  return *this;
}

std::optional<TokenId> Encoder::added_token_id(const std::string& name) const {
  for (const auto& [token_name, id] : added_tokens_)
    if (token_name == name) return id;
  return std::nullopt;
}

void Encoder::restore_added_token(const std::string& name, TokenId id) {
  if (id < 0 || id >= config_.vocab_size)
    raise(ErrorKind::OutOfRange, "added token id " + std::to_string(id) + " outside vocab");
  added_tokens_.emplace_back(name, id);
}

Vec Encoder::default_new_token_embedding(std::uint64_t salt) const {
  Rng rng(derive_seed(config_.seed, "new-token") ^ salt);
  Vec embedding(config_.d_model);
  for (Eigen::Index i = 0; i < embedding.size(); ++i)
    embedding(i) = rng.next_uniform(kTokenInitScale);
  return embedding;
}

Vec Encoder::token_embedding(TokenId id) const {
  if (id < 0 || id >= config_.vocab_size)
    raise(ErrorKind::OutOfRange, "token id " + std::to_string(id));
  return params_.tok_emb.row(id).transpose();
}

TokenId Encoder::extend_vocab(const Vec& embedding, const std::string& name) {
  if (embedding.size() != config_.d_model)
    raise(ErrorKind::DimensionMismatch, "embedding length " + std::to_string(embedding.size()) +
                                            " != d_model " + std::to_string(config_.d_model));
  TokenId id = config_.vocab_size;
  params_.tok_emb.conservativeResize(config_.vocab_size + 1, Eigen::NoChange);
  params_.tok_emb.row(id) = embedding.transpose();
  params_.out_bias.conservativeResize(config_.vocab_size + 1);
  params_.out_bias(id) = 0.0;
  config_.vocab_size += 1;
  added_tokens_.emplace_back(name, id);
  return id;
}

struct Encoder::Cache {
  std::vector<TokenId> ids;
  Mat x0;
  LnCache ln_emb;
  Mat emb_mask;
  Mat x0n;
  struct Layer {
    Mat x_in;
    LnCache ln1;
    Mat a, q, k, v;
    std::vector<Mat> attn;
    Mat concat;
    Mat attn_out;
    Mat o_mask;
    Mat x_mid;
    LnCache ln2;
    Mat b, h1, g;
    Mat f_mask;
  };
  std::vector<Layer> layers;
  Mat x_final;
  LnCache ln_f;
  Mat xf, t1, t2;
  LnCache ln_h;
  Mat t;
};

Mat Encoder::run_forward(const std::vector<TokenId>& ids, Cache* cache, Rng* dropout_rng) const {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n > config_.max_len)
    raise(ErrorKind::SequenceTooLong,
          std::to_string(n) + " tokens > max_len " + std::to_string(config_.max_len));
  const auto d = config_.d_model;
  const auto heads = config_.n_heads;
  const auto dh = config_.head_dim();
  const double alpha = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool train = dropout_rng != nullptr && config_.dropout > 0.0;

  Mat x0(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    TokenId id = ids[i];
    if (id < 0 || id >= config_.vocab_size)
      raise(ErrorKind::UnknownId, "token id " + std::to_string(id));
    x0.row(i) = params_.tok_emb.row(id);
  }
  // Positions feed attention queries and keys only; keeping them out of the
  // residual stream makes the per-token prediction invariant to the position
  // shifts that variable-length parameters cause.
  auto positions = params_.pos_emb.topRows(n);

  LnCache ln_emb;
  Mat x = layer_norm(x0, params_.emb_ln_g, params_.emb_ln_b, ln_emb);
  Mat emb_mask;
  if (train) {
    emb_mask = dropout_mask(n, d, config_.dropout, *dropout_rng);
    x.array() *= emb_mask.array();
  }
  if (cache) {
    cache->ids = ids;
    cache->x0 = x0;
    cache->ln_emb = ln_emb;
    cache->emb_mask = emb_mask;
    cache->x0n = x;
    cache->layers.resize(config_.n_layers);
  }

  for (std::int32_t l = 0; l < config_.n_layers; ++l) {
    const auto& layer = params_.layers[l];
    Cache::Layer* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) lc->x_in = x;

    LnCache ln1;
    Mat a = layer_norm(x, layer.ln1_g, layer.ln1_b, ln1);
    Mat a_pos = a + positions;
    Mat q = a_pos * layer.wq;
    q.array().rowwise() += layer.bq.transpose().array();
    Mat k = a_pos * layer.wk;
    k.array().rowwise() += layer.bk.transpose().array();
    Mat v = a * layer.wv;
    v.array().rowwise() += layer.bv.transpose().array();

    Mat concat(n, d);
    std::vector<Mat> attn(heads);
    for (std::int32_t h = 0; h < heads; ++h) {
      auto qh = q.middleCols(h * dh, dh);
      auto kh = k.middleCols(h * dh, dh);
      auto vh = v.middleCols(h * dh, dh);
      Mat scores = (qh * kh.transpose()) * alpha;
      attn[h] = softmax_rows(scores);
      concat.middleCols(h * dh, dh) = attn[h] * vh;
    }
    Mat attn_out = concat * layer.wo;
    attn_out.array().rowwise() += layer.bo.transpose().array();

    Mat o_mask;
    Mat o_dropped = attn_out;
    if (train) {
      o_mask = dropout_mask(n, d, config_.dropout, *dropout_rng);
      o_dropped.array() *= o_mask.array();
    }
    Mat x_mid = x + o_dropped;

    LnCache ln2;
    Mat b = layer_norm(x_mid, layer.ln2_g, layer.ln2_b, ln2);
    Mat h1 = b * layer.w1;
    h1.array().rowwise() += layer.b1.transpose().array();
    Mat g = h1.unaryExpr([](double u) { return gelu(u); });
    Mat ffn_out = g * layer.w2;
    ffn_out.array().rowwise() += layer.b2.transpose().array();

    Mat f_mask;
    if (train) {
      f_mask = dropout_mask(n, d, config_.dropout, *dropout_rng);
      ffn_out.array() *= f_mask.array();
    }
    Mat x_next = x_mid + ffn_out;

    if (lc) {
      lc->ln1 = ln1;
      lc->a = a;
      lc->q = q;
      lc->k = k;
      lc->v = v;
      lc->attn = attn;
      lc->concat = concat;
      lc->attn_out = attn_out;
      lc->o_mask = o_mask;
      lc->x_mid = x_mid;
      lc->ln2 = ln2;
      lc->b = b;
      lc->h1 = h1;
      lc->g = g;
      lc->f_mask = f_mask;
    }
    x = std::move(x_next);
  }

  LnCache ln_f;
  Mat xf = layer_norm(x, params_.final_ln_g, params_.final_ln_b, ln_f);
  Mat t1 = xf * params_.head_w;
  t1.array().rowwise() += params_.head_b.transpose().array();
  Mat t2 = t1.unaryExpr([](double v) { return gelu(v); });
  LnCache ln_h;
  Mat t = layer_norm(t2, params_.head_ln_g, params_.head_ln_b, ln_h);

  Mat logits = (t * params_.tok_emb.transpose()) * kLogitScale;
  logits.array().rowwise() += params_.out_bias.transpose().array();

  if (cache) {
    cache->x_final = x;
    cache->ln_f = ln_f;
    cache->xf = xf;
    cache->t1 = t1;
    cache->t2 = t2;
    cache->ln_h = ln_h;
    cache->t = t;
  }
  return logits;
}

Mat Encoder::forward(const std::vector<TokenId>& ids) const {
  forward_calls_.fetch_add(1, std::memory_order_relaxed);
  return run_forward(ids, nullptr, nullptr);
}

std::vector<std::pair<TokenId, double>> Encoder::top_k_at(const std::vector<TokenId>& ids,
                                                          size_t position, std::int32_t k) const {
  if (position >= ids.size())
    raise(ErrorKind::OutOfRange, "position " + std::to_string(position) + " >= sequence length " +
                                     std::to_string(ids.size()));
  if (k < 1 || k > config_.vocab_size)
    raise(ErrorKind::OutOfRange, "k " + std::to_string(k) + " outside [1, vocab_size]");
  Mat logits = forward(ids);
  Vec log_probs = log_softmax(logits.row(position).transpose());
  std::vector<std::pair<TokenId, double>> ranked(config_.vocab_size);
  for (std::int32_t t = 0; t < config_.vocab_size; ++t)
    ranked[t] = {t, std::exp(log_probs(t))};
  std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  ranked.resize(k);
  return ranked;
}

void Encoder::run_backward(const Cache& cache, const Mat& dlogits, Params& grads) const {
  const auto n = dlogits.rows();
  const auto d = config_.d_model;
  const auto heads = config_.n_heads;
  const auto dh = config_.head_dim();
  const double alpha = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool train = cache.emb_mask.size() > 0;

  // Tied output projection.
  Mat dt = (dlogits * params_.tok_emb) * kLogitScale;
  grads.tok_emb.noalias() += kLogitScale * (dlogits.transpose() * cache.t);
  grads.out_bias.noalias() += dlogits.colwise().sum().transpose();

  Mat dt2 = layer_norm_backward(dt, cache.ln_h, params_.head_ln_g, grads.head_ln_g, grads.head_ln_b);
  Mat dt1 = dt2.array() * cache.t1.unaryExpr([](double v) { return gelu_grad(v); }).array();
  Mat dxf = dt1 * params_.head_w.transpose();
  grads.head_w.noalias() += cache.xf.transpose() * dt1;
  grads.head_b.noalias() += dt1.colwise().sum().transpose();

  Mat dx = layer_norm_backward(dxf, cache.ln_f, params_.final_ln_g, grads.final_ln_g, grads.final_ln_b);

  for (std::int32_t l = config_.n_layers - 1; l >= 0; --l) {
    const auto& layer = params_.layers[l];
    const auto& lc = cache.layers[l];
    auto& gl = grads.layers[l];

    // FFN block: x_next = x_mid + dropout(ffn_out)
    Mat dffn = train ? Mat(dx.array() * lc.f_mask.array()) : dx;
    Mat dg = dffn * layer.w2.transpose();
    gl.w2.noalias() += lc.g.transpose() * dffn;
    gl.b2.noalias() += dffn.colwise().sum().transpose();
    Mat dh1 = dg.array() * lc.h1.unaryExpr([](double v) { return gelu_grad(v); }).array();
    Mat db = dh1 * layer.w1.transpose();
    gl.w1.noalias() += lc.b.transpose() * dh1;
    gl.b1.noalias() += dh1.colwise().sum().transpose();
    Mat dx_mid = dx + layer_norm_backward(db, lc.ln2, layer.ln2_g, gl.ln2_g, gl.ln2_b);

    // Attention block: x_mid = x_in + dropout(attn_out)
    Mat do_out = train ? Mat(dx_mid.array() * lc.o_mask.array()) : dx_mid;
    Mat dconcat = do_out * layer.wo.transpose();
    gl.wo.noalias() += lc.concat.transpose() * do_out;
    gl.bo.noalias() += do_out.colwise().sum().transpose();

    Mat dq = Mat::Zero(n, d);
    Mat dk = Mat::Zero(n, d);
    Mat dv = Mat::Zero(n, d);
    for (std::int32_t h = 0; h < heads; ++h) {
      auto qh = lc.q.middleCols(h * dh, dh);
      auto kh = lc.k.middleCols(h * dh, dh);
      auto vh = lc.v.middleCols(h * dh, dh);
      const Mat& probs = lc.attn[h];
      Mat dch = dconcat.middleCols(h * dh, dh);
      Mat dp = dch * vh.transpose();
      dv.middleCols(h * dh, dh).noalias() += probs.transpose() * dch;
      // softmax backward per row
      Mat ds(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double dot = dp.row(i).dot(probs.row(i));
        ds.row(i) = (dp.row(i).array() - dot) * probs.row(i).array();
      }
      ds *= alpha;
      dq.middleCols(h * dh, dh).noalias() += ds * kh;
      dk.middleCols(h * dh, dh).noalias() += ds.transpose() * qh;
    }

    Mat dqk_input = dq * layer.wq.transpose() + dk * layer.wk.transpose();
    Mat da = dqk_input + dv * layer.wv.transpose();
    grads.pos_emb.topRows(n).noalias() += dqk_input;
    Mat a_pos = lc.a + params_.pos_emb.topRows(n);
    gl.wq.noalias() += a_pos.transpose() * dq;
    gl.wk.noalias() += a_pos.transpose() * dk;
    gl.wv.noalias() += lc.a.transpose() * dv;
    gl.bq.noalias() += dq.colwise().sum().transpose();
    gl.bk.noalias() += dk.colwise().sum().transpose();
    gl.bv.noalias() += dv.colwise().sum().transpose();

    dx = dx_mid + layer_norm_backward(da, lc.ln1, layer.ln1_g, gl.ln1_g, gl.ln1_b);
  }

  if (train) dx.array() *= cache.emb_mask.array();
  Mat dx0 = layer_norm_backward(dx, cache.ln_emb, params_.emb_ln_g, grads.emb_ln_g, grads.emb_ln_b);
  for (Eigen::Index i = 0; i < n; ++i) grads.tok_emb.row(cache.ids[i]) += dx0.row(i);
}

namespace {

// Mean NLL over non-PAD positions plus its dlogits, shared by loss paths.
double nll_and_dlogits(const Mat& logits, const std::vector<TokenId>& targets, double scale,
                       Mat* dlogits) {
  const auto n = logits.rows();
  if (static_cast<size_t>(n) != targets.size())
    raise(ErrorKind::ShapeMismatch, "logits rows " + std::to_string(n) + " != targets " +
                                        std::to_string(targets.size()));
  std::int64_t live = 0;
  for (TokenId t : targets)
    if (t != Tokenizer::kPadId) ++live;
  if (live == 0) raise(ErrorKind::ShapeMismatch, "no non-PAD positions in targets");

  if (dlogits) dlogits->setZero(n, logits.cols());
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(live);
  for (Eigen::Index i = 0; i < n; ++i) {
    TokenId target = targets[i];
    if (target == Tokenizer::kPadId) continue;
    if (target < 0 || target >= logits.cols())
      raise(ErrorKind::ShapeMismatch, "target id " + std::to_string(target) + " outside vocab");
    Vec log_probs = log_softmax(logits.row(i).transpose());
    total -= log_probs(target) * inv;
    if (dlogits) {
      dlogits->row(i) = (log_probs.array().exp() * inv * scale).matrix().transpose();
      (*dlogits)(i, target) -= inv * scale;
    }
  }
  return total;
}

}  // namespace

double Encoder::loss(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets) const {
  Mat logits = run_forward(ids, nullptr, nullptr);
  return nll_and_dlogits(logits, targets, 1.0, nullptr);
}

double Encoder::loss_and_grad(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets,
                              double scale, Params& grads, Rng* dropout_rng) {
  Cache cache;
  Mat logits = run_forward(ids, &cache, dropout_rng);
  Mat dlogits;
  double value = nll_and_dlogits(logits, targets, scale, &dlogits);
  run_backward(cache, dlogits, grads);
  return value;
}

double Encoder::grad_check(const std::vector<TokenId>& ids, const std::vector<TokenId>& targets,
                           std::int32_t probes_per_tensor, std::uint64_t probe_seed) {
  Params grads = Params::zeros_like(params_);
  loss_and_grad(ids, targets, 1.0, grads, nullptr);

  constexpr double base_step = 1e-3;
  Rng rng(probe_seed);
  double max_rel = 0.0;
  visit_tensors(
      [&](const std::string&, auto& theta, auto& grad) {
        const auto size = theta.size();
        if (size == 0) return;
        for (std::int32_t p = 0; p < probes_per_tensor; ++p) {
          Eigen::Index index = static_cast<Eigen::Index>(rng.next_below(size));
          double saved = theta.data()[index];
          // Relative step: an absolute 1e-3 nudge on a 0.01-scale embedding
          // coordinate measures layer-norm curvature instead of the gradient,
          // so the step tracks the coordinate's own scale (double precision
          // keeps the difference quotient meaningful at these step sizes).
          double step = base_step * std::max(std::abs(saved), 1e-2);
          theta.data()[index] = saved + step;
          double plus = loss(ids, targets);
          theta.data()[index] = saved - step;
          double minus = loss(ids, targets);
          theta.data()[index] = saved;
          double fd = (plus - minus) / (2.0 * step);
          double analytic = grad.data()[index];
          // Near-zero coordinates compare on absolute terms: the floor keeps
          // truncation noise from swamping a 0-vs-0 comparison while a
          // genuinely wrong gradient still shows up at its own magnitude.
          double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-2});
          max_rel = std::max(max_rel, rel);
        }
      },
      params_, grads);
  return max_rel;
}

}  // namespace logtex
