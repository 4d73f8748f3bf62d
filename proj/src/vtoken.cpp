#include "logtex/vtoken.hpp"

#include <algorithm>
#include <fstream>

#include "logtex/error.hpp"
#include "logtex/trainer.hpp"

namespace logtex {

std::map<TokenId, std::int64_t> build_initial_set(const LmBackend& model,
                                                  const Tokenizer& tokenizer,
                                                  const std::vector<LabeledExample>& d_train,
                                                  std::int32_t k_top) {
  if (d_train.empty()) raise(ErrorKind::ValidationError, "empty training set");
  if (k_top < 1) raise(ErrorKind::ConfigError, "k_top must be >= 1");

  std::map<TokenId, std::int64_t> v_ini;
  std::int64_t positions = 0;
  const size_t max_len = static_cast<size_t>(model.max_len());
  for (const auto& example : d_train) {
    Tokenizer::Sequence tokens = tokenizer.encode(example.message);
    if (tokens.ids.empty()) continue;
    ParamExtraction extraction = match_template(example.message, example.template_text);
    if (extraction.param_spans.empty()) continue;
    if (tokens.ids.size() > max_len) {
      tokens.ids.resize(max_len);
      tokens.offsets.resize(max_len);
    }
    // The raw message is fed unmasked; predictions are read per position.
    for (size_t i = 0; i < tokens.ids.size(); ++i) {
      auto [tok_start, tok_end] = tokens.offsets[i];
      bool is_param = false;
      for (auto [start, end] : extraction.param_spans) {
        if (tok_start < end && start < tok_end) {
          is_param = true;
          break;
        }
      }
      if (!is_param) continue;
      ++positions;
      for (auto [token, prob] : model.top_k_at(tokens.ids, i, k_top)) {
        (void)prob;
        // Specials and previously added tokens cannot serve as label words.
        if (token < Tokenizer::kSpecialCount) continue;
        if (token >= tokenizer.vocab_size()) continue;
        v_ini[token] += 1;
      }
    }
  }
  if (positions == 0)
    raise(ErrorKind::NoParameterPositions, "no labeled example contains a parameter");
  return v_ini;
}

std::vector<TokenId> rank_frequency(const std::map<TokenId, std::int64_t>& v_ini,
                                    const Dataset& corpus, const Tokenizer& tokenizer,
                                    std::int32_t m,
                                    std::map<TokenId, std::int64_t>* phi_out) {
  if (v_ini.empty()) raise(ErrorKind::ValidationError, "empty candidate set");
  if (m < 1) raise(ErrorKind::ConfigError, "m must be >= 1");

  std::map<TokenId, std::int64_t> phi;
  for (const auto& [token, count] : v_ini) phi[token] = 0;
  for (const auto& record : corpus.records) {
    for (TokenId id : tokenizer.encode(record.content).ids) {
      auto it = phi.find(id);
      if (it != phi.end()) it->second += 1;
    }
  }
  if (phi_out) *phi_out = phi;

  std::vector<TokenId> ranked;
  ranked.reserve(v_ini.size());
  for (const auto& [token, count] : v_ini) ranked.push_back(token);
  std::sort(ranked.begin(), ranked.end(), [&](TokenId a, TokenId b) {
    if (phi.at(a) != phi.at(b)) return phi.at(a) > phi.at(b);
    if (v_ini.at(a) != v_ini.at(b)) return v_ini.at(a) > v_ini.at(b);
    return a < b;
  });
  ranked.resize(std::min<size_t>(ranked.size(), static_cast<size_t>(m)));
  return ranked;
}

TokenId install_param_token(LmBackend& model, const std::vector<TokenId>& v_selected) {
  if (v_selected.empty()) raise(ErrorKind::EmptySelection, "no label tokens selected");
  Vec mean = Vec::Zero(model.embedding_dim());
  for (TokenId id : v_selected) {
    if (id < 0 || id >= model.vocab_size())
      raise(ErrorKind::OutOfRange, "label token id " + std::to_string(id));
    mean += model.token_embedding(id);
  }
  mean /= static_cast<double>(v_selected.size());
  return model.extend_vocab(mean, "PARAM");
}

VirtualTokenReport generate_param_token(LmBackend& model, const Tokenizer& tokenizer,
                                        const std::vector<LabeledExample>& d_train,
                                        const Dataset& corpus, const VTokenConfig& config) {
  VirtualTokenReport report;
  report.v_ini = build_initial_set(model, tokenizer, d_train, config.k_top);
  report.v_selected = rank_frequency(report.v_ini, corpus, tokenizer, config.m, &report.phi);
  if (config.mean_embedding) {
    report.param_token_id = install_param_token(model, report.v_selected);
  } else {
    report.param_token_id =
        model.extend_vocab(model.default_new_token_embedding(model.vocab_size()), "PARAM");
  }
  return report;
}

namespace {

std::string printable_token(const Tokenizer& tokenizer, TokenId id) {
  std::string out;
  for (unsigned char c : tokenizer.token_text(id)) {
    if (c >= 0x20 && c < 0x7f) out += static_cast<char>(c);
    else {
      static const char* digits = "0123456789abcdef";
      out += "\\x";
      out += digits[c >> 4];
      out += digits[c & 0xf];
    }
  }
  return out;
}

}  // namespace

void write_vtoken_report(const VirtualTokenReport& report, const Tokenizer& tokenizer,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write " + path.string());
  out << "param_token_id " << report.param_token_id << "\n";
  out << "selected " << report.v_selected.size() << "\n";
  for (TokenId id : report.v_selected)
    out << "  " << id << " \"" << printable_token(tokenizer, id) << "\" phi=" << report.phi.at(id)
        << " votes=" << report.v_ini.at(id) << "\n";
  out << "candidates " << report.v_ini.size() << "\n";
  for (const auto& [id, count] : report.v_ini)
    out << "  " << id << " \"" << printable_token(tokenizer, id) << "\" votes=" << count
        << " phi=" << report.phi.at(id) << "\n";
}

}  // namespace logtex
