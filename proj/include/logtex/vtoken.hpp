#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "logtex/corpus.hpp"
#include "logtex/encoder.hpp"
#include "logtex/sampler.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex {

struct VTokenConfig {
  std::int32_t k_top = 8;      // predictions collected per parameter position
  std::int32_t m = 8;          // label tokens kept after frequency ranking
  bool mean_embedding = true;  // false: ablation, default new-token init
};

struct VirtualTokenReport {
  std::map<TokenId, std::int64_t> v_ini;       // candidate multiset
  std::vector<TokenId> v_selected;             // ranked label tokens
  std::map<TokenId, std::int64_t> phi;         // corpus frequency per candidate
  TokenId param_token_id = -1;
};

// Top-k predictions at every parameter-labeled subword position of the
// training set, accumulated into a multiset of candidate label tokens.
std::map<TokenId, std::int64_t> build_initial_set(const LmBackend& model,
                                                  const Tokenizer& tokenizer,
                                                  const std::vector<LabeledExample>& d_train,
                                                  std::int32_t k_top);

// Keeps the m candidates that occur most often in the tokenized unlabeled
// corpus; ties fall back to candidate multiplicity, then smaller id.
std::vector<TokenId> rank_frequency(const std::map<TokenId, std::int64_t>& v_ini,
                                    const Dataset& corpus, const Tokenizer& tokenizer,
                                    std::int32_t m,
                                    std::map<TokenId, std::int64_t>* phi_out = nullptr);

// Installs PARAM with the mean embedding of the selected tokens.
TokenId install_param_token(LmBackend& model, const std::vector<TokenId>& v_selected);

// Full pipeline; with mean_embedding=false PARAM gets the default init row.
VirtualTokenReport generate_param_token(LmBackend& model, const Tokenizer& tokenizer,
                                        const std::vector<LabeledExample>& d_train,
                                        const Dataset& corpus, const VTokenConfig& config);

void write_vtoken_report(const VirtualTokenReport& report, const Tokenizer& tokenizer,
                         const std::filesystem::path& path);

}  // namespace logtex
