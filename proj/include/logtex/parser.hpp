#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logtex/encoder.hpp"
#include "logtex/tokenizer.hpp"

namespace logtex {

struct ParseResult {
  std::string message;
  std::string template_text;
  std::vector<std::string> params;
  std::vector<std::pair<std::string, TokenId>> per_token;  // (subword text, predicted id)
};

struct TemplateGroup {
  std::string template_text;
  std::vector<std::int64_t> member_line_ids;
};

// Collapses placeholder runs separated by nothing or whitespace into one
// placeholder. Idempotent.
std::string postprocess(const std::string& template_text);

class Parser {
 public:
  Parser(const LmBackend& model, const Tokenizer& tokenizer);

  // One forward pass; whitespace-delimited words become parameters when any
  // of their subwords predicts PARAM, and maximal parameter-word runs turn
  // into a single placeholder.
  ParseResult parse_message(const std::string& message) const;

  // Order-preserving, identical to sequential parse_message calls.
  std::vector<ParseResult> parse_batch(const std::vector<std::string>& messages,
                                       std::int32_t batch_size = 32) const;

  std::int64_t truncation_warnings() const { return truncated_; }

 private:
  const LmBackend& model_;
  const Tokenizer& tokenizer_;
  TokenId param_id_;
  mutable std::atomic<std::int64_t> truncated_{0};
};

std::vector<TemplateGroup> group_templates(const std::vector<ParseResult>& results);

}  // namespace logtex
