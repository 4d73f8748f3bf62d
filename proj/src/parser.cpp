#include "logtex/parser.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "logtex/error.hpp"

namespace logtex {

namespace {

constexpr const char* kPlaceholder = "<*>";

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string postprocess(const std::string& template_text) {
  std::string out;
  size_t i = 0;
  const size_t n = template_text.size();
  while (i < n) {
    if (template_text.compare(i, 3, kPlaceholder) == 0) {
      // Swallow the whole run: further placeholders separated by nothing or
      // by whitespace only.
      size_t j = i + 3;
      while (true) {
        size_t k = j;
        while (k < n && is_space_byte(template_text[k])) ++k;
        if (template_text.compare(k, 3, kPlaceholder) == 0) j = k + 3;
        else break;
      }
      out += kPlaceholder;
      i = j;
    } else {
      out += template_text[i++];
    }
  }
  return out;
}

Parser::Parser(const LmBackend& model, const Tokenizer& tokenizer)
    : model_(model), tokenizer_(tokenizer) {
  auto id = model.added_token_id("PARAM");
  if (!id) raise(ErrorKind::ModelNotTrained, "model has no PARAM token installed");
  param_id_ = *id;
}

ParseResult Parser::parse_message(const std::string& message) const {
  ParseResult result;
  result.message = message;
  if (message.empty()) {
    result.template_text = "";
    return result;
  }

  Tokenizer::Sequence tokens = tokenizer_.encode(message);
  const size_t max_len = static_cast<size_t>(model_.max_len());
  size_t live = tokens.ids.size();
  if (live > max_len) {
    live = max_len;  // tail subwords default to keyword
    truncated_.fetch_add(1, std::memory_order_relaxed);
  }

  std::vector<TokenId> window(tokens.ids.begin(), tokens.ids.begin() + live);
  Mat logits = model_.forward(window);

  // Word spans: maximal runs of non-whitespace bytes.
  std::vector<std::pair<size_t, size_t>> words;
  {
    size_t i = 0;
    while (i < message.size()) {
      if (is_space_byte(message[i])) {
        ++i;
        continue;
      }
      size_t j = i;
      while (j < message.size() && !is_space_byte(message[j])) ++j;
      words.emplace_back(i, j);
      i = j;
    }
  }

  std::vector<bool> word_is_param(words.size(), false);
  result.per_token.reserve(live);
  for (size_t i = 0; i < live; ++i) {
    Eigen::Index argmax = 0;
    logits.row(i).maxCoeff(&argmax);
    TokenId predicted = static_cast<TokenId>(argmax);
    result.per_token.emplace_back(
        message.substr(tokens.offsets[i].first, tokens.offsets[i].second - tokens.offsets[i].first),
        predicted);
    if (predicted != param_id_) continue;
    auto [tok_start, tok_end] = tokens.offsets[i];
    for (size_t w = 0; w < words.size(); ++w) {
      if (tok_start < words[w].second && words[w].first < tok_end) word_is_param[w] = true;
    }
  }

  // Rebuild the message with maximal parameter-word runs replaced by one
  // placeholder; everything else passes through unchanged.
  std::string templ;
  size_t pos = 0;
  size_t w = 0;
  while (w < words.size()) {
    if (!word_is_param[w]) {
      templ.append(message, pos, words[w].second - pos);
      pos = words[w].second;
      ++w;
      continue;
    }
    size_t run_end = w;
    while (run_end + 1 < words.size() && word_is_param[run_end + 1]) ++run_end;
    templ.append(message, pos, words[w].first - pos);  // separator before the run
    templ += kPlaceholder;
    result.params.push_back(
        message.substr(words[w].first, words[run_end].second - words[w].first));
    pos = words[run_end].second;
    w = run_end + 1;
  }
  templ.append(message, pos, message.size() - pos);

  result.template_text = postprocess(templ);
  return result;
}

std::vector<ParseResult> Parser::parse_batch(const std::vector<std::string>& messages,
                                             std::int32_t batch_size) const {
  if (batch_size < 1) raise(ErrorKind::ConfigError, "batch_size must be >= 1");
  std::vector<ParseResult> results(messages.size());

  const size_t workers = std::max<size_t>(1, std::thread::hardware_concurrency());
  for (size_t batch_start = 0; batch_start < messages.size();
       batch_start += static_cast<size_t>(batch_size)) {
    const size_t batch_end =
        std::min(messages.size(), batch_start + static_cast<size_t>(batch_size));
    const size_t count = batch_end - batch_start;
    if (workers == 1 || count < 2) {
      for (size_t i = batch_start; i < batch_end; ++i) results[i] = parse_message(messages[i]);
      continue;
    }
    // Messages are independent, so per-index results match sequential runs.
    std::atomic<size_t> next{batch_start};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (size_t t = 0; t < std::min(workers, count); ++t) {
      pool.emplace_back([&] {
        while (true) {
          size_t i = next.fetch_add(1);
          if (i >= batch_end) break;
          try {
            results[i] = parse_message(messages[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            break;
          }
        }
      });
    }
    for (auto& thread : pool) thread.join();
    if (error) std::rethrow_exception(error);
  }
  return results;
}

std::vector<TemplateGroup> group_templates(const std::vector<ParseResult>& results) {
  std::vector<TemplateGroup> groups;
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < results.size(); ++i) {
    auto [it, inserted] = index.try_emplace(results[i].template_text, groups.size());
    if (inserted) groups.push_back({results[i].template_text, {}});
    groups[it->second].member_line_ids.push_back(static_cast<std::int64_t>(i + 1));
  }
  return groups;
}

}  // namespace logtex
