#include "logtex/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

#include "logtex/error.hpp"

namespace logtex {

namespace {

bool is_space_byte(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_digit_byte(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_letter_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;  // utf-8 tails count as letters
}

// letters / digits / punctuation form separate runs inside a word
int byte_category(unsigned char c) {
  if (is_letter_byte(c)) return 0;
  if (is_digit_byte(c)) return 1;
  return 2;
}

}  // namespace

Tokenizer::Tokenizer() {
  tokens_.reserve(258);
  tokens_.push_back("<pad>");
  tokens_.push_back("<mask>");
  for (int b = 0; b < 256; ++b) tokens_.push_back(std::string(1, static_cast<char>(b)));
}

void Tokenizer::add_merge(TokenId left, TokenId right) {
  TokenId merged = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(tokens_[left] + tokens_[right]);
  merge_rank_[{left, right}] = {static_cast<std::int32_t>(merges_.size()), merged};
  merges_.push_back({left, right});
}

const std::string& Tokenizer::token_text(TokenId id) const {
  if (id < 0 || id >= vocab_size()) raise(ErrorKind::UnknownId, "token id " + std::to_string(id));
  return tokens_[id];
}

std::vector<std::pair<size_t, size_t>> Tokenizer::pretokenize(const std::string& text) {
  std::vector<std::pair<size_t, size_t>> chunks;
  const size_t n = text.size();

  // One letter/digit/punctuation run, the given start may include a leading
  // space already consumed by the caller.
  auto emit_runs = [&](size_t start, size_t word_begin, size_t word_end) {
    size_t run_start = start;
    size_t i = word_begin;
    int category = byte_category(text[i]);
    ++i;
    while (i < word_end) {
      int next = byte_category(text[i]);
      if (next != category) {
        chunks.emplace_back(run_start, i);
        run_start = i;
        category = next;
      }
      ++i;
    }
    chunks.emplace_back(run_start, word_end);
  };

  size_t i = 0;
  while (i < n) {
    if (is_space_byte(text[i])) {
      size_t j = i;
      while (j < n && is_space_byte(text[j])) ++j;
      if (j < n && text[j - 1] == ' ') {
        // Last space of the run joins the following word.
        if (j - 1 > i) chunks.emplace_back(i, j - 1);
        size_t k = j;
        while (k < n && !is_space_byte(text[k])) ++k;
        emit_runs(j - 1, j, k);
        i = k;
      } else {
        chunks.emplace_back(i, j);
        i = j;
      }
    } else {
      size_t k = i;
      while (k < n && !is_space_byte(text[k])) ++k;
      emit_runs(i, i, k);
      i = k;
    }
  }
  return chunks;
}

Tokenizer Tokenizer::train(const std::vector<std::string>& corpus, std::int32_t vocab_size) {
  if (vocab_size < 256 + kSpecialCount)
    raise(ErrorKind::VocabTooSmall, "vocab_size " + std::to_string(vocab_size) + " < " +
                                        std::to_string(256 + kSpecialCount));
  Tokenizer tokenizer;

  // Unique pretokens with multiplicities.
  std::unordered_map<std::string, std::int64_t> pretoken_counts;
  for (const auto& line : corpus) {
    for (auto [start, end] : pretokenize(line))
      pretoken_counts[line.substr(start, end - start)] += 1;
  }

  struct Word {
    std::vector<TokenId> ids;
    std::int64_t count;
  };
  std::vector<Word> words;
  words.reserve(pretoken_counts.size());
  for (const auto& [bytes, count] : pretoken_counts) {
    Word word;
    word.count = count;
    word.ids.reserve(bytes.size());
    for (unsigned char c : bytes) word.ids.push_back(kByteBase + c);
    words.push_back(std::move(word));
  }
  // Fixed order so training does not depend on hash iteration.
  std::sort(words.begin(), words.end(),
            [&](const Word& a, const Word& b) { return a.ids < b.ids; });

  // Digits never merge: numeric values decompose into the ten digit tokens,
  // which keeps unseen values made of seen pieces.
  auto is_digit_token = [](TokenId id) {
    return id >= kByteBase && id < kByteBase + 256 &&
           is_digit_byte(static_cast<unsigned char>(id - kByteBase));
  };

  while (tokenizer.vocab_size() < vocab_size) {
    std::map<std::pair<TokenId, TokenId>, std::int64_t> pair_counts;
    for (const auto& word : words) {
      for (size_t i = 0; i + 1 < word.ids.size(); ++i) {
        if (is_digit_token(word.ids[i]) || is_digit_token(word.ids[i + 1])) continue;
        pair_counts[{word.ids[i], word.ids[i + 1]}] += word.count;
      }
    }
    std::pair<TokenId, TokenId> best{};
    std::int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {  // ties: smallest (left, right) via map order
        best_count = count;
        best = pair;
      }
    }
    if (best_count < 2) break;  // nothing left worth merging

    TokenId merged = tokenizer.vocab_size();
    tokenizer.add_merge(best.first, best.second);
    for (auto& word : words) {
      auto& ids = word.ids;
      size_t write = 0;
      for (size_t read = 0; read < ids.size(); ++read) {
        if (read + 1 < ids.size() && ids[read] == best.first && ids[read + 1] == best.second) {
          ids[write++] = merged;
          ++read;
        } else {
          ids[write++] = ids[read];
        }
      }
      ids.resize(write);
    }
  }
  return tokenizer;
}

Tokenizer::Sequence Tokenizer::encode(const std::string& text) const {
  Sequence sequence;
  sequence.source = text;

  struct Piece {
    TokenId id;
    size_t start, end;
  };
  std::vector<Piece> pieces;
  for (auto [chunk_start, chunk_end] : pretokenize(text)) {
    pieces.clear();
    for (size_t i = chunk_start; i < chunk_end; ++i)
      pieces.push_back({static_cast<TokenId>(kByteBase + static_cast<unsigned char>(text[i])), i, i + 1});

    // Merge the lowest-ranked adjacent pair until none applies.
    while (pieces.size() > 1) {
      std::int32_t best_rank = -1;
      size_t best_index = 0;
      TokenId best_merged = 0;
      for (size_t i = 0; i + 1 < pieces.size(); ++i) {
        auto it = merge_rank_.find({pieces[i].id, pieces[i + 1].id});
        if (it == merge_rank_.end()) continue;
        if (best_rank < 0 || it->second.first < best_rank) {
          best_rank = it->second.first;
          best_index = i;
          best_merged = it->second.second;
        }
      }
      if (best_rank < 0) break;
      pieces[best_index].id = best_merged;
      pieces[best_index].end = pieces[best_index + 1].end;
      pieces.erase(pieces.begin() + best_index + 1);
    }

    for (const auto& piece : pieces) {
      sequence.ids.push_back(piece.id);
      sequence.offsets.emplace_back(piece.start, piece.end);
    }
  }
  return sequence;
}

std::string Tokenizer::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id < 0 || id >= vocab_size()) raise(ErrorKind::UnknownId, "token id " + std::to_string(id));
    if (id < kSpecialCount) continue;  // specials carry no bytes
    out += tokens_[id];
  }
  return out;
}

namespace {

std::string to_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 0xf];
  }
  return out;
}

}  // namespace

std::string Tokenizer::serialize() const {
  std::ostringstream out;
  out << "tokenizer v1\n";
  out << "vocab " << vocab_size() << "\n";
  for (TokenId id = 0; id < vocab_size(); ++id) {
    if (id < kSpecialCount) out << tokens_[id] << "\n";
    else out << to_hex(tokens_[id]) << "\n";
  }
  out << "merges " << merges_.size() << "\n";
  for (const auto& merge : merges_) out << merge.left << " " << merge.right << "\n";
  return out.str();
}

Tokenizer Tokenizer::deserialize(const std::string& block) {
  std::istringstream in(block);
  std::string word, version;
  in >> word >> version;
  if (word != "tokenizer" || version != "v1")
    raise(ErrorKind::VersionMismatch, "unsupported tokenizer block \"" + word + " " + version + "\"");

  std::int32_t vocab_count = 0;
  in >> word >> vocab_count;
  if (word != "vocab" || vocab_count < 256 + kSpecialCount)
    raise(ErrorKind::CorruptContainer, "tokenizer block missing vocab");
  std::vector<std::string> entries(vocab_count);
  for (auto& entry : entries) {
    if (!(in >> entry)) raise(ErrorKind::CorruptContainer, "truncated tokenizer vocab");
  }

  size_t merge_count = 0;
  in >> word >> merge_count;
  if (word != "merges") raise(ErrorKind::CorruptContainer, "tokenizer block missing merges");
  Tokenizer tokenizer;
  for (size_t i = 0; i < merge_count; ++i) {
    TokenId left, right;
    if (!(in >> left >> right)) raise(ErrorKind::CorruptContainer, "truncated tokenizer merges");
    if (left < 0 || left >= tokenizer.vocab_size() || right < 0 || right >= tokenizer.vocab_size())
      raise(ErrorKind::CorruptContainer, "merge refers to unknown token id");
    tokenizer.add_merge(left, right);
  }

  // The stored vocab must agree with what the merges rebuild.
  if (tokenizer.vocab_size() != vocab_count)
    raise(ErrorKind::CorruptContainer, "tokenizer vocab count does not match merges");
  for (TokenId id = 0; id < tokenizer.vocab_size(); ++id) {
    const std::string expected =
        id < kSpecialCount ? tokenizer.tokens_[id] : to_hex(tokenizer.tokens_[id]);
    if (entries[id] != expected)
      raise(ErrorKind::CorruptContainer, "tokenizer vocab entry " + std::to_string(id) +
                                             " does not match its merge reconstruction");
  }
  return tokenizer;
}

}  // namespace logtex
