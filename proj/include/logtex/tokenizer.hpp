#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace logtex {

using TokenId = std::int32_t;

// Byte-level BPE. Ids 0 and 1 are the PAD and MASK specials, ids 2..257 are
// the 256 single-byte tokens, higher ids are learned merges. Every byte
// string is encodable, so no unknown-token id exists.
class Tokenizer {
 public:
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kMaskId = 1;
  static constexpr TokenId kByteBase = 2;
  static constexpr TokenId kSpecialCount = 2;

  struct Merge {
    TokenId left = 0;
    TokenId right = 0;
  };

  Tokenizer();

  static Tokenizer train(const std::vector<std::string>& corpus, std::int32_t vocab_size);

  std::int32_t vocab_size() const { return static_cast<std::int32_t>(tokens_.size()); }
  const std::vector<Merge>& merges() const { return merges_; }

  // Raw byte string of a token. Specials render as "<pad>" / "<mask>".
  const std::string& token_text(TokenId id) const;

  struct Sequence {
    std::vector<TokenId> ids;
    std::vector<std::pair<size_t, size_t>> offsets;  // [byte_start, byte_end) into source
    std::string source;

    size_t size() const { return ids.size(); }
  };

  Sequence encode(const std::string& text) const;
  std::string decode(const std::vector<TokenId>& ids) const;

  // Serialization block embedded in the checkpoint container.
  std::string serialize() const;
  static Tokenizer deserialize(const std::string& block);

  // Pre-tokenization: whitespace-delimited chunks, a single leading space
  // sticking to the following word. Offsets tile the input.
  static std::vector<std::pair<size_t, size_t>> pretokenize(const std::string& text);

 private:
  void add_merge(TokenId left, TokenId right);

  std::vector<std::string> tokens_;           // id -> byte string
  std::vector<Merge> merges_;                 // in training order
  std::map<std::pair<TokenId, TokenId>, std::pair<std::int32_t, TokenId>> merge_rank_;
};

}  // namespace logtex
