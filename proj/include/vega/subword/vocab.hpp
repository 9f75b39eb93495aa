#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vega/core/text.hpp"
#include "vega/numerics/tensor.hpp"

namespace vega::subword {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kSpecialCount = 4;

/// Suffix marking the last symbol of a word.
inline constexpr const char* kEndOfWord = "</w>";

/// "<L1>" for language id "L1".
std::string language_token(const std::string& lang);

using Merge = std::pair<std::string, std::string>;

/// Byte-pair vocabulary: ordered merges, a bijective token table, and
/// reserved language tags that are never split.
class SubwordVocab {
 public:
  SubwordVocab(std::vector<std::string> tokens, std::vector<std::string> language_tokens,
               std::vector<Merge> merges);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Merge>& merges() const { return merges_; }
  const std::vector<std::string>& language_tokens() const { return language_tokens_; }

  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(const std::string& token) const;
  bool is_language_token(TokenId id) const;
  bool is_special(TokenId id) const { return id >= 0 && id < static_cast<TokenId>(kSpecialCount); }
  /// Id of the tag for a language id ("L1") or a tag ("<L1>").
  TokenId language_id(const std::string& lang) const;

  /// Splits one word into subword pieces by applying merges in rank order.
  std::vector<std::string> segment(const std::string& word) const;

  /// Encodes a sentence; a language tag, when given, becomes id[0].
  /// Throws InvalidArgument for a tag outside language_tokens().
  std::vector<TokenId> encode(const Sentence& sentence,
                              const std::optional<std::string>& lang_token = std::nullopt) const;

  /// Inverse of encode. Special and language tokens are dropped; throws
  /// InvalidArgument for ids outside the vocabulary.
  Sentence decode(const std::vector<TokenId>& ids) const;

  void save(const std::string& path) const;
  static SubwordVocab load(const std::string& path);

  bool operator==(const SubwordVocab& other) const {
    return tokens_ == other.tokens_ && merges_ == other.merges_ &&
           language_tokens_ == other.language_tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> language_tokens_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<std::string, std::size_t> merge_rank_;
};

/// Learns up to `merge_ops` merges (most frequent pair first, ties broken by
/// the lexicographically smallest pair). Throws InvalidArgument on an empty
/// corpus.
SubwordVocab train_bpe(const std::vector<Sentence>& corpus, std::size_t merge_ops,
                       const std::vector<std::string>& reserved);

/// Maps a pretrained embedding table onto a new vocabulary: rows of tokens
/// present in both are copied, new rows are drawn from N(0, width^-1/2).
numerics::Tensor<float> rebind_embeddings(const SubwordVocab& pt_vocab,
                                          const SubwordVocab& ft_vocab,
                                          const numerics::Tensor<float>& pt_embeddings,
                                          std::uint64_t seed);

}  // namespace vega::subword
