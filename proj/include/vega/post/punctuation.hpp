#pragma once

#include <map>
#include <string>
#include <vector>

#include "vega/core/text.hpp"
#include "vega/corpus/toy_language.hpp"
#include "vega/subword/vocab.hpp"

namespace vega::post {

/// Whole-token glyph replacements plus optional German-style quotes, where
/// straight double quotes alternate between „ and “ in order of occurrence.
struct PunctuationProfile {
  std::string name;
  std::map<std::string, std::string> token_map;
  bool german_quotes = false;
};

PunctuationProfile identity_profile();
PunctuationProfile german_profile();
PunctuationProfile cjk_profile();
/// Maps "." to the language's sentence-final glyph and straight quotes to its
/// quote glyphs where they differ.
PunctuationProfile toy_profile(const corpus::ToyLanguage& lang);

class ProfileRegistry {
 public:
  /// de, cs -> german; zh, ja -> cjk; en, ru -> identity.
  static ProfileRegistry defaults();

  void add(const std::string& lang, PunctuationProfile profile);
  void add_toy_languages(const std::vector<corpus::ToyLanguage>& languages);
  /// Throws InvalidArgument for an unregistered language.
  const PunctuationProfile& get(const std::string& lang) const;
  bool has(const std::string& lang) const { return profiles_.count(lang) != 0; }

 private:
  std::map<std::string, PunctuationProfile> profiles_;
};

Sentence convert_punctuation(const Sentence& tokens, const PunctuationProfile& profile);
Sentence convert_punctuation(const Sentence& tokens, const std::string& target_lang,
                             const ProfileRegistry& registry);

/// Inverse of subword encoding; language tags and specials are dropped.
/// Throws InvalidArgument for an id outside the vocabulary.
Sentence desubword(const std::vector<subword::TokenId>& ids, const subword::SubwordVocab& vocab);
/// Joins pieces, closing a word at each end-of-word marker.
Sentence desubword(const std::vector<std::string>& pieces);

}  // namespace vega::post
