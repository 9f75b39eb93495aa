#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vega/corpus/sentence_pair.hpp"
#include "vega/filter/langid.hpp"

namespace vega::filter {

inline constexpr std::size_t kMaxWords = 250;
inline constexpr double kMaxLengthRatio = 3.0;

/// Removal rules in application order.
inline const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> kRules = {"langid", "dedup", "illegal_char", "length",
                                                  "ratio"};
  return kRules;
}

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t output_count = 0;
  std::map<std::string, std::size_t> removed_by_rule;
  /// Pairs whose text the normalisation step changed (not a removal).
  std::size_t normalized = 0;

  /// output_count + sum(removed_by_rule) == input_count.
  bool reconciles() const;
  nlohmann::json to_json() const;
};

/// Maps unicode punctuation to ASCII and drops tokens that become empty.
Sentence normalize_punctuation(const Sentence& sentence);

/// Control characters other than tab/newline, C1 controls, encoded
/// surrogates and malformed UTF-8.
bool has_illegal_chars(const std::string& text);

/// Applies normalize -> langid -> dedup -> illegal-char -> length -> ratio.
/// Never throws; pairs in a language the classifier does not know fail the
/// langid rule.
std::pair<std::vector<corpus::SentencePair>, FilterReport> filter_pairs(
    const std::vector<corpus::SentencePair>& pairs, const LangIdModel& langid);

}  // namespace vega::filter
