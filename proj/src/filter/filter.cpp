#include "vega/filter/filter.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace vega::filter {

namespace {

const std::unordered_map<std::string, std::string>& punctuation_map() {
  static const std::unordered_map<std::string, std::string> kMap = {
      {"\xE3\x80\x82", "."},  // 。
      {"\xEF\xBC\x8E", "."},  // ．
      {"\xEF\xBC\x8C", ","},  // ，
      {"\xE3\x80\x81", ","},  // 、
      {"\xEF\xBC\x81", "!"},  {"\xEF\xBC\x9F", "?"}, {"\xEF\xBC\x9A", ":"},
      {"\xEF\xBC\x9B", ";"},  {"\xEF\xBC\x88", "("}, {"\xEF\xBC\x89", ")"},
      {"\xE2\x80\x9C", "\""},  // “
      {"\xE2\x80\x9D", "\""},  // ”
      {"\xE2\x80\x9E", "\""},  // „
      {"\xC2\xAB", "\""},      // «
      {"\xC2\xBB", "\""},      // »
      {"\xEF\xBC\x82", "\""},
      {"\xE2\x80\x98", "'"},  {"\xE2\x80\x99", "'"},
      {"\xE2\x80\x93", "-"},  {"\xE2\x80\x94", "-"},
      {"\xE2\x80\xA6", "..."},
      {"\xC2\xA0", ""},  // no-break space
      {"\xE3\x80\x80", ""},  // ideographic space
  };
  return kMap;
}

std::string key_of(const corpus::SentencePair& p) {
  return join_words(p.src) + '\t' + join_words(p.tgt);
}

bool sentence_has_illegal(const Sentence& s) {
  return std::any_of(s.begin(), s.end(), [](const std::string& w) { return has_illegal_chars(w); });
}

double length_ratio(const corpus::SentencePair& p) {
  const double a = static_cast<double>(p.src.size());
  const double b = static_cast<double>(p.tgt.size());
  if (a == 0 || b == 0) return std::numeric_limits<double>::infinity();
  return std::max(a, b) / std::min(a, b);
}

}  // namespace

bool FilterReport::reconciles() const {
  std::size_t removed = 0;
  for (const auto& [_, n] : removed_by_rule) removed += n;
  return output_count + removed == input_count;
}

nlohmann::json FilterReport::to_json() const {
  return {{"input_count", input_count},
          {"output_count", output_count},
          {"removed_by_rule", removed_by_rule},
          {"normalized", normalized}};
}

Sentence normalize_punctuation(const Sentence& sentence) {
  const auto& map = punctuation_map();
  Sentence out;
  for (const auto& word : sentence) {
    std::string w;
    for (const auto& c : utf8_chars(word)) {
      auto it = map.find(c);
      w += it == map.end() ? c : it->second;
    }
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

bool has_illegal_chars(const std::string& text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n;) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      if ((c < 0x20 && c != '\t' && c != '\n') || c == 0x7F) return true;
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return true;
    }
    if (i + len > n) return true;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return true;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    const std::uint32_t min_cp = len == 2 ? 0x80 : len == 3 ? 0x800 : 0x10000;
    if (cp < min_cp || cp > 0x10FFFF) return true;
    if (cp >= 0xD800 && cp <= 0xDFFF) return true;
    if (cp >= 0x80 && cp <= 0x9F) return true;
    i += len;
  }
  return false;
}

std::pair<std::vector<corpus::SentencePair>, FilterReport> filter_pairs(
    const std::vector<corpus::SentencePair>& pairs, const LangIdModel& langid) {
  FilterReport report;
  report.input_count = pairs.size();
  for (const auto& r : rule_names()) report.removed_by_rule[r] = 0;
  const auto known = langid.languages();
  auto is_known = [&](const std::string& l) {
    return std::find(known.begin(), known.end(), l) != known.end();
  };

  std::vector<corpus::SentencePair> out;
  std::unordered_set<std::string> seen;
  for (const auto& original : pairs) {
    corpus::SentencePair p = original;
    p.src = normalize_punctuation(p.src);
    p.tgt = normalize_punctuation(p.tgt);
    if (p.src != original.src || p.tgt != original.tgt) ++report.normalized;

    if (!is_known(p.src_lang) || !is_known(p.tgt_lang) || langid.classify(p.src) != p.src_lang ||
        langid.classify(p.tgt) != p.tgt_lang) {
      ++report.removed_by_rule["langid"];
      continue;
    }
    if (!seen.insert(key_of(p)).second) {
      ++report.removed_by_rule["dedup"];
      continue;
    }
    if (sentence_has_illegal(p.src) || sentence_has_illegal(p.tgt)) {
      ++report.removed_by_rule["illegal_char"];
      continue;
    }
    if (p.src.size() > kMaxWords || p.tgt.size() > kMaxWords) {
      ++report.removed_by_rule["length"];
      continue;
    }
    if (length_ratio(p) > kMaxLengthRatio) {
      ++report.removed_by_rule["ratio"];
      continue;
    }
    out.push_back(std::move(p));
  }
  report.output_count = out.size();
  return {std::move(out), report};
}

}  // namespace vega::filter
