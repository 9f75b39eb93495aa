#include "vega/filter/langid.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "vega/core/error.hpp"

namespace vega::filter {

std::vector<std::string> char_trigrams(const Sentence& sentence) {
  std::vector<std::string> chars{" "};
  for (const auto& word : sentence) {
    for (auto& c : utf8_chars(word)) chars.push_back(std::move(c));
    chars.push_back(" ");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 2 < chars.size(); ++i) out.push_back(chars[i] + chars[i + 1] + chars[i + 2]);
  return out;
}

std::vector<std::string> LangIdModel::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, _] : tables_) out.push_back(lang);
  return out;
}

const LangIdModel::Table& LangIdModel::table(const std::string& lang) const {
  auto it = tables_.find(lang);
  if (it == tables_.end()) throw NotFound("language id model has no language '" + lang + "'");
  return it->second;
}

std::map<std::string, double> LangIdModel::scores(const Sentence& sentence) const {
  const auto grams = char_trigrams(sentence);
  std::map<std::string, double> out;
  for (const auto& [lang, t] : tables_) {
    double s = t.log_prior;
    for (const auto& g : grams) {
      auto it = t.log_prob.find(g);
      s += it == t.log_prob.end() ? t.unseen_log_prob : it->second;
    }
    out[lang] = s;
  }
  return out;
}

std::string LangIdModel::classify(const Sentence& sentence) const {
  std::string best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [lang, s] : scores(sentence)) {
    if (s > best_score) {
      best = lang;
      best_score = s;
    }
  }
  return best;
}

LangIdModel train_langid(const std::map<std::string, std::vector<Sentence>>& corpora) {
  if (corpora.size() < 2) throw InvalidArgument("train_langid: need at least 2 languages");
  std::map<std::string, std::unordered_map<std::string, double>> counts;
  std::set<std::string> vocab;
  double sentences = 0;
  for (const auto& [lang, sents] : corpora) {
    if (sents.size() < 100) {
      throw InvalidArgument("train_langid: language " + lang + " has " +
                            std::to_string(sents.size()) + " sentences, need >= 100");
    }
    auto& c = counts[lang];
    for (const auto& s : sents) {
      for (const auto& g : char_trigrams(s)) {
        c[g] += 1;
        vocab.insert(g);
      }
    }
    sentences += static_cast<double>(sents.size());
  }
  const double support = static_cast<double>(vocab.size()) + 1.0;
  std::map<std::string, LangIdModel::Table> tables;
  for (const auto& [lang, c] : counts) {
    double total = 0;
    for (const auto& [_, n] : c) total += n;
    const double denom = std::log(total + support);
    LangIdModel::Table t;
    for (const auto& g : vocab) {
      auto it = c.find(g);
      t.log_prob[g] = std::log((it == c.end() ? 0.0 : it->second) + 1.0) - denom;
    }
    t.unseen_log_prob = -denom;
    t.log_prior = std::log(static_cast<double>(corpora.at(lang).size()) / sentences);
    tables.emplace(lang, std::move(t));
  }
  return LangIdModel(std::move(tables));
}

}  // namespace vega::filter
