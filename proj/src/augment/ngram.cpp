#include "vega/augment/ngram.hpp"

#include <cmath>

#include "vega/core/error.hpp"

namespace vega::augment {

namespace {
constexpr const char* kBegin = "<s>";
constexpr const char* kEnd = "</s>";
constexpr const char* kUnknown = "<unk>";
}  // namespace

NgramLM::NgramLM(int order, double k, std::vector<std::string> vocabulary) : order_(order), k_(k) {
  if (order < 1) throw InvalidArgument("NgramLM: order must be >= 1");
  if (!(k > 0)) throw InvalidArgument("NgramLM: k must be > 0");
  add_word(kEnd);
  add_word(kUnknown);
  for (const auto& w : vocabulary) add_word(w);
}

void NgramLM::add_word(const std::string& w) {
  if (index_.emplace(w, vocab_.size()).second) vocab_.push_back(w);
}

std::string NgramLM::key(const std::vector<std::string>& history) const {
  std::string k;
  const std::size_t n = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t back = n - i;
    const std::string& w = history.size() >= back ? history[history.size() - back] : std::string(kBegin);
    k += index_.count(w) || w == kBegin ? w : std::string(kUnknown);
    k += '\x1f';
  }
  return k;
}

void NgramLM::train(const std::vector<Sentence>& corpus) {
  for (const auto& s : corpus) {
    for (const auto& w : s) add_word(w);
  }
  for (const auto& s : corpus) {
    std::vector<std::string> history;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const std::string& w = i < s.size() ? s[i] : std::string(kEnd);
      const auto ctx = key(history);
      context_counts_[ctx] += 1;
      ngram_counts_[ctx + w] += 1;
      history.push_back(w);
    }
  }
}

double NgramLM::log_prob(const std::vector<std::string>& history, const std::string& word) const {
  const std::string& w = index_.count(word) ? word : std::string(kUnknown);
  const auto ctx = key(history);
  const auto c = context_counts_.find(ctx);
  const auto n = ngram_counts_.find(ctx + w);
  const double num = (n == ngram_counts_.end() ? 0.0 : n->second) + k_;
  const double den = (c == context_counts_.end() ? 0.0 : c->second) + k_ * static_cast<double>(vocab_.size());
  return std::log(num / den);
}

NgramLM train_ngram_lm(const std::vector<Sentence>& corpus, int order, double k) {
  NgramLM lm(order, k);
  lm.train(corpus);
  return lm;
}

double lm_score(const NgramLM& lm, const Sentence& sentence) {
  if (sentence.empty()) throw InvalidArgument("lm_score: empty sentence");
  std::vector<std::string> history;
  double nll = 0;
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    const std::string& w = i < sentence.size() ? sentence[i] : std::string(kEnd);
    nll -= lm.log_prob(history, w);
    history.push_back(w);
  }
  return nll / static_cast<double>(sentence.size() + 1);
}

}  // namespace vega::augment
