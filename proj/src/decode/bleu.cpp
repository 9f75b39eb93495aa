#include "vega/decode/bleu.hpp"

#include <cmath>
#include <map>

#include "vega/core/error.hpp"

namespace vega::decode {

namespace {

std::map<std::vector<std::string>, std::size_t> ngrams(const Sentence& s, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++out[std::vector<std::string>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                   s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

}  // namespace

nlohmann::json BleuReport::to_json() const {
  return {{"score", score},
          {"precisions", precisions},
          {"matches", matches},
          {"totals", totals},
          {"brevity_penalty", brevity_penalty},
          {"hyp_length", hyp_length},
          {"ref_length", ref_length}};
}

BleuReport corpus_bleu(const std::vector<Sentence>& hypotheses,
                       const std::vector<Sentence>& references) {
  if (hypotheses.size() != references.size()) {
    throw InvalidArgument("corpus_bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                          std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw InvalidArgument("corpus_bleu: empty corpus");
  BleuReport r;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto& h = hypotheses[i];
    const auto& ref = references[i];
    r.hyp_length += h.size();
    r.ref_length += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hc = ngrams(h, n);
      const auto rc = ngrams(ref, n);
      for (const auto& [g, c] : hc) {
        r.totals[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) r.matches[n - 1] += std::min(c, it->second);
      }
    }
  }
  double smooth = 1.0;
  bool zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (r.totals[n] == 0) {
      r.precisions[n] = 0.0;
      zero = true;
      continue;
    }
    if (r.matches[n] == 0) {
      smooth *= 2.0;
      r.precisions[n] = 1.0 / (smooth * static_cast<double>(r.totals[n]));
    } else {
      r.precisions[n] = static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    }
    log_sum += std::log(r.precisions[n]);
  }
  if (r.hyp_length == 0) {
    r.brevity_penalty = 0.0;
  } else if (r.hyp_length < r.ref_length) {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  } else {
    r.brevity_penalty = 1.0;
  }
  r.score = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

}  // namespace vega::decode
