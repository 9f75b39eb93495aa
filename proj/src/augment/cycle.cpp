#include "vega/augment/cycle.hpp"

#include <algorithm>
#include <numeric>

#include "vega/core/error.hpp"

namespace vega::augment {

CycleResult cycle_translate(const std::vector<Sentence>& mono, const std::string& lang,
                            const decode::Translator& t2s, const decode::Translator& s2t, const NgramLM& lm,
                            corpus::PipelineManifest* manifest) {
  if (t2s.src_lang != lang || s2t.tgt_lang != lang || t2s.tgt_lang != s2t.src_lang) {
    throw InvalidArgument("cycle_translate: " + t2s.id + " and " + s2t.id + " do not round-trip " + lang);
  }
  CycleResult out;
  out.sentences = mono;
  out.origins.assign(mono.size(), corpus::Origin::authentic);
  for (const auto& s : mono) out.score_before.push_back(lm_score(lm, s));

  std::vector<std::size_t> order(mono.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.score_before[a] < out.score_before[b]; });
  const std::size_t keep = mono.size() / 2;
  out.replaced.assign(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end());
  std::sort(out.replaced.begin(), out.replaced.end());

  for (std::size_t i : out.replaced) {
    out.sentences[i] = s2t.translate_one(t2s.translate_one(mono[i]));
    out.origins[i] = corpus::Origin::cycle_translated;
  }
  for (const auto& s : out.sentences) out.score_after.push_back(s.empty() ? 0.0 : lm_score(lm, s));

  if (manifest) {
    double before = 0;
    double after = 0;
    for (std::size_t i : out.replaced) {
      before += out.score_before[i];
      after += out.score_after[i];
    }
    const double n = out.replaced.empty() ? 1.0 : static_cast<double>(out.replaced.size());
    manifest->append({{"stage", "cycle_translate"}, {"lang", lang}, {"input", mono.size()},
                      {"replaced", out.replaced.size()}, {"t2s", t2s.id}, {"s2t", s2t.id},
                      {"mean_score_before", before / n}, {"mean_score_after", after / n}});
  }
  return out;
}

}  // namespace vega::augment
