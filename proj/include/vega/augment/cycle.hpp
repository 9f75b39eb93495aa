#pragma once

#include <string>
#include <vector>

#include "vega/augment/ngram.hpp"
#include "vega/corpus/corpus_io.hpp"
#include "vega/decode/translator.hpp"

namespace vega::augment {

struct CycleResult {
  std::vector<Sentence> sentences;        // same order and count as the input
  std::vector<corpus::Origin> origins;    // cycle_translated where replaced
  std::vector<std::size_t> replaced;      // input positions, ascending
  std::vector<double> score_before;       // lm_score per input sentence
  std::vector<double> score_after;        // lm_score of the output sentence
};

/// Ranks `mono` (language t2s.src_lang) by lm_score, ties broken by position,
/// and replaces the worst ceil(n/2) with s2t(t2s(x)). Throws InvalidArgument
/// unless t2s and s2t form a round trip starting at `lang`. Appends a
/// "cycle_translate" record to `manifest` when given.
CycleResult cycle_translate(const std::vector<Sentence>& mono, const std::string& lang,
                            const decode::Translator& t2s, const decode::Translator& s2t, const NgramLM& lm,
                            corpus::PipelineManifest* manifest = nullptr);

}  // namespace vega::augment
