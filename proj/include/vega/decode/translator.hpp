#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vega/corpus/sentence_pair.hpp"
#include "vega/corpus/toy_language.hpp"
#include "vega/decode/beam.hpp"
#include "vega/decode/bleu.hpp"
#include "vega/decode/session.hpp"
#include "vega/subword/vocab.hpp"

namespace vega::decode {

/// A named sentence-level translation function for one direction.
struct Translator {
  std::string id;
  std::string src_lang;
  std::string tgt_lang;
  std::function<Sentence(const Sentence&)> translate_one;

  std::vector<Sentence> translate(const std::vector<Sentence>& sentences) const;
};

struct DecodeOptions {
  BeamConfig beam;
  bool greedy = false;
  int nat_lengths = 3;
};

using SessionFactory = std::function<std::unique_ptr<DecodeSession>(const std::vector<TokenId>& src)>;

/// AT model (beam or greedy) or NAT model (length-candidate decoding),
/// chosen by the model's mode.
Translator model_translator(std::string id, std::shared_ptr<const model::Transformer<float>> model,
                            std::shared_ptr<const subword::SubwordVocab> vocab, std::string src_lang,
                            std::string tgt_lang, const DecodeOptions& options = {});

/// Beam search over any incremental scorer, e.g. an ensemble.
Translator session_translator(std::string id, SessionFactory factory,
                              std::shared_ptr<const subword::SubwordVocab> vocab, std::string src_lang,
                              std::string tgt_lang, const DecodeOptions& options = {});

/// Exact toy-language translator.
Translator oracle_translator(const corpus::ToyLanguage& from, const corpus::ToyLanguage& to);

/// Corpus BLEU of the translator on pairs of its direction; throws
/// InvalidArgument on a direction mismatch.
BleuReport evaluate_bleu(const Translator& translator, const std::vector<corpus::SentencePair>& pairs);

}  // namespace vega::decode
