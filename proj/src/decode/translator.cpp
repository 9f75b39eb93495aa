#include "vega/decode/translator.hpp"

#include "vega/core/error.hpp"
#include "vega/decode/nat.hpp"

namespace vega::decode {

std::vector<Sentence> Translator::translate(const std::vector<Sentence>& sentences) const {
  std::vector<Sentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(translate_one(s));
  return out;
}

Translator model_translator(std::string id, std::shared_ptr<const model::Transformer<float>> model,
                            std::shared_ptr<const subword::SubwordVocab> vocab, std::string src_lang,
                            std::string tgt_lang, const DecodeOptions& options) {
  if (!model || !vocab) throw InvalidArgument("model_translator: null model or vocabulary");
  options.beam.validate();
  vocab->language_id(tgt_lang);
  Translator t{std::move(id), std::move(src_lang), std::move(tgt_lang), {}};
  t.translate_one = [model, vocab, options, tag = t.tgt_lang](const Sentence& s) {
    const auto src = vocab->encode(s, tag);
    Hypothesis h;
    if (model->config().mode == model::Mode::NAT) {
      h = nat_decode(*model, src, options.nat_lengths);
    } else if (options.greedy) {
      h = greedy_decode(*model, src, options.beam, subword::kBos);
    } else {
      h = beam_search(*model, src, options.beam, subword::kBos);
    }
    return vocab->decode(h.tokens);
  };
  return t;
}

Translator session_translator(std::string id, SessionFactory factory,
                              std::shared_ptr<const subword::SubwordVocab> vocab, std::string src_lang,
                              std::string tgt_lang, const DecodeOptions& options) {
  if (!factory || !vocab) throw InvalidArgument("session_translator: null factory or vocabulary");
  options.beam.validate();
  vocab->language_id(tgt_lang);
  Translator t{std::move(id), std::move(src_lang), std::move(tgt_lang), {}};
  t.translate_one = [factory = std::move(factory), vocab, options, tag = t.tgt_lang](const Sentence& s) {
    const auto src = vocab->encode(s, tag);
    auto session = factory(src);
    const auto h = options.greedy ? greedy_decode(*session, src.size(), options.beam, subword::kBos)
                                  : beam_search(*session, src.size(), options.beam, subword::kBos);
    return vocab->decode(h.tokens);
  };
  return t;
}

Translator oracle_translator(const corpus::ToyLanguage& from, const corpus::ToyLanguage& to) {
  return {"oracle:" + from.id() + "-" + to.id(), from.id(), to.id(),
          [from, to](const Sentence& s) { return corpus::ground_truth_translate(from, to, s); }};
}

BleuReport evaluate_bleu(const Translator& translator, const std::vector<corpus::SentencePair>& pairs) {
  std::vector<Sentence> hyps;
  std::vector<Sentence> refs;
  for (const auto& p : pairs) {
    if (p.src_lang != translator.src_lang || p.tgt_lang != translator.tgt_lang) {
      throw InvalidArgument("evaluate_bleu: pair " + p.id + " does not match translator " + translator.id);
    }
    hyps.push_back(translator.translate_one(p.src));
    refs.push_back(p.tgt);
  }
  return corpus_bleu(hyps, refs);
}

}  // namespace vega::decode
