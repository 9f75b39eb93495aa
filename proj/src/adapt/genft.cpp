#include "vega/adapt/genft.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "vega/core/error.hpp"
#include "vega/model/serialize.hpp"
#include "vega/train/trainer.hpp"

namespace vega::adapt {

namespace {

double dev_bleu(const numerics::Checkpoint& ckpt, const std::vector<corpus::SentencePair>& dev,
                const std::shared_ptr<const subword::SubwordVocab>& vocab, const std::string& src_lang,
                const std::string& tgt_lang, const decode::DecodeOptions& options) {
  if (dev.empty()) return 0.0;
  auto m = std::make_shared<const model::Transformer<float>>(model::from_checkpoint(ckpt));
  return decode::evaluate_bleu(decode::model_translator("genft", m, vocab, src_lang, tgt_lang, options), dev).score;
}

}  // namespace

GenFtResult generalization_finetune(const numerics::Checkpoint& model, const std::vector<DomainSeed>& seeds,
                                    const decode::Translator& ensemble,
                                    const std::vector<corpus::SentencePair>& base,
                                    const std::vector<corpus::SentencePair>& dev,
                                    std::shared_ptr<const subword::SubwordVocab> vocab, const GenFtConfig& config,
                                    corpus::PipelineManifest* manifest) {
  if (seeds.empty()) throw InvalidArgument("generalization_finetune: no domain seeds");
  std::set<std::string> ids;
  for (const auto& s : seeds) {
    if (s.sentences.empty()) throw InvalidArgument("generalization_finetune: domain " + s.id + " is empty");
    if (!ids.insert(s.id).second) throw InvalidArgument("generalization_finetune: duplicate domain " + s.id);
  }
  if (config.max_iters < 0 || config.base_ratio < 0) {
    throw InvalidArgument("generalization_finetune: negative max_iters or base_ratio");
  }
  const auto& src_lang = ensemble.src_lang;
  const auto& tgt_lang = ensemble.tgt_lang;

  GenFtResult result;
  result.model = model;
  if (config.max_iters == 0) return result;
  result.initial_dev_bleu = dev_bleu(model, dev, vocab, src_lang, tgt_lang, config.decode);
  double previous = result.initial_dev_bleu;

  for (int it = 1; it <= config.max_iters; ++it) {
    std::vector<corpus::SentencePair> data;
    for (const auto& seed : seeds) {
      for (std::size_t i = 0; i < seed.sentences.size(); ++i) {
        corpus::SentencePair p;
        p.id = "genft:" + seed.id + ":" + std::to_string(i);
        p.src_lang = src_lang;
        p.tgt_lang = tgt_lang;
        p.src = seed.sentences[i];
        p.tgt = ensemble.translate_one(p.src);
        p.origin = corpus::Origin::synthetic_at;
        p.teacher_id = ensemble.id;
        p.round = it;
        data.push_back(std::move(p));
      }
    }
    const std::size_t pseudo = data.size();
    const auto wanted = static_cast<std::size_t>(std::llround(config.base_ratio * static_cast<double>(pseudo)));
    std::vector<std::size_t> order(base.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(it)));
    rng.shuffle(std::span(order));
    const std::size_t kept = std::min(wanted, base.size());
    for (std::size_t i = 0; i < kept; ++i) data.push_back(base[order[i]]);

    auto m = model::from_checkpoint(result.model);
    auto tc = config.train;
    tc.seed = mix_seed(config.seed, 0x6e00 + static_cast<std::uint64_t>(it));
    train::train_pairs(m, data, {}, *vocab, tc);
    result.model = model::to_checkpoint(m, result.model.step + tc.total_steps, result.model.meta);

    GenFtIteration rec{it, pseudo, kept, dev_bleu(result.model, dev, vocab, src_lang, tgt_lang, config.decode)};
    result.iterations.push_back(rec);
    if (manifest) {
      manifest->append({{"stage", "genft"}, {"iteration", it}, {"pseudo_pairs", pseudo}, {"base_pairs", kept},
                        {"training_pairs", data.size()}, {"dev_bleu", rec.dev_bleu}});
    }
    if (!dev.empty() && rec.dev_bleu - previous < config.convergence_delta) {
      result.converged = true;
      break;
    }
    previous = rec.dev_bleu;
  }
  return result;
}

}  // namespace vega::adapt
