#include "vega/augment/self_training.hpp"

#include <set>

#include "vega/core/error.hpp"
#include "vega/model/serialize.hpp"
#include "vega/train/trainer.hpp"

namespace vega::augment {

namespace {

void check_slot(const std::vector<Teacher>& slot, std::size_t expected, TeacherKind kind, const std::string& from,
                const std::string& to, const char* name) {
  if (slot.size() != expected) {
    throw InvalidState(std::string("teacher set: expected ") + std::to_string(expected) + " " + name +
                       " teachers, got " + std::to_string(slot.size()));
  }
  for (const auto& t : slot) {
    if (t.kind != kind || t.translator.src_lang != from || t.translator.tgt_lang != to) {
      throw InvalidArgument("teacher " + t.translator.id + " does not fit the " + name + " slot");
    }
    if (!t.translator.translate_one) throw InvalidState("teacher " + t.translator.id + " has no translator");
  }
}

corpus::SentencePair synthetic(const Teacher& t, std::string id, const std::string& src_lang,
                               const std::string& tgt_lang, Sentence src, Sentence tgt, int round) {
  corpus::SentencePair p;
  p.id = t.translator.id + ":" + id;
  p.src_lang = src_lang;
  p.tgt_lang = tgt_lang;
  p.src = std::move(src);
  p.tgt = std::move(tgt);
  p.origin = t.kind == TeacherKind::AT ? corpus::Origin::synthetic_at : corpus::Origin::synthetic_nat;
  p.teacher_id = t.translator.id;
  p.round = round;
  return p;
}

std::vector<corpus::SentencePair> flip_all(const std::vector<corpus::SentencePair>& pairs) {
  std::vector<corpus::SentencePair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(corpus::flipped(p));
  return out;
}

}  // namespace

void TeacherSet::validate(std::size_t at_per_side, std::size_t nat_per_side) const {
  check_slot(forward_at, at_per_side, TeacherKind::AT, src_lang, tgt_lang, "forward AT");
  check_slot(backward_at, at_per_side, TeacherKind::AT, tgt_lang, src_lang, "backward AT");
  check_slot(forward_nat, nat_per_side, TeacherKind::NAT, src_lang, tgt_lang, "forward NAT");
  check_slot(backward_nat, nat_per_side, TeacherKind::NAT, tgt_lang, src_lang, "backward NAT");
  std::set<std::string> ids;
  for (const auto* slot : {&forward_at, &backward_at, &forward_nat, &backward_nat}) {
    for (const auto& t : *slot) {
      if (!ids.insert(t.translator.id).second) throw InvalidState("duplicate teacher id " + t.translator.id);
    }
  }
}

std::size_t TeacherSet::size() const {
  return forward_at.size() + backward_at.size() + forward_nat.size() + backward_nat.size();
}

std::vector<corpus::SentencePair> self_train_round(const TeacherSet& teachers,
                                                   const std::vector<corpus::SentencePair>& para,
                                                   const std::vector<Sentence>& mono_src,
                                                   const std::vector<Sentence>& mono_tgt, int round,
                                                   corpus::PipelineManifest* manifest) {
  if (round < 1) throw InvalidArgument("self_train_round: round must be >= 1");
  if (teachers.size() == 0) throw InvalidState("self_train_round: no teachers");
  std::vector<std::pair<std::string, const Sentence*>> src_side;
  std::vector<std::pair<std::string, const Sentence*>> tgt_side;
  for (const auto& p : para) {
    if (p.src_lang != teachers.src_lang || p.tgt_lang != teachers.tgt_lang) {
      throw InvalidArgument("self_train_round: pair " + p.id + " is not " + teachers.src_lang + "-" +
                            teachers.tgt_lang);
    }
    src_side.emplace_back(p.id, &p.src);
    tgt_side.emplace_back(p.id, &p.tgt);
  }
  for (std::size_t i = 0; i < mono_src.size(); ++i) src_side.emplace_back("mono_src-" + std::to_string(i), &mono_src[i]);
  for (std::size_t i = 0; i < mono_tgt.size(); ++i) tgt_side.emplace_back("mono_tgt-" + std::to_string(i), &mono_tgt[i]);

  std::vector<corpus::SentencePair> out;
  nlohmann::json groups = nlohmann::json::object();
  for (const auto* slot : {&teachers.forward_at, &teachers.forward_nat}) {
    for (const auto& t : *slot) {
      for (const auto& [id, s] : src_side) {
        out.push_back(synthetic(t, id, teachers.src_lang, teachers.tgt_lang, *s, t.translator.translate_one(*s), round));
      }
      groups[t.translator.id] = src_side.size();
    }
  }
  for (const auto* slot : {&teachers.backward_at, &teachers.backward_nat}) {
    for (const auto& t : *slot) {
      for (const auto& [id, s] : tgt_side) {
        out.push_back(synthetic(t, id, teachers.src_lang, teachers.tgt_lang, t.translator.translate_one(*s), *s, round));
      }
      groups[t.translator.id] = tgt_side.size();
    }
  }
  if (manifest) {
    manifest->append({{"stage", "self_train_round"}, {"round", round}, {"para", para.size()},
                      {"mono_src", mono_src.size()}, {"mono_tgt", mono_tgt.size()},
                      {"synthetic", out.size()}, {"teachers", groups}});
  }
  return out;
}

SelfTrainingResult run_bidirectional_self_training(
    const SelfTrainingConfig& config, const std::string& src_lang, const std::string& tgt_lang,
    const std::vector<corpus::SentencePair>& para, const std::vector<Sentence>& mono_src,
    const std::vector<Sentence>& mono_tgt, const std::vector<corpus::SentencePair>& dev,
    std::shared_ptr<const subword::SubwordVocab> vocab, corpus::PipelineManifest* manifest) {
  if (config.rounds < 0) throw InvalidArgument("self-training: rounds must be >= 0");
  if (!vocab) throw InvalidArgument("self-training: null vocabulary");
  SelfTrainingResult result;
  result.corpus = para;
  if (config.rounds == 0) return result;

  const int vocab_size = static_cast<int>(vocab->size());
  const auto dev_back = flip_all(dev);
  const train::ParallelData dev_fwd_map{{train::direction_key(src_lang, tgt_lang), dev}};
  const train::ParallelData dev_back_map{{train::direction_key(tgt_lang, src_lang), dev_back}};
  std::uint64_t salt = 0;

  auto train_model = [&](const std::optional<numerics::Checkpoint>& init, model::ModelConfig mc,
                         const std::vector<corpus::SentencePair>& data, const train::ParallelData& dev_map) {
    mc.vocab = vocab_size;
    const std::uint64_t seed = mix_seed(config.seed, ++salt);
    auto m = init ? std::make_shared<model::Transformer<float>>(model::from_checkpoint(*init))
                  : std::make_shared<model::Transformer<float>>(mc, seed);
    auto tc = config.train;
    tc.seed = seed;
    train::train_pairs(*m, data, dev_map, *vocab, tc);
    return std::shared_ptr<const model::Transformer<float>>(m);
  };

  std::vector<corpus::SentencePair> data = para;
  for (int round = 1; round <= config.rounds; ++round) {
    RoundReport report;
    report.round = round;
    report.training_pairs = data.size();
    const auto data_back = flip_all(data);
    const std::string r = "r" + std::to_string(round) + "-";

    TeacherSet set{src_lang, tgt_lang, {}, {}, {}, {}};
    double best_f = -1;
    double best_b = -1;
    const Teacher* best_fwd = nullptr;
    const Teacher* best_bwd = nullptr;
    set.forward_at.reserve(config.at_per_side);
    set.backward_at.reserve(config.at_per_side);
    for (std::size_t i = 0; i < config.at_per_side; ++i) {
      auto fwd = train_model(config.forward_init, config.at_model, data, dev_fwd_map);
      set.forward_at.push_back({decode::model_translator(r + "fwd-at" + std::to_string(i), fwd, vocab, src_lang,
                                                         tgt_lang, config.decode),
                                TeacherKind::AT, round});
      auto bwd = train_model(config.backward_init, config.at_model, data_back, dev_back_map);
      set.backward_at.push_back({decode::model_translator(r + "bwd-at" + std::to_string(i), bwd, vocab, tgt_lang,
                                                          src_lang, config.decode),
                                 TeacherKind::AT, round});
    }
    for (const auto& t : set.forward_at) {
      const double b = dev.empty() ? 0.0 : decode::evaluate_bleu(t.translator, dev).score;
      report.teacher_dev_bleu[t.translator.id] = b;
      if (b > best_f) best_f = b, best_fwd = &t;
    }
    for (const auto& t : set.backward_at) {
      const double b = dev.empty() ? 0.0 : decode::evaluate_bleu(t.translator, dev_back).score;
      report.teacher_dev_bleu[t.translator.id] = b;
      if (b > best_b) best_b = b, best_bwd = &t;
    }

    auto distil = [&](const Teacher& teacher, const std::vector<corpus::SentencePair>& pairs) {
      std::vector<corpus::SentencePair> out;
      out.reserve(pairs.size());
      for (const auto& p : pairs) {
        auto q = p;
        q.tgt = teacher.translator.translate_one(p.src);
        if (q.tgt.empty()) continue;
        q.origin = corpus::Origin::synthetic_at;
        q.teacher_id = teacher.translator.id;
        q.round = round;
        out.push_back(std::move(q));
      }
      return out;
    };
    if (config.nat_per_side > 0) {
      if (!best_fwd || !best_bwd) throw InvalidState("self-training: NAT teachers need AT teachers to distil from");
      report.best_forward = best_fwd->translator.id;
      report.best_backward = best_bwd->translator.id;
      const auto distilled_fwd = distil(*best_fwd, data);
      const auto distilled_bwd = distil(*best_bwd, data_back);
      for (std::size_t i = 0; i < config.nat_per_side; ++i) {
        auto fwd = train_model(std::nullopt, config.nat_model, distilled_fwd, dev_fwd_map);
        set.forward_nat.push_back({decode::model_translator(r + "fwd-nat" + std::to_string(i), fwd, vocab,
                                                            src_lang, tgt_lang, config.decode),
                                   TeacherKind::NAT, round});
        auto bwd = train_model(std::nullopt, config.nat_model, distilled_bwd, dev_back_map);
        set.backward_nat.push_back({decode::model_translator(r + "bwd-nat" + std::to_string(i), bwd, vocab,
                                                             tgt_lang, src_lang, config.decode),
                                    TeacherKind::NAT, round});
      }
    }
    set.validate(config.at_per_side, config.nat_per_side);
    const auto syn = self_train_round(set, para, mono_src, mono_tgt, round, manifest);
    report.synthetic = syn.size();
    data = para;
    data.insert(data.end(), syn.begin(), syn.end());
    if (manifest) {
      manifest->append({{"stage", "self_training_teachers"}, {"round", round},
                        {"teacher_dev_bleu", report.teacher_dev_bleu}, {"best_forward", report.best_forward},
                        {"best_backward", report.best_backward}, {"training_pairs", report.training_pairs}});
    }
    result.rounds.push_back(std::move(report));
  }
  result.corpus = std::move(data);
  return result;
}

}  // namespace vega::augment
