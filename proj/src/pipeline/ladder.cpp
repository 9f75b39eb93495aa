#include "vega/pipeline/ladder.hpp"

#include <algorithm>
#include <filesystem>

#include "vega/adapt/ensemble.hpp"
#include "vega/adapt/genft.hpp"
#include "vega/augment/self_training.hpp"
#include "vega/core/error.hpp"
#include "vega/model/serialize.hpp"
#include "vega/post/numbers.hpp"
#include "vega/post/punctuation.hpp"

namespace vega::pipeline {

namespace {

using ModelPtr = std::shared_ptr<const model::Transformer<float>>;

std::string sub(const std::string& dir, const std::string& name) {
  return dir.empty() ? std::string() : (std::filesystem::path(dir) / name).string();
}

std::vector<Sentence> sources(const std::vector<corpus::SentencePair>& pairs) {
  std::vector<Sentence> out;
  for (const auto& p : pairs) out.push_back(p.src);
  return out;
}

std::vector<Sentence> targets(const std::vector<corpus::SentencePair>& pairs) {
  std::vector<Sentence> out;
  for (const auto& p : pairs) out.push_back(p.tgt);
  return out;
}

std::vector<corpus::SentencePair> flip_all(const std::vector<corpus::SentencePair>& pairs) {
  std::vector<corpus::SentencePair> out;
  for (const auto& p : pairs) out.push_back(corpus::flipped(p));
  return out;
}

struct Outputs {
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
};

}  // namespace

const std::vector<std::string>& ladder_steps() {
  static const std::vector<std::string> kSteps = {"baseline",       "+multi-PT",         "+specific-FT",
                                                  "+self-training", "+ensemble",         "+generalization-FT",
                                                  "+post-processing"};
  return kSteps;
}

void LadderConfig::validate() const {
  world.validate();
  const auto& all = ladder_steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i >= all.size() || steps[i] != all[i]) {
      throw InvalidArgument("ladder steps must be a prefix of the ladder; got '" + steps[i] + "' at position " +
                            std::to_string(i));
    }
  }
  const bool forward = src_lang == kPivot;
  const std::string other = forward ? tgt_lang : src_lang;
  if ((forward ? tgt_lang : src_lang) == kPivot || (!forward && tgt_lang != kPivot) ||
      std::find(world.languages.begin(), world.languages.end(), other) == world.languages.end()) {
    throw InvalidArgument("ladder direction " + src_lang + "-" + tgt_lang + " is not a pivot direction of the world");
  }
  if (baseline_updates <= 0 || pretrain_updates <= 0 || finetune_updates <= 0 || teacher_updates <= 0 ||
      student_updates <= 0 || genft_updates <= 0) {
    throw InvalidArgument("ladder update counts must be positive");
  }
  if (ensemble_max == 0) throw InvalidArgument("ensemble_max must be at least 1");
}

std::vector<std::string> LadderConfig::active_steps() const { return steps.empty() ? ladder_steps() : steps; }

void to_json(nlohmann::json& j, const LadderConfig& c) {
  j = {{"world", c.world},
       {"src_lang", c.src_lang},
       {"tgt_lang", c.tgt_lang},
       {"steps", c.steps},
       {"model", c.model},
       {"train", c.train},
       {"baseline_updates", c.baseline_updates},
       {"pretrain_updates", c.pretrain_updates},
       {"finetune_updates", c.finetune_updates},
       {"temperature", c.temperature},
       {"self_training_rounds", c.self_training_rounds},
       {"teacher_updates", c.teacher_updates},
       {"student_updates", c.student_updates},
       {"mono_size", c.mono_size},
       {"ensemble_max", c.ensemble_max},
       {"genft_iters", c.genft_iters},
       {"genft_updates", c.genft_updates},
       {"greedy", c.decode.greedy},
       {"beam", c.decode.beam.beam_size}};
}

WorldConfig ladder_world() {
  WorldConfig w;
  w.generation.literal_rate = 0.4;
  return w;
}

void from_json(const nlohmann::json& j, LadderConfig& c) {
  c = LadderConfig{};
  if (j.contains("world")) c.world = overlay(c.world, j.at("world"));
  c.src_lang = j.value("src_lang", c.src_lang);
  c.tgt_lang = j.value("tgt_lang", c.tgt_lang);
  c.steps = j.value("steps", c.steps);
  if (j.contains("model")) c.model = overlay(c.model, j.at("model"));
  if (j.contains("train")) c.train = overlay(c.train, j.at("train"));
  c.baseline_updates = j.value("baseline_updates", c.baseline_updates);
  c.pretrain_updates = j.value("pretrain_updates", c.pretrain_updates);
  c.finetune_updates = j.value("finetune_updates", c.finetune_updates);
  c.temperature = j.value("temperature", c.temperature);
  c.self_training_rounds = j.value("self_training_rounds", c.self_training_rounds);
  c.teacher_updates = j.value("teacher_updates", c.teacher_updates);
  c.student_updates = j.value("student_updates", c.student_updates);
  c.mono_size = j.value("mono_size", c.mono_size);
  c.ensemble_max = j.value("ensemble_max", c.ensemble_max);
  c.genft_iters = j.value("genft_iters", c.genft_iters);
  c.genft_updates = j.value("genft_updates", c.genft_updates);
  c.decode.greedy = j.value("greedy", c.decode.greedy);
  c.decode.beam.beam_size = j.value("beam", c.decode.beam.beam_size);
}

nlohmann::json AblationLadder::to_json() const {
  nlohmann::json out{{"direction", direction}};
  auto& list = out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    list.push_back({{"step", r.step},
                    {"dev_bleu", r.dev_bleu},
                    {"test_bleu", r.test_bleu},
                    {"delta_dev", r.delta_dev},
                    {"delta_test", r.delta_test},
                    {"number_mismatches", r.number_mismatches},
                    {"details", r.details}});
  }
  return out;
}

AblationLadder ablate(const LadderConfig& config, const std::string& run_dir, const Progress& progress) {
  config.validate();
  const auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const auto steps = config.active_steps();
  const World w = build_world(config.world);
  const std::string& src = config.src_lang;
  const std::string& tgt = config.tgt_lang;
  const bool forward = src == kPivot;
  const auto key = train::direction_key(src, tgt);
  const auto para = w.pairs("train", src, tgt);
  const auto dev = w.pairs("dev", src, tgt);
  const auto test = w.pairs("test", src, tgt);
  const auto dev_src = sources(dev);
  const auto test_src = sources(test);
  const train::ParallelData dev_map{{key, dev}};
  auto mc = config.model;
  mc.vocab = static_cast<int>(w.vocab->size());
  const std::uint64_t seed = config.train.seed;
  corpus::PipelineManifest manifest;

  AblationLadder ladder;
  ladder.direction = key;
  Outputs last;

  const auto translator = [&](const std::string& id, ModelPtr m) {
    return decode::model_translator(id, std::move(m), w.vocab, src, tgt, config.decode);
  };
  const auto run = [&](const decode::Translator& t) { return Outputs{t.translate(dev_src), t.translate(test_src)}; };
  const auto record = [&](const std::string& step, const Outputs& out, nlohmann::json details) {
    LadderRow row;
    row.step = step;
    row.dev_bleu = decode::corpus_bleu(out.dev, targets(dev)).score;
    row.test_bleu = decode::corpus_bleu(out.test, targets(test)).score;
    auto examples = nlohmann::json::array();
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto n = post::count_number_mismatches(test[i].src, out.test[i]);
      row.number_mismatches += n;
      if (n > 0 && examples.size() < 5) examples.push_back({join_words(test[i].src), join_words(out.test[i])});
    }
    details["number_mismatch_examples"] = std::move(examples);
    if (!ladder.rows.empty()) {
      row.delta_dev = row.dev_bleu - ladder.rows.front().dev_bleu;
      row.delta_test = row.test_bleu - ladder.rows.front().test_bleu;
    }
    row.details = std::move(details);
    say(step + ": dev " + std::to_string(row.dev_bleu) + ", test " + std::to_string(row.test_bleu) +
        ", number mismatches " + std::to_string(row.number_mismatches));
    ladder.rows.push_back(std::move(row));
    last = out;
  };
  const auto done = [&](std::size_t i) { return steps.size() <= i; };
  const auto train_cfg = [&](int updates, std::uint64_t salt) {
    auto tc = config.train;
    tc.total_steps = updates;
    tc.warmup_steps = std::min(tc.warmup_steps, updates);
    tc.seed = mix_seed(seed, salt);
    return tc;
  };
  const auto finish = [&] {
    if (!run_dir.empty()) manifest.write(sub(run_dir, "manifest.jsonl"));
    return ladder;
  };

  say("baseline: " + std::to_string(config.baseline_updates) + " updates on " + std::to_string(para.size()) + " pairs");
  model::Transformer<float> base(mc, mix_seed(seed, 11));
  train::train_pairs(base, para, dev_map, *w.vocab, train_cfg(config.baseline_updates, 12), sub(run_dir, "baseline"));
  record("baseline", run(translator("baseline", std::make_shared<const model::Transformer<float>>(base))),
         {{"updates", config.baseline_updates}, {"train_pairs", para.size()}});
  if (done(1)) return finish();

  train::ParallelData o2m;
  train::ParallelData o2m_dev;
  train::ParallelData m2o;
  train::ParallelData m2o_dev;
  for (const auto& lang : config.world.languages) {
    o2m[train::direction_key(kPivot, lang)] = w.pairs("train", kPivot, lang);
    o2m_dev[train::direction_key(kPivot, lang)] = w.pairs("dev", kPivot, lang);
    m2o[train::direction_key(lang, kPivot)] = w.pairs("train", lang, kPivot);
    m2o_dev[train::direction_key(lang, kPivot)] = w.pairs("dev", lang, kPivot);
  }
  const auto pretrain_set = [&](train::DirectionSet set, const train::ParallelData& data,
                                const train::ParallelData& data_dev, std::uint64_t salt) {
    say("pretraining " + train::to_string(set) + " for " + std::to_string(config.pretrain_updates) + " updates");
    model::Transformer<float> m(mc, mix_seed(seed, salt));
    const train::PretrainSpec spec{set, kPivot, config.temperature, config.pretrain_updates};
    return train::pretrain(m, spec, data, data_dev, *w.vocab, train_cfg(config.pretrain_updates, salt + 1),
                           sub(run_dir, "pretrain-" + train::to_string(set)))
        .checkpoints.back();
  };
  const auto fwd_set = forward ? train::DirectionSet::O2M : train::DirectionSet::M2O;
  const auto bwd_set = forward ? train::DirectionSet::M2O : train::DirectionSet::O2M;
  const auto pt_fwd = forward ? pretrain_set(fwd_set, o2m, o2m_dev, 21) : pretrain_set(fwd_set, m2o, m2o_dev, 21);
  const auto pt_bwd = forward ? pretrain_set(bwd_set, m2o, m2o_dev, 23) : pretrain_set(bwd_set, o2m, o2m_dev, 23);
  record("+multi-PT",
         run(translator("pretrained", std::make_shared<const model::Transformer<float>>(model::from_checkpoint(pt_fwd)))),
         {{"updates", config.pretrain_updates}, {"direction_set", train::to_string(fwd_set)}});
  if (done(2)) return finish();

  say("finetuning both directions for " + std::to_string(config.finetune_updates) + " updates");
  const auto ft_fwd = train::finetune({src, tgt, 1, 4, config.finetune_updates}, pt_fwd, *w.vocab, *w.vocab, para, dev,
                                      train_cfg(config.finetune_updates, 31), sub(run_dir, "finetune-fwd"))
                          .checkpoints.back();
  const auto ft_bwd = train::finetune({tgt, src, 1, 4, config.finetune_updates}, pt_bwd, *w.vocab, *w.vocab,
                                      flip_all(para), flip_all(dev), train_cfg(config.finetune_updates, 32),
                                      sub(run_dir, "finetune-bwd"))
                          .checkpoints.back();
  auto ft_model = std::make_shared<const model::Transformer<float>>(model::from_checkpoint(ft_fwd));
  record("+specific-FT", run(translator("finetuned", ft_model)), {{"updates", config.finetune_updates}});
  if (done(3)) return finish();

  augment::SelfTrainingConfig st;
  st.rounds = config.self_training_rounds;
  st.at_model = mc;
  st.nat_model = mc;
  st.nat_model.mode = model::Mode::NAT;
  st.train = train_cfg(config.teacher_updates, 41);
  st.decode = config.decode;
  st.seed = mix_seed(seed, 42);
  st.forward_init = ft_fwd;
  st.backward_init = ft_bwd;
  std::vector<Sentence> mono_src;
  std::vector<Sentence> mono_tgt;
  if (config.mono_size > 0) {
    mono_src = corpus::generate_monolingual(w.language(src), config.mono_size, mix_seed(seed, 43),
                                            config.world.generation);
    mono_tgt = corpus::generate_monolingual(w.language(tgt), config.mono_size, mix_seed(seed, 44),
                                            config.world.generation);
  }
  say("self-training: " + std::to_string(st.rounds) + " round(s)");
  const auto st_result =
      augment::run_bidirectional_self_training(st, src, tgt, para, mono_src, mono_tgt, dev, w.vocab, &manifest);
  const auto student = [&](std::uint64_t salt, const std::string& name) {
    auto m = std::make_shared<model::Transformer<float>>(model::from_checkpoint(ft_fwd));
    train::train_pairs(*m, st_result.corpus, dev_map, *w.vocab, train_cfg(config.student_updates, salt),
                       sub(run_dir, name));
    return ModelPtr(m);
  };
  say("training the student on " + std::to_string(st_result.corpus.size()) + " pairs");
  const auto student_a = student(51, "student-a");
  nlohmann::json st_details{{"corpus", st_result.corpus.size()}, {"rounds", nlohmann::json::array()}};
  for (const auto& r : st_result.rounds) {
    st_details["rounds"].push_back({{"round", r.round},
                                    {"synthetic", r.synthetic},
                                    {"teacher_dev_bleu", r.teacher_dev_bleu},
                                    {"best_forward", r.best_forward},
                                    {"best_backward", r.best_backward}});
  }
  record("+self-training", run(translator("student-a", student_a)), st_details);
  if (done(4)) return finish();

  say("training a second student for the ensemble");
  const std::vector<adapt::Candidate> candidates = {
      {"student-a", student_a}, {"student-b", student(52, "student-b")}, {"finetuned", ft_model}};
  const auto selection = adapt::greedy_select(candidates, dev, w.vocab, config.ensemble_max, config.decode);
  auto members = adapt::resolve(selection.spec, candidates);
  nlohmann::json sel_details{{"members", selection.spec.members},
                             {"dev_bleu", selection.dev_bleu},
                             {"best_single_bleu", selection.best_single_bleu}};
  const auto ensemble = adapt::ensemble_translator(members, w.vocab, src, tgt, config.decode);
  record("+ensemble", run(ensemble), sel_details);
  if (done(5)) return finish();

  adapt::GenFtConfig gc;
  gc.max_iters = config.genft_iters;
  gc.train = train_cfg(config.genft_updates, 61);
  gc.decode = config.decode;
  gc.seed = mix_seed(seed, 62);
  say("generalization finetuning of " + selection.spec.members.front());
  const auto gen = adapt::generalization_finetune(model::to_checkpoint(*members.front(), 0), {{"test", test_src}},
                                                  ensemble, para, dev, w.vocab, gc, &manifest);
  members.front() = std::make_shared<const model::Transformer<float>>(model::from_checkpoint(gen.model));
  nlohmann::json gen_details{{"initial_dev_bleu", gen.initial_dev_bleu},
                             {"converged", gen.converged},
                             {"iterations", nlohmann::json::array()}};
  for (const auto& it : gen.iterations) {
    gen_details["iterations"].push_back({{"iteration", it.iteration},
                                         {"pseudo_pairs", it.pseudo_pairs},
                                         {"base_pairs", it.base_pairs},
                                         {"dev_bleu", it.dev_bleu}});
  }
  record("+generalization-FT", run(adapt::ensemble_translator(members, w.vocab, src, tgt, config.decode)),
         gen_details);
  if (done(6)) return finish();

  const auto profile = post::toy_profile(w.language(tgt));
  Outputs repaired = last;
  std::size_t changes = 0;
  const auto fix = [&](const std::vector<Sentence>& srcs, std::vector<Sentence>& hyps) {
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      auto r = post::repair_numbers(srcs[i], hyps[i]);
      changes += r.changes.size();
      hyps[i] = post::convert_punctuation(r.tokens, profile);
    }
  };
  fix(dev_src, repaired.dev);
  fix(test_src, repaired.test);
  record("+post-processing", repaired, {{"number_repairs", changes}, {"punctuation_profile", profile.name}});
  return finish();
}

}  // namespace vega::pipeline
