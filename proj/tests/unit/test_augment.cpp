#include <cmath>
#include <map>

#include "doctest.h"
#include "vega/augment/cycle.hpp"
#include "vega/augment/self_training.hpp"
#include "vega/core/error.hpp"
#include "vega/corpus/toy_language.hpp"

using namespace vega;
using namespace vega::augment;

namespace {

const std::vector<corpus::ToyLanguage>& family() {
  static const auto f = corpus::generate_language_family(21, 150);
  return f;
}

corpus::GenerationOptions small_options() {
  corpus::GenerationOptions o;
  o.concept_limit = 40;
  o.max_clauses = 2;
  return o;
}

const NgramLM& l1_lm() {
  static const NgramLM lm = train_ngram_lm(corpus::generate_monolingual(family()[1], 3000, 5, small_options()));
  return lm;
}

decode::Translator tagging(const std::string& id, const std::string& from, const std::string& to) {
  return {id, from, to, [id](const Sentence& s) {
            Sentence out = s;
            out.push_back(id);
            return out;
          }};
}

TeacherSet fake_teachers(const std::string& src, const std::string& tgt) {
  TeacherSet set{src, tgt, {}, {}, {}, {}};
  for (int i = 0; i < 3; ++i) {
    set.forward_at.push_back({tagging("fa" + std::to_string(i), src, tgt), TeacherKind::AT, 1});
    set.backward_at.push_back({tagging("ba" + std::to_string(i), tgt, src), TeacherKind::AT, 1});
  }
  set.forward_nat.push_back({tagging("fn", src, tgt), TeacherKind::NAT, 1});
  set.backward_nat.push_back({tagging("bn", tgt, src), TeacherKind::NAT, 1});
  return set;
}

}  // namespace

TEST_CASE("n-gram LM") {
  const auto& lm = l1_lm();
  SUBCASE("conditionals are normalised") {
    const std::vector<std::vector<std::string>> histories = {
        {}, {lm.vocabulary()[5]}, {lm.vocabulary()[7], lm.vocabulary()[9]}, {"never-seen", "x"}};
    for (const auto& h : histories) {
      double total = 0;
      for (const auto& w : lm.vocabulary()) total += std::exp(lm.log_prob(h, w));
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
  SUBCASE("untrained model is uniform") {
    const NgramLM flat(3, 0.1, {"a", "b", "c"});
    CHECK(flat.vocab_size() == 5);
    CHECK(lm_score(flat, {"a", "c", "zzz"}) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("degraded sentences score worse") {
    const auto sentences = corpus::generate_monolingual(family()[1], 200, 5, small_options());
    int worse = 0;
    int total = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].size() < 5) continue;
      const auto degraded = corpus::degrade_monolingual(sentences[i], 0.5, i).tokens;
      ++total;
      worse += lm_score(lm, degraded) > lm_score(lm, sentences[i]);
    }
    MESSAGE("degraded scored worse on " << worse << "/" << total);
    CHECK(worse * 100 >= total * 95);
  }
  CHECK_THROWS_AS(lm_score(lm, {}), InvalidArgument);
  CHECK_THROWS_AS(NgramLM(0), InvalidArgument);
}

TEST_CASE("cycle translation") {
  const auto& e = family()[0];
  const auto& l1 = family()[1];
  const auto t2s = decode::oracle_translator(l1, e);
  const auto s2t = decode::oracle_translator(e, l1);

  SUBCASE("ties replace exactly the later half") {
    const NgramLM flat(3, 0.1);
    const auto mono = corpus::generate_monolingual(l1, 7, 3, small_options());
    corpus::PipelineManifest manifest;
    const auto out = cycle_translate(mono, "L1", t2s, s2t, flat, &manifest);
    CHECK(out.sentences.size() == 7);
    CHECK(out.replaced == std::vector<std::size_t>{3, 4, 5, 6});
    CHECK(out.origins[2] == corpus::Origin::authentic);
    CHECK(out.origins[3] == corpus::Origin::cycle_translated);
    REQUIRE(manifest.stage("cycle_translate").size() == 1);
    CHECK(manifest.stage("cycle_translate")[0].at("replaced") == 4);
    CHECK(cycle_translate({}, "L1", t2s, s2t, flat).sentences.empty());
  }

  SUBCASE("oracle round trip repairs the degraded half") {
    auto round_trip = [&](const Sentence& x) { return s2t.translate_one(t2s.translate_one(x)); };
    const auto clean = corpus::generate_monolingual(l1, 40, 99, small_options());
    std::vector<Sentence> mono;
    std::size_t degraded = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      auto d = corpus::degrade_monolingual(clean[i], 0.3, i).tokens;
      bool broken = false;
      try {
        broken = i % 2 == 1 && round_trip(d) != d;
      } catch (const std::exception&) {
      }
      mono.push_back(broken ? d : clean[i]);
      degraded += broken;
    }
    REQUIRE(degraded > 5);
    const auto out = cycle_translate(mono, "L1", t2s, s2t, l1_lm());
    CHECK(out.replaced.size() == (mono.size() + 1) / 2);
    std::size_t caught = 0;
    double before = 0;
    double after = 0;
    for (std::size_t i : out.replaced) {
      CHECK(round_trip(out.sentences[i]) == out.sentences[i]);
      caught += round_trip(mono[i]) != mono[i];
      before += out.score_before[i];
      after += out.score_after[i];
    }
    MESSAGE("degraded sentences among the replaced half: " << caught << "/" << degraded);
    CHECK(caught == degraded);
    CHECK(after < before);
  }

  CHECK_THROWS_AS(cycle_translate({{"x"}}, "L1", s2t, t2s, l1_lm()), InvalidArgument);
  CHECK_THROWS_AS(cycle_translate({{"x"}}, "L1", t2s, t2s, l1_lm()), InvalidArgument);
}

TEST_CASE("self-training round accounting") {
  const auto para = corpus::generate_parallel(family()[0], family()[1], 1000, 8, small_options());
  const auto teachers = fake_teachers("E", "L1");
  CHECK_NOTHROW(teachers.validate());
  corpus::PipelineManifest manifest;
  const auto syn = self_train_round(teachers, para, {}, {}, 1, &manifest);
  CHECK(syn.size() == 8000);
  std::map<std::string, std::size_t> groups;
  for (const auto& p : syn) {
    REQUIRE(p.teacher_id.has_value());
    ++groups[*p.teacher_id];
    CHECK(p.round == 1);
    CHECK(p.src_lang == "E");
    CHECK(p.tgt_lang == "L1");
    CHECK_NOTHROW(corpus::validate(p));
    const bool nat = *p.teacher_id == "fn" || *p.teacher_id == "bn";
    CHECK(p.origin == (nat ? corpus::Origin::synthetic_nat : corpus::Origin::synthetic_at));
    const bool backward = (*p.teacher_id)[0] == 'b';
    CHECK((backward ? p.src.back() : p.tgt.back()) == *p.teacher_id);
  }
  CHECK(groups.size() == 8);
  for (const auto& [_, n] : groups) CHECK(n == 1000);
  CHECK(manifest.stage("self_train_round")[0].at("synthetic") == 8000);

  const auto mono_src = corpus::generate_monolingual(family()[0], 30, 1, small_options());
  const auto mono_tgt = corpus::generate_monolingual(family()[1], 50, 1, small_options());
  const std::vector<corpus::SentencePair> few(para.begin(), para.begin() + 10);
  CHECK(self_train_round(teachers, few, mono_src, mono_tgt, 2).size() == 8 * 10 + 4 * 30 + 4 * 50);

  auto incomplete = teachers;
  incomplete.backward_nat.clear();
  CHECK_THROWS_AS(incomplete.validate(), InvalidState);
  CHECK_THROWS_AS(self_train_round(TeacherSet{"E", "L1", {}, {}, {}, {}}, para, {}, {}, 1), InvalidState);
  auto wrong = teachers;
  wrong.forward_at[0].translator.src_lang = "L2";
  CHECK_THROWS_AS(wrong.validate(), InvalidArgument);
  CHECK_THROWS_AS(self_train_round(teachers, para, {}, {}, 0), InvalidArgument);
}

TEST_CASE("bidirectional self-training end to end") {
  const auto& e = family()[0];
  const auto& l2 = family()[2];
  corpus::GenerationOptions o = small_options();
  o.max_clauses = 1;
  const auto para = corpus::generate_parallel(e, l2, 40, 1, o);
  const auto dev = corpus::generate_parallel(e, l2, 10, 2, o);
  std::vector<Sentence> text;
  for (const auto& p : para) {
    text.push_back(p.src);
    text.push_back(p.tgt);
  }
  const auto vocab = std::make_shared<const subword::SubwordVocab>(subword::train_bpe(text, 60, {"<E>", "<L2>"}));

  SelfTrainingConfig cfg;
  cfg.at_model.layers = 1;
  cfg.at_model.hidden = 16;
  cfg.at_model.ffn = 32;
  cfg.at_model.heads = 2;
  cfg.nat_model = cfg.at_model;
  cfg.nat_model.mode = model::Mode::NAT;
  cfg.train.total_steps = 4;
  cfg.train.warmup_steps = 1;
  cfg.train.tokens_per_batch = 256;
  cfg.decode.beam.beam_size = 2;
  cfg.decode.beam.max_len = 8;

  cfg.rounds = 0;
  CHECK(run_bidirectional_self_training(cfg, "E", "L2", para, {}, {}, dev, vocab).corpus == para);

  cfg.rounds = 2;
  corpus::PipelineManifest manifest;
  const auto result = run_bidirectional_self_training(cfg, "E", "L2", para, {}, {}, dev, vocab, &manifest);
  CHECK(result.corpus.size() == para.size() * 9);
  REQUIRE(result.rounds.size() == 2);
  CHECK(result.rounds[0].training_pairs == 40);
  CHECK(result.rounds[1].training_pairs == 360);
  CHECK(result.rounds[1].teacher_dev_bleu.size() == 6);
  CHECK(result.rounds[0].best_forward.rfind("r1-fwd-at", 0) == 0);
  std::map<std::string, std::size_t> groups;
  for (const auto& p : result.corpus) {
    if (p.origin == corpus::Origin::authentic) continue;
    CHECK(p.round == 2);
    ++groups[*p.teacher_id];
  }
  CHECK(groups.size() == 8);
  CHECK(manifest.stage("self_train_round").size() == 2);
}
