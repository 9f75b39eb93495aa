// Acceptance suite. Prints one PASS/FAIL line per criterion; exits non-zero
// if any fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "vega/adapt/ensemble.hpp"
#include "vega/augment/cycle.hpp"
#include "vega/augment/self_training.hpp"
#include "vega/core/error.hpp"
#include "vega/corpus/toy_language.hpp"
#include "vega/decode/beam.hpp"
#include "vega/decode/bleu.hpp"
#include "vega/filter/filter.hpp"
#include "vega/filter/sampler.hpp"
#include "vega/model/gradcheck.hpp"
#include "vega/model/serialize.hpp"
#include "vega/numerics/gradcheck.hpp"
#include "vega/numerics/ops.hpp"
#include "vega/pipeline/ladder.hpp"
#include "vega/pipeline/transfer.hpp"
#include "vega/post/numbers.hpp"
#include "vega/post/punctuation.hpp"
#include "vega/train/trainer.hpp"

using namespace vega;
using json = nlohmann::json;
using model::TokenId;
namespace fs = std::filesystem;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr double kFdStep = 1e-3;
constexpr double kModelFdStep = 1e-4;
constexpr int kDecodeInstances = 200;
constexpr double kScoreTolerance = 1e-5;
constexpr double kBleuTolerance = 0.01;
constexpr double kSamplerTolerance = 0.01;
constexpr std::size_t kMinTransferWins = 4;
constexpr double kTransferSeconds = 30 * 60;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects named sub-checks; the criterion passes when all of them hold.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failed_.push_back(what);
  }
  Outcome done(std::string detail) const {
    if (failed_.empty()) return {true, std::move(detail)};
    std::string why = "failed:";
    for (const auto& f : failed_) why += " [" + f + "]";
    return {false, why + "; " + detail};
  }

 private:
  std::vector<std::string> failed_;
};

std::string fmt(double v, int digits = 2, bool scientific = false) {
  std::ostringstream out;
  out.setf(scientific ? std::ios::scientific : std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

void log(const std::string& line) { std::cerr << "  " << line << std::endl; }

using numerics::Tape;
using numerics::Var;
using TD = numerics::Tensor<double>;

TD random_tensor(numerics::Index r, numerics::Index c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  TD t(r, c);
  for (numerics::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0, scale);
  return t;
}

// ---------------------------------------------------------------- 1

Outcome gradient_oracle() {
  const auto start = Clock::now();
  using numerics::LossBuilder;
  const TD w = random_tensor(4, 5, 21, 0.5);
  const TD other = random_tensor(4, 5, 22, 0.5);
  const TD square = random_tensor(5, 3, 23, 0.5);
  const std::vector<std::int32_t> gold{1, 0, 4, 2};

  std::vector<std::pair<std::string, double>> errors;
  auto op = [&](const std::string& name, const LossBuilder<double>& f, const TD& at) {
    errors.emplace_back(name, numerics::finite_difference_check<double>(f, at, kFdStep));
  };
  using namespace numerics;
  op("matmul", [&](Tape<double>& t, Var x) { return sum(t, mul(t, matmul(t, x, t.constant(square)), t.constant(TD(other.leftCols(3))))); }, w);
  op("matmul_nt", [&](Tape<double>& t, Var x) { return sum(t, mul(t, matmul_nt(t, x, t.constant(other)), t.constant(TD(random_tensor(4, 4, 3))))); }, w);
  op("add", [&](Tape<double>& t, Var x) { return sum(t, mul(t, add(t, x, t.constant(other)), t.constant(other))); }, w);
  op("add_row", [&](Tape<double>& t, Var row) { return sum(t, mul(t, add_row(t, t.constant(w), row), t.constant(other))); }, TD(other.row(3)));
  op("mul", [&](Tape<double>& t, Var x) { return sum(t, mul(t, x, x)); }, w);
  op("scale", [&](Tape<double>& t, Var x) { return sum(t, mul(t, scale(t, x, 1.7), t.constant(other))); }, w);
  op("relu", [&](Tape<double>& t, Var x) { return sum(t, mul(t, relu(t, x), t.constant(other))); }, w);
  op("softmax", [&](Tape<double>& t, Var x) { return sum(t, mul(t, softmax(t, scale(t, x, 2.0)), t.constant(other))); }, w);
  op("layer_norm.x", [&](Tape<double>& t, Var x) {
    return sum(t, mul(t, layer_norm(t, x, t.constant(other.row(1)), t.constant(other.row(2))), t.constant(other)));
  }, w);
  op("layer_norm.gamma", [&](Tape<double>& t, Var g) {
    return sum(t, mul(t, layer_norm(t, t.constant(other), g, t.constant(other.row(2))), t.constant(w)));
  }, TD(w.row(0)));
  op("layer_norm.beta", [&](Tape<double>& t, Var b) {
    return sum(t, mul(t, layer_norm(t, t.constant(other), t.constant(other.row(1)), b), t.constant(w)));
  }, TD(w.row(1)));
  op("embedding_lookup", [&](Tape<double>& t, Var table) {
    return sum(t, mul(t, embedding_lookup(t, table, {3, 1, 3, 0}), t.constant(other)));
  }, w);
  op("cross_entropy", [&](Tape<double>& t, Var x) { return cross_entropy(t, x, gold); }, w);
  op("cross_entropy.smoothed", [&](Tape<double>& t, Var x) { return cross_entropy(t, x, gold, 0.1); }, w);
  op("dropout", [&](Tape<double>& t, Var x) {
    Rng rng(77);
    return sum(t, mul(t, dropout(t, x, 0.3, rng), t.constant(other)));
  }, w);
  op("segment_mean", [&](Tape<double>& t, Var x) {
    return sum(t, mul(t, segment_mean(t, x, {{0, 3}, {3, 1}}), t.constant(TD(other.topRows(2)))));
  }, w);

  const TD q = random_tensor(7, 8, 31);
  const TD k = random_tensor(9, 8, 32);
  const TD v = random_tensor(9, 8, 33);
  const TD weight = random_tensor(7, 8, 34);
  for (bool causal : {false, true}) {
    AttentionLayout layout;
    layout.causal = causal;
    layout.queries = {{0, 3}, {3, 4}};
    layout.keys = causal ? std::vector<Segment>{{0, 3}, {3, 4}} : std::vector<Segment>{{0, 4}, {4, 5}};
    const TD keys = causal ? q : k;
    const TD vals = causal ? TD(v.topRows(7)) : v;
    auto loss = [&](Tape<double>& t, Var qv, Var kv, Var vv) {
      return sum(t, mul(t, attention(t, qv, kv, vv, layout, 2), t.constant(weight)));
    };
    const std::string tag = causal ? "attention.causal." : "attention.";
    op(tag + "q", [&](Tape<double>& t, Var x) { return loss(t, x, t.constant(keys), t.constant(vals)); }, q);
    op(tag + "k", [&](Tape<double>& t, Var x) { return loss(t, t.constant(q), x, t.constant(vals)); }, keys);
    op(tag + "v", [&](Tape<double>& t, Var x) { return loss(t, t.constant(q), t.constant(keys), x); }, vals);
  }

  const int vocab = 13;
  Rng rng(21);
  std::vector<model::Example> batch;
  for (int i = 0; i < 2; ++i) {
    model::Example ex;
    for (int s = 0; s < 3 + i; ++s) ex.src.push_back(static_cast<TokenId>(4 + rng.index(vocab - 4)));
    for (int s = 0; s < 2 + i; ++s) ex.tgt.push_back(static_cast<TokenId>(4 + rng.index(vocab - 4)));
    ex.start = 5;
    batch.push_back(ex);
  }
  std::size_t probed = 0;
  for (model::Mode mode : {model::Mode::AT, model::Mode::NAT}) {
    model::Transformer<double> m(model::ModelConfig::tiny(vocab, mode), 3);
    double worst = 0;
    for (const auto& c : model::model_gradient_check(m, batch, 0.1, kModelFdStep, 6, 99)) {
      worst = std::max(worst, c.max_error);
      probed += c.probed;
    }
    errors.emplace_back("tiny-transformer." + model::to_string(mode), worst);
  }

  const double elapsed = seconds_since(start);
  Checks checks;
  double worst = 0;
  for (const auto& [name, err] : errors) {
    checks.expect(err < kGradTolerance, name + " error " + fmt(err, 2, true));
    worst = std::max(worst, err);
  }
  checks.expect(elapsed < kGradSeconds, "runtime " + fmt(elapsed) + " s");
  return checks.done(std::to_string(errors.size()) + " checks, worst relative error " + fmt(worst, 2, true) + ", " +
                     std::to_string(probed) + " model coordinates, " + fmt(elapsed) + " s");
}

// ---------------------------------------------------------------- 2

model::ModelConfig micro(int vocab) {
  model::ModelConfig c;
  c.layers = 1;
  c.hidden = 16;
  c.ffn = 32;
  c.heads = 2;
  c.vocab = vocab;
  return c;
}

model::Transformer<float> sharp_model(int vocab, std::uint64_t seed) {
  model::Transformer<float> m(micro(vocab), seed);
  m.parameter("embed").value *= 4.0f;
  return m;
}

std::vector<TokenId> random_src(Rng& rng, int vocab) {
  std::vector<TokenId> src(1 + rng.index(4));
  for (auto& t : src) t = static_cast<TokenId>(4 + rng.index(static_cast<std::uint64_t>(vocab - 4)));
  return src;
}

struct Scored {
  std::vector<TokenId> tokens;
  double score;
};

// Best sequence by exhaustive enumeration, each candidate scored by a fresh
// single-hypothesis session.
Scored exhaustive_best(const model::Transformer<float>& m, const std::vector<TokenId>& src, int max_len,
                       double alpha) {
  Scored best{{}, -std::numeric_limits<double>::infinity()};
  std::vector<TokenId> choices;
  for (TokenId v = 0; v < m.config().vocab; ++v) {
    if (!decode::is_banned(v) && v != subword::kEos) choices.push_back(v);
  }
  auto offer = [&](const std::vector<TokenId>& tokens, double score) {
    if (score > best.score) best = {tokens, score};
  };
  std::function<void(std::vector<TokenId>&)> rec = [&](std::vector<TokenId>& prefix) {
    auto session = decode::start_session(m, src);
    auto lp = session->step({0}, {subword::kBos});
    double logprob = 0;
    for (TokenId t : prefix) {
      logprob += lp(0, t);
      lp = session->step({0}, {t});
    }
    offer(prefix, decode::normalized_score(logprob + lp(0, subword::kEos), prefix.size() + 1, alpha));
    for (TokenId c : choices) {
      prefix.push_back(c);
      if (static_cast<int>(prefix.size()) == max_len) {
        offer(prefix, decode::normalized_score(logprob + lp(0, c), prefix.size(), alpha));
      } else {
        rec(prefix);
      }
      prefix.pop_back();
    }
  };
  std::vector<TokenId> empty;
  rec(empty);
  return best;
}

Outcome decoding_oracle() {
  Checks checks;
  std::ostringstream detail;
  // vocab counts the four special tokens; 9 gives five content tokens.
  for (int vocab : {5, 9}) {
    Rng rng(static_cast<std::uint64_t>(vocab));
    int matched = 0;
    for (int trial = 0; trial < kDecodeInstances; ++trial) {
      const auto m = sharp_model(vocab, 1000 + static_cast<std::uint64_t>(trial) + 7919 * static_cast<std::uint64_t>(vocab));
      const auto src = random_src(rng, vocab);
      decode::BeamConfig cfg;
      cfg.max_len = 1 + static_cast<int>(rng.index(4));
      cfg.beam_size = static_cast<int>(std::pow(vocab, cfg.max_len));
      const auto best = exhaustive_best(m, src, cfg.max_len, cfg.length_penalty);
      const auto got = decode::beam_search(m, src, cfg, subword::kBos);
      matched += got.tokens == best.tokens && std::abs(got.score - best.score) <= kScoreTolerance * std::max(1.0, std::abs(best.score));
    }
    checks.expect(matched == kDecodeInstances, "vocab " + std::to_string(vocab) + " matched " + std::to_string(matched));
    detail << "vocab " << vocab << ": beam = exhaustive on " << matched << "/" << kDecodeInstances << "; ";
  }
  Rng rng(9);
  int same = 0;
  const int greedy_trials = 100;
  for (int trial = 0; trial < greedy_trials; ++trial) {
    const auto m = sharp_model(24, static_cast<std::uint64_t>(trial));
    const auto src = random_src(rng, 24);
    decode::BeamConfig cfg;
    cfg.beam_size = 1;
    const auto b = decode::beam_search(m, src, cfg, subword::kBos);
    const auto g = decode::greedy_decode(m, src, cfg, subword::kBos);
    same += b.tokens == g.tokens && b.logprob == g.logprob && b.finished == g.finished;
  }
  checks.expect(same == greedy_trials, "beam 1 vs greedy " + std::to_string(same));
  detail << "beam 1 = greedy on " << same << "/" << greedy_trials;
  return checks.done(detail.str());
}

// ---------------------------------------------------------------- 3

Outcome bleu_oracle() {
  Checks checks;
  const Sentence s1 = split_words("the cat sat on the mat");
  const Sentence s2 = split_words("a b c d e f g");
  const double identical = decode::corpus_bleu({s1, s2}, {s1, s2}).score;
  checks.expect(identical == 100.0, "identical corpora " + std::to_string(identical));

  // Four matching unigrams..4-grams against a five-token reference:
  // precisions 1, BP = exp(1 - 5/4) = 0.7788.
  const double hand = 100.0 * std::exp(1.0 - 5.0 / 4.0);
  const double short_hyp = decode::corpus_bleu({split_words("a b c d")}, {split_words("a b c d e")}).score;
  checks.expect(std::abs(short_hyp - 77.88) <= kBleuTolerance, "brevity case " + std::to_string(short_hyp));
  checks.expect(std::abs(short_hyp - hand) < 1e-9, "brevity case vs closed form");

  Sentence hyp;
  Sentence ref;
  for (int i = 0; i < 20; ++i) {
    hyp.push_back("h" + std::to_string(i));
    ref.push_back("r" + std::to_string(i));
  }
  const double zero20 = decode::corpus_bleu({hyp}, {ref}).score;
  const double zero4 = decode::corpus_bleu({split_words("w x y z")}, {split_words("a b c d")}).score;
  checks.expect(zero20 > 0.0 && zero4 > 0.0, "smoothing");
  return checks.done("identical " + fmt(identical) + ", brevity case " + fmt(short_hyp, 4) +
                     ", zero overlap " + fmt(zero4, 4) + " (4 tokens) and " + fmt(zero20, 4) + " (20 tokens)");
}

// ---------------------------------------------------------------- 4

augment::Teacher oracle_teacher(const corpus::ToyLanguage& from, const corpus::ToyLanguage& to,
                                const std::string& id, augment::TeacherKind kind) {
  auto t = decode::oracle_translator(from, to);
  t.id = id;
  return {t, kind, 1};
}

Outcome pipeline_accounting() {
  Checks checks;
  const auto family = corpus::generate_language_family(41, 200);
  const auto& e = family[0];
  const auto& l1 = family[1];
  corpus::GenerationOptions opt;
  opt.max_clauses = 2;
  opt.concept_limit = 60;
  const auto para = corpus::generate_parallel(e, l1, 1000, 3, opt);

  augment::TeacherSet teachers{"E", "L1", {}, {}, {}, {}};
  for (int i = 0; i < 3; ++i) {
    teachers.forward_at.push_back(oracle_teacher(e, l1, "fwd-at-" + std::to_string(i), augment::TeacherKind::AT));
    teachers.backward_at.push_back(oracle_teacher(l1, e, "bwd-at-" + std::to_string(i), augment::TeacherKind::AT));
  }
  teachers.forward_nat.push_back(oracle_teacher(e, l1, "fwd-nat", augment::TeacherKind::NAT));
  teachers.backward_nat.push_back(oracle_teacher(l1, e, "bwd-nat", augment::TeacherKind::NAT));

  corpus::PipelineManifest manifest;
  const auto synthetic = augment::self_train_round(teachers, para, {}, {}, 1, &manifest);

  auto mono = corpus::generate_monolingual(l1, 999, 17, opt);
  for (std::size_t i = 1; i < mono.size(); i += 2) mono[i] = corpus::degrade_monolingual(mono[i], 0.3, i).tokens;
  const auto lm = augment::train_ngram_lm(corpus::generate_monolingual(l1, 3000, 5, opt));
  const auto cycle = augment::cycle_translate(mono, "L1", decode::oracle_translator(l1, e),
                                              decode::oracle_translator(e, l1), lm, &manifest);

  std::map<std::string, std::vector<Sentence>> langid_corpora;
  for (const auto& lang : family) langid_corpora[lang.id()] = corpus::generate_monolingual(lang, 300, 1, opt);
  const auto langid = filter::train_langid(langid_corpora);
  auto noisy = corpus::generate_parallel(e, l1, 500, 9, opt);
  const std::size_t clean = noisy.size();
  for (std::size_t i = 0; i < 20; ++i) noisy.push_back(noisy[i]);
  for (std::size_t i = 20; i < 30; ++i) {
    auto bad = noisy[i];
    bad.tgt[0] += '\x01';
    noisy.push_back(bad);
  }
  for (std::size_t i = 30; i < 40; ++i) {
    auto swapped = corpus::flipped(noisy[i]);
    swapped.src_lang = "E";
    swapped.tgt_lang = "L1";
    noisy.push_back(swapped);
  }
  const auto [kept, report] = filter::filter_pairs(noisy, langid);
  auto record = report.to_json();
  record["stage"] = "filter";
  manifest.append(record);

  const auto path = (fs::temp_directory_path() / "vega_acceptance_manifest.json").string();
  manifest.write(path);
  const auto audit = corpus::PipelineManifest::read(path);
  fs::remove(path);

  // Audit: every count the manifest claims is recounted from the data.
  const auto st = audit.stage("self_train_round");
  checks.expect(st.size() == 1, "one self-training record");
  std::map<std::string, std::size_t> groups;
  for (const auto& p : synthetic) groups[p.teacher_id.value_or("?")]++;
  checks.expect(synthetic.size() == 8000, "synthetic pairs " + std::to_string(synthetic.size()));
  checks.expect(groups.size() == 8, "teacher groups " + std::to_string(groups.size()));
  for (const auto& [id, n] : groups) checks.expect(n == 1000, id + " emitted " + std::to_string(n));
  if (st.size() == 1) {
    checks.expect(st[0].at("synthetic").get<std::size_t>() == synthetic.size(), "manifest synthetic count");
    checks.expect(st[0].at("para").get<std::size_t>() == 1000, "manifest para count");
    std::map<std::string, std::size_t> claimed = st[0].at("teachers");
    checks.expect(claimed == groups, "manifest teacher groups");
  }

  const std::size_t half = (mono.size() + 1) / 2;
  const auto ct = audit.stage("cycle_translate");
  checks.expect(ct.size() == 1, "one cycle record");
  checks.expect(cycle.replaced.size() == half, "cycle replaced " + std::to_string(cycle.replaced.size()));
  std::size_t marked = 0;
  for (auto o : cycle.origins) marked += o == corpus::Origin::cycle_translated;
  checks.expect(marked == half, "cycle origins");
  if (ct.size() == 1) {
    checks.expect(ct[0].at("replaced").get<std::size_t>() == half, "manifest replaced");
    checks.expect(ct[0].at("input").get<std::size_t>() == mono.size(), "manifest cycle input");
  }

  const auto fr = audit.stage("filter");
  checks.expect(fr.size() == 1, "one filter record");
  checks.expect(report.reconciles(), "filter report reconciles");
  if (fr.size() == 1) {
    std::size_t removed = 0;
    for (const auto& [_, n] : fr[0].at("removed_by_rule").items()) removed += n.get<std::size_t>();
    checks.expect(fr[0].at("input_count").get<std::size_t>() == noisy.size(), "manifest filter input");
    checks.expect(fr[0].at("output_count").get<std::size_t>() == kept.size(), "manifest filter output");
    checks.expect(kept.size() + removed == noisy.size(), "manifest filter arithmetic");
  }
  checks.expect(kept.size() <= clean, "injected noise removed");

  return checks.done("self-training " + std::to_string(synthetic.size()) + " pairs in " + std::to_string(groups.size()) +
                     " groups; cycle replaced " + std::to_string(cycle.replaced.size()) + " of " +
                     std::to_string(mono.size()) + "; filter " + std::to_string(noisy.size()) + " -> " +
                     std::to_string(kept.size()) + " reconciles; audited from " + std::to_string(audit.records().size()) +
                     " manifest records");
}

// ---------------------------------------------------------------- 5

Outcome freeze_correctness() {
  Checks checks;
  const auto split = train::FinetuneSpec{"E", "L1", 1, 4, 400}.stage_updates();
  checks.expect(split == std::pair{80, 320}, "update split");

  const auto family = corpus::generate_language_family(3, 120);
  corpus::GenerationOptions opt;
  opt.max_clauses = 1;
  opt.concept_limit = 40;
  const auto train_set = corpus::generate_parallel(family[0], family[1], 200, 1, opt);
  const auto dev = corpus::generate_parallel(family[0], family[1], 20, 2, opt);
  std::vector<Sentence> text;
  for (const auto& p : train_set) {
    text.push_back(p.src);
    text.push_back(p.tgt);
  }
  const auto vocab = subword::train_bpe(text, 150, {subword::language_token("E"), subword::language_token("L1")});
  model::Transformer<float> pt(model::ModelConfig::tiny(static_cast<int>(vocab.size())), 2);
  const auto pt_ckpt = model::to_checkpoint(pt, 0);

  train::TrainConfig cfg;
  cfg.tokens_per_batch = 256;
  cfg.warmup_steps = 40;
  cfg.checkpoint_every = 100000;
  const auto result = train::finetune({"E", "L1", 1, 4, 400}, pt_ckpt, vocab, vocab, train_set, dev, cfg);
  checks.expect(result.checkpoints.size() == 2, "two checkpoints");
  std::size_t identical = 0;
  std::size_t others = 0;
  if (result.checkpoints.size() == 2) {
    const auto& stage1 = result.checkpoints[0];
    checks.expect(stage1.step == 80, "stage 1 ends at " + std::to_string(stage1.step));
    checks.expect(result.checkpoints[1].step == 400, "stage 2 ends at " + std::to_string(result.checkpoints[1].step));
    for (const auto& t : stage1.tensors) {
      const auto& before = pt_ckpt.tensor(t.name);
      const bool same = t.value.size() == before.size() &&
                        std::memcmp(t.value.data(), before.data(), sizeof(float) * static_cast<std::size_t>(before.size())) == 0;
      if (t.name == "embed") {
        checks.expect(!same, "embedding unchanged in stage 1");
      } else {
        ++others;
        identical += same;
        checks.expect(same, t.name + " changed in stage 1");
      }
    }
  }
  return checks.done("split " + std::to_string(split.first) + " + " + std::to_string(split.second) + "; " +
                     std::to_string(identical) + "/" + std::to_string(others) +
                     " non-embedding tensors bit-identical after stage 1");
}

// ---------------------------------------------------------------- 6

Outcome sampling_law() {
  Checks checks;
  const filter::SamplerConfig cfg{5.0, {{"big", 100}, {"small", 10}}};
  const auto probs = filter::sampling_probabilities(cfg);
  const auto counts = filter::temperature_sample(cfg, 100000, 2024);
  const double big = static_cast<double>(counts.at("big")) / 1e5;
  const double small = static_cast<double>(counts.at("small")) / 1e5;
  checks.expect(std::abs(big - 0.613) <= kSamplerTolerance, "big frequency");
  checks.expect(std::abs(small - 0.387) <= kSamplerTolerance, "small frequency");
  checks.expect(counts.at("big") + counts.at("small") == 100000, "draw count");
  return checks.done("probabilities (" + fmt(probs.at("big"), 4) + ", " + fmt(probs.at("small"), 4) +
                     "), empirical (" + fmt(big, 4) + ", " + fmt(small, 4) + ") over 100000 draws");
}

// ---------------------------------------------------------------- 7

Outcome greedy_ensemble() {
  Checks checks;
  const auto family = corpus::generate_language_family(5, 80);
  corpus::GenerationOptions o;
  o.concept_limit = 24;
  o.max_clauses = 1;
  o.max_adjectives = 1;
  o.literal_rate = 0;
  const auto train_set = corpus::generate_parallel(family[0], family[3], 400, 1, o);
  const auto dev = corpus::generate_parallel(family[0], family[3], 30, 2, o);
  std::vector<Sentence> text;
  for (const auto& p : train_set) {
    text.push_back(p.src);
    text.push_back(p.tgt);
  }
  const auto vocab = std::make_shared<const subword::SubwordVocab>(subword::train_bpe(text, 80, {"<E>", "<L3>"}));
  std::vector<adapt::Candidate> candidates;
  for (int i = 0; i < 3; ++i) {
    auto c = micro(static_cast<int>(vocab->size()));
    c.hidden = 32;
    c.ffn = 64;
    auto m = std::make_shared<model::Transformer<float>>(c, 10 + i);
    train::TrainConfig tc;
    tc.total_steps = 200 + 100 * i;
    tc.warmup_steps = 10;
    tc.peak_lr = 3e-3;
    tc.tokens_per_batch = 300;
    tc.seed = 20 + i;
    train::train_pairs(*m, train_set, {}, *vocab, tc);
    candidates.push_back({"ckpt" + std::to_string(i), m});
  }
  decode::DecodeOptions beam;
  beam.beam.beam_size = 2;
  const auto sel = adapt::greedy_select(candidates, dev, vocab, 3, beam);

  std::map<std::vector<std::string>, double> table;
  for (int mask = 1; mask < 8; ++mask) {
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) {
      if (mask & (1 << i)) ids.push_back(candidates[static_cast<std::size_t>(i)].id);
    }
    const auto tr = adapt::ensemble_translator(adapt::resolve({ids, adapt::Combine::probability}, candidates), vocab,
                                               "E", "L3", beam);
    table[ids] = decode::evaluate_bleu(tr, dev).score;
  }
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  // Brute-force replay of the greedy rule over the subset table.
  std::vector<std::string> ref;
  double ref_bleu = -1;
  for (const auto& c : candidates) {
    if (table[{c.id}] > ref_bleu) {
      ref_bleu = table[{c.id}];
      ref = {c.id};
    }
  }
  const double best_single = ref_bleu;
  while (ref.size() < 3) {
    double round = -1;
    std::vector<std::string> pick;
    for (const auto& c : candidates) {
      if (std::find(ref.begin(), ref.end(), c.id) != ref.end()) continue;
      auto ids = ref;
      ids.push_back(c.id);
      if (table[sorted(ids)] > round) {
        round = table[sorted(ids)];
        pick = ids;
      }
    }
    if (!(round > ref_bleu)) break;
    ref_bleu = round;
    ref = pick;
  }

  std::string trace;
  double last = -1;
  std::size_t accepted = 0;
  for (const auto& step : sel.log) {
    checks.expect(std::abs(step.dev_bleu - table[sorted(step.members)]) < 1e-9, "log entry matches subset scan");
    if (!step.accepted) continue;
    ++accepted;
    checks.expect(step.dev_bleu > last, "accepted steps strictly increase");
    last = step.dev_bleu;
    trace += (trace.empty() ? "" : " -> ") + fmt(step.dev_bleu);
  }
  checks.expect(sel.spec.members == ref, "selection matches brute force");
  checks.expect(std::abs(sel.dev_bleu - ref_bleu) < 1e-9, "selected BLEU matches brute force");
  checks.expect(sel.dev_bleu >= best_single, "final >= best singleton");
  double best_subset = 0;
  for (const auto& [_, b] : table) best_subset = std::max(best_subset, b);
  return checks.done("accepted " + json(sel.spec.members).dump() + " with dev BLEU " + trace + "; best singleton " +
                     fmt(best_single) + ", best of all 7 subsets " + fmt(best_subset));
}

// ---------------------------------------------------------------- 8

std::string random_number(Rng& rng) {
  static const char* kSeps[] = {".", ",", "-", "/"};
  std::string s = std::to_string(rng.index(3000));
  if (rng.bernoulli(0.5)) s += std::string(kSeps[rng.index(4)]) + std::to_string(rng.index(100));
  return s;
}

Sentence random_sentence(Rng& rng, const std::vector<std::string>& numbers) {
  static const std::vector<std::string> kWords = {"the", "at", "was", "\"", ".", ",", "in", "and", "?", "!", ":"};
  Sentence s;
  const auto n = 1 + rng.index(14);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(0.3)) {
      s.push_back(rng.bernoulli(0.6) && !numbers.empty() ? numbers[rng.index(numbers.size())] : random_number(rng));
    } else {
      s.push_back(kWords[rng.index(kWords.size())]);
    }
  }
  return s;
}

Sentence mangle(Rng& rng, const std::string& number) {
  std::string out = number;
  switch (rng.index(3)) {
    case 0:
      for (char& c : out) {
        if (c == '.') c = ',';
        else if (c == ',') c = '.';
        else if (c == '-') c = '/';
      }
      return {out};
    case 1: {
      const auto sep = out.find_first_of(".,-/");
      if (sep == std::string::npos) return {out};
      return {out.substr(0, sep), "at", out.substr(sep + 1)};
    }
    default:
      return {out};
  }
}

Outcome post_processing() {
  Checks checks;
  const auto date = post::repair_numbers({"output", "was", "2006-07"}, {"output", "was", "2006", "at", "07"});
  checks.expect(date.tokens == Sentence{"output", "was", "2006-07"}, "date range");
  const auto bare = post::repair_numbers({"2006-07"}, {"2006", "at", "07"});
  checks.expect(bare.tokens == Sentence{"2006-07"}, "bare date range");

  auto registry = post::ProfileRegistry::defaults();
  const auto family = corpus::generate_language_family(3, 40);
  registry.add_toy_languages(family);
  std::vector<std::string> langs = {"de", "zh", "ja", "en"};
  for (const auto& l : family) langs.push_back(l.id());

  Rng rng(2718);
  std::size_t repaired = 0;
  std::size_t converted = 0;
  std::size_t repair_stable = 0;
  std::size_t punct_stable = 0;
  const std::size_t n = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> numbers;
    for (std::size_t k = rng.index(4); k > 0; --k) numbers.push_back(random_number(rng));
    const auto src = random_sentence(rng, numbers);
    Sentence hyp;
    for (const auto& tok : random_sentence(rng, {})) {
      if (has_digit(tok) && !numbers.empty()) {
        for (auto& t : mangle(rng, numbers[rng.index(numbers.size())])) hyp.push_back(t);
      } else {
        hyp.push_back(tok);
      }
    }
    const auto once = post::repair_numbers(src, hyp);
    repaired += !once.changes.empty();
    repair_stable += post::repair_numbers(src, once.tokens).tokens == once.tokens;

    const auto& lang = langs[i % langs.size()];
    const auto p1 = post::convert_punctuation(once.tokens, lang, registry);
    converted += p1 != once.tokens;
    punct_stable += post::convert_punctuation(p1, lang, registry) == p1;
  }
  checks.expect(repair_stable == n, "repair idempotence");
  checks.expect(punct_stable == n, "punctuation idempotence");
  checks.expect(repaired > 0 && converted > 0, "fuzz corpus exercises both");
  return checks.done("date range repaired to \"2006-07\"; idempotent on " + std::to_string(repair_stable) + "/" +
                     std::to_string(n) + " (repair) and " + std::to_string(punct_stable) + "/" + std::to_string(n) +
                     " (punctuation); " + std::to_string(repaired) + " repaired, " + std::to_string(converted) +
                     " converted");
}

// ---------------------------------------------------------------- 9

fs::path work_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vega_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

Outcome transfer_experiment() {
  const auto start = Clock::now();
  const pipeline::TransferConfig config;
  const auto report = pipeline::run_transfer_experiment(config, work_dir("transfer").string(), log);
  const double elapsed = seconds_since(start);
  Checks checks;
  std::string rows;
  for (const auto& r : report.rows) {
    rows += (rows.empty() ? "" : "; ") + r.direction + " " + fmt(r.baseline_dev_bleu, 1) + " -> " + fmt(r.transfer_dev_bleu, 1);
  }
  checks.expect(report.rows.size() == 5, "five directions");
  checks.expect(report.wins() >= kMinTransferWins, "wins " + std::to_string(report.wins()));
  checks.expect(elapsed <= kTransferSeconds, "runtime");
  return checks.done(std::to_string(report.wins()) + "/" + std::to_string(report.rows.size()) + " " +
                     train::to_string(config.direction_set) + " directions beat the baseline on dev BLEU (" +
                     rows + ") in " + fmt(elapsed / 60, 1) + " min");
}

// ---------------------------------------------------------------- 10

Outcome ablation_ladder() {
  const pipeline::LadderConfig config;
  const auto first = pipeline::ablate(config, work_dir("ladder_a").string(), log);
  const auto second = pipeline::ablate(config, work_dir("ladder_b").string());
  Checks checks;
  checks.expect(first.rows.size() == pipeline::ladder_steps().size(), "all steps ran");
  checks.expect(first.to_json() == second.to_json(), "second run differs");
  std::string rows;
  for (const auto& r : first.rows) {
    rows += (rows.empty() ? "" : "; ") + r.step + " " + fmt(r.test_bleu, 1) + "/" + std::to_string(r.number_mismatches);
  }
  if (first.rows.size() >= 2) {
    const auto& base = first.rows.front();
    const auto& last = first.rows.back();
    const auto& before_post = first.rows[first.rows.size() - 2];
    checks.expect(last.test_bleu >= base.test_bleu, "final test BLEU below baseline");
    checks.expect(last.number_mismatches < before_post.number_mismatches, "post-processing mismatches");
  }
  return checks.done(first.direction + " test BLEU/number mismatches: " + rows + "; identical on rerun");
}

struct Criterion {
  int number;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "gradient-oracle", gradient_oracle},       {2, "decoding-oracle", decoding_oracle},
      {3, "bleu-oracle", bleu_oracle},               {4, "pipeline-accounting", pipeline_accounting},
      {5, "freeze-correctness", freeze_correctness}, {6, "sampling-law", sampling_law},
      {7, "greedy-ensemble", greedy_ensemble},       {8, "post-processing", post_processing},
      {9, "transfer-experiment", transfer_experiment}, {10, "ablation-ladder", ablation_ladder},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    try {
      only.insert(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: " << argv[0] << " [criterion numbers...]\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.number)) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " " << c.number << " " << c.name << " (" << fmt(seconds_since(start), 1)
              << " s): " << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
