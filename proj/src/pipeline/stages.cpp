#include "vega/pipeline/stages.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "vega/adapt/ensemble.hpp"
#include "vega/adapt/genft.hpp"
#include "vega/augment/cycle.hpp"
#include "vega/augment/ngram.hpp"
#include "vega/augment/self_training.hpp"
#include "vega/core/error.hpp"
#include "vega/filter/filter.hpp"
#include "vega/model/serialize.hpp"
#include "vega/pipeline/ladder.hpp"
#include "vega/post/numbers.hpp"
#include "vega/post/punctuation.hpp"

namespace vega::pipeline {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string req(const json& p, const std::string& kind, const std::string& key) {
  if (!p.contains(key)) throw InvalidArgument(kind + ": missing parameter '" + key + "'");
  return p.at(key).get<std::string>();
}

std::vector<std::string> str_list(const json& p, const std::string& key) {
  if (!p.contains(key)) return {};
  if (p.at(key).is_string()) return {p.at(key).get<std::string>()};
  return p.at(key).get<std::vector<std::string>>();
}

bool artifact_exists(const std::string& path) { return fs::exists(path) || fs::exists(path + ".src"); }

void need(const std::string& path) {
  if (!artifact_exists(path)) throw NotFound("missing artifact '" + path + "'");
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_json(const std::string& path, const json& j) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw NotFound("cannot write " + path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  need(path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

std::vector<corpus::SentencePair> read_pairs(const std::string& prefix) {
  need(prefix);
  return corpus::read_parallel(prefix);
}

std::vector<Sentence> read_sentences(const std::string& path) {
  need(path);
  return corpus::read_monolingual(path);
}

std::shared_ptr<const subword::SubwordVocab> read_vocab(const std::string& path) {
  need(path);
  return std::make_shared<const subword::SubwordVocab>(subword::SubwordVocab::load(path));
}

numerics::Checkpoint read_checkpoint(const std::string& path) {
  need(path);
  return numerics::load_checkpoint(path);
}

std::shared_ptr<const model::Transformer<float>> read_model(const std::string& path) {
  return std::make_shared<const model::Transformer<float>>(model::from_checkpoint(read_checkpoint(path)));
}

std::uint64_t seed_of(const json& p) { return p.value("seed", std::uint64_t{1}); }

train::TrainConfig train_from(const json& p) {
  auto base = desk_train_config();
  base.seed = seed_of(p);
  auto t = overlay(base, p.value("optim", json::object()));
  t.validate();
  return t;
}

model::ModelConfig model_from(const json& p, std::size_t vocab) {
  const int v = static_cast<int>(vocab);
  const auto mode = model::mode_from_string(p.value("mode", std::string("AT")));
  model::ModelConfig c = model::ModelConfig::tiny(v, mode);
  if (p.contains("model")) {
    const auto& m = p.at("model");
    if (m.is_string()) {
      const auto name = m.get<std::string>();
      if (name == "tiny") c = model::ModelConfig::tiny(v, mode);
      else if (name == "small") c = model::ModelConfig::small(v, mode);
      else if (name == "base") c = model::ModelConfig::base(v, mode);
      else if (name == "big") c = model::ModelConfig::big(v, mode);
      else if (name == "xl") c = model::ModelConfig::xl(v, mode);
      else throw InvalidArgument("unknown model preset '" + name + "'");
    } else {
      c = overlay(c, m);
    }
  }
  c.vocab = v;
  c.validate();
  return c;
}

decode::DecodeOptions decode_from(const json& p) {
  decode::DecodeOptions d;
  d.beam.beam_size = p.value("beam", d.beam.beam_size);
  d.greedy = p.value("greedy", d.greedy);
  d.nat_lengths = p.value("nat_lengths", d.nat_lengths);
  if (d.beam.beam_size < 1) throw InvalidArgument("beam must be at least 1");
  return d;
}

std::vector<corpus::ToyLanguage> family_of(const WorldConfig& wc) {
  const auto full = corpus::generate_language_family(wc.seed, wc.concept_vocab);
  std::vector<corpus::ToyLanguage> out{full.front()};
  for (const auto& lang : full) {
    if (std::find(wc.languages.begin(), wc.languages.end(), lang.id()) != wc.languages.end()) out.push_back(lang);
  }
  return out;
}

std::string checkpoint_in(const std::string& dir) { return (fs::path(dir) / "model.bin").string(); }

void save_final(const std::string& dir, const train::TrainResult& result) {
  if (result.checkpoints.empty()) throw InvalidState("training produced no checkpoint");
  numerics::save_checkpoint(checkpoint_in(dir), result.checkpoints.back());
}

// Reads a corpus and flips pairs stored in the reverse of the requested direction.
std::vector<corpus::SentencePair> read_oriented(const json& p, const std::string& prefix) {
  auto pairs = read_pairs(prefix);
  if (!p.contains("src") || !p.contains("tgt")) return pairs;
  const std::string src = p.at("src");
  const std::string tgt = p.at("tgt");
  for (auto& x : pairs) {
    if (x.src_lang == tgt && x.tgt_lang == src) x = corpus::flipped(x);
  }
  return pairs;
}

std::pair<std::string, std::string> direction_of(const json& p, const std::vector<corpus::SentencePair>& pairs,
                                                 const std::string& kind) {
  if (pairs.empty()) throw InvalidArgument(kind + ": empty corpus");
  return {p.value("src", pairs.front().src_lang), p.value("tgt", pairs.front().tgt_lang)};
}

std::vector<Sentence> sources(const std::vector<corpus::SentencePair>& pairs) {
  std::vector<Sentence> out;
  for (const auto& x : pairs) out.push_back(x.src);
  return out;
}

// ---- stages ----

json gen_data(const json& p, const Progress&) {
  const std::string out = req(p, "gen-data", "out");
  json wj = p.value("world", json::object());
  if (!wj.contains("seed")) wj["seed"] = seed_of(p);
  const auto wc = overlay(WorldConfig{}, wj);
  const World w = build_world(wc);
  fs::create_directories(out);
  write_json((fs::path(out) / "world.json").string(), json(wc));
  json metrics{{"languages", wc.languages}};
  for (const auto* split : {"train", "dev", "test"}) {
    const auto& data = std::string(split) == "train" ? w.train : std::string(split) == "dev" ? w.dev : w.test;
    for (const auto& [key, pairs] : data) {
      corpus::write_parallel((fs::path(out) / (std::string(split) + "." + key)).string(), pairs);
      metrics[split][key] = pairs.size();
    }
  }
  const auto mono = p.value("mono_size", std::size_t{0});
  if (mono > 0) {
    for (const auto& lang : w.family) {
      corpus::write_monolingual((fs::path(out) / ("mono." + lang.id() + ".txt")).string(),
                                corpus::generate_monolingual(lang, mono, mix_seed(wc.seed, 900), wc.generation));
    }
  }
  metrics["mono"] = mono;
  return metrics;
}

json filter_stage(const json& p, const Progress&) {
  const auto wc = read_json(req(p, "filter", "world")).get<WorldConfig>();
  std::map<std::string, std::vector<Sentence>> corpora;
  for (const auto& lang : family_of(wc)) {
    corpora[lang.id()] = corpus::generate_monolingual(lang, p.value("langid_sentences", std::size_t{300}),
                                                      mix_seed(wc.seed, 901), wc.generation);
  }
  const auto langid = filter::train_langid(corpora);
  const auto [kept, report] = filter::filter_pairs(read_pairs(req(p, "filter", "input")), langid);
  const std::string output = req(p, "filter", "output");
  ensure_parent(output);
  corpus::write_parallel(output, kept);
  if (p.contains("report")) write_json(p.at("report"), report.to_json());
  return report.to_json();
}

json train_bpe_stage(const json& p, const Progress&) {
  std::vector<Sentence> text;
  std::set<std::string> langs;
  const auto inputs = str_list(p, "inputs");
  if (inputs.empty()) throw InvalidArgument("train-bpe: no inputs");
  for (const auto& in : inputs) {
    if (fs::exists(in + ".src")) {
      for (const auto& pair : read_pairs(in)) {
        text.push_back(pair.src);
        text.push_back(pair.tgt);
        langs.insert(pair.src_lang);
        langs.insert(pair.tgt_lang);
      }
    } else {
      for (auto& s : read_sentences(in)) text.push_back(std::move(s));
    }
  }
  for (const auto& l : str_list(p, "languages")) langs.insert(l);
  std::vector<std::string> tags;
  for (const auto& l : langs) tags.push_back(subword::language_token(l));
  const auto merges = p.value("merges", std::size_t{600});
  const auto vocab = subword::train_bpe(text, merges, tags);
  const std::string out = req(p, "train-bpe", "out");
  ensure_parent(out);
  vocab.save(out);
  return {{"vocab_size", vocab.size()}, {"merges", vocab.merges().size()}, {"languages", tags}};
}

json pretrain_stage(const json& p, const Progress& progress) {
  const std::string data = req(p, "pretrain", "data");
  const auto vocab = read_vocab(req(p, "pretrain", "vocab"));
  const auto wc = read_json((fs::path(data) / "world.json").string()).get<WorldConfig>();
  train::PretrainSpec spec;
  spec.direction_set = train::direction_set_from_string(p.value("direction_set", std::string("M2O")));
  spec.temperature = p.value("temperature", spec.temperature);
  spec.updates = p.value("updates", spec.updates);
  const auto languages = p.contains("languages") ? str_list(p, "languages") : wc.languages;
  train::ParallelData train_data;
  train::ParallelData dev_data;
  const bool o2m = spec.direction_set == train::DirectionSet::O2M;
  for (const auto& lang : languages) {
    const auto key = train::direction_key(kPivot, lang);
    auto tr = read_pairs((fs::path(data) / ("train." + key)).string());
    auto dv = read_pairs((fs::path(data) / ("dev." + key)).string());
    if (!o2m) {
      for (auto& x : tr) x = corpus::flipped(x);
      for (auto& x : dv) x = corpus::flipped(x);
    }
    const auto k = o2m ? key : train::direction_key(lang, kPivot);
    train_data[k] = std::move(tr);
    dev_data[k] = std::move(dv);
  }
  const auto tc = train_from(p);
  model::Transformer<float> m(model_from(p, vocab->size()), mix_seed(tc.seed, 1));
  if (progress) progress("pretraining " + train::to_string(spec.direction_set) + " for " + std::to_string(spec.updates));
  const std::string out = req(p, "pretrain", "out");
  const auto result = train::pretrain(m, spec, train_data, dev_data, *vocab, tc, out);
  save_final(out, result);
  return {{"updates", spec.updates},
          {"direction_set", train::to_string(spec.direction_set)},
          {"checkpoints", result.checkpoints.size()},
          {"dev_loss", result.checkpoints.back().meta.value("dev_loss", json::object())}};
}

json finetune_stage(const json& p, const Progress& progress) {
  const auto pt_vocab = read_vocab(req(p, "finetune", "vocab"));
  const auto ft_vocab = p.contains("ft_vocab") ? read_vocab(p.at("ft_vocab")) : pt_vocab;
  const auto train_pairs = read_oriented(p, req(p, "finetune", "train"));
  const auto dev_pairs = read_oriented(p, req(p, "finetune", "dev"));
  const auto [src, tgt] = direction_of(p, train_pairs, "finetune");
  train::FinetuneSpec spec{src, tgt, p.value("embedding_ratio", 1), p.value("full_ratio", 4), p.value("updates", 400)};
  const auto stages = spec.stage_updates();
  if (progress) progress("finetuning " + train::direction_key(src, tgt));
  const std::string out = req(p, "finetune", "out");
  const auto result = train::finetune(spec, read_checkpoint(req(p, "finetune", "checkpoint")), *pt_vocab, *ft_vocab,
                                      train_pairs, dev_pairs, train_from(p), out);
  save_final(out, result);
  return {{"direction", train::direction_key(src, tgt)},
          {"stage_updates", {stages.first, stages.second}},
          {"checkpoints", result.checkpoints.size()},
          {"dev_loss", result.checkpoints.back().meta.value("dev_loss", json::object())}};
}

json augment_stage(const json& p, const Progress& progress) {
  const auto vocab = read_vocab(req(p, "augment", "vocab"));
  const std::string out = req(p, "augment", "out");
  const std::string manifest_path = p.value("manifest", out + ".manifest.jsonl");
  corpus::PipelineManifest manifest;
  const auto method = p.value("method", std::string("self-training"));
  json metrics{{"method", method}};
  if (method == "cycle") {
    const auto mono = read_sentences(req(p, "augment", "mono"));
    const std::string lang = req(p, "augment", "lang");
    const std::string via = req(p, "augment", "via");
    std::vector<Sentence> lm_text;
    for (const auto& f : str_list(p, "lm_corpus")) {
      for (auto& s : read_sentences(f)) lm_text.push_back(std::move(s));
    }
    if (lm_text.empty()) throw InvalidArgument("augment: cycle translation needs an lm_corpus");
    const auto lm = augment::train_ngram_lm(lm_text, p.value("lm_order", 3));
    const auto options = decode_from(p);
    const auto t2s = decode::model_translator("t2s", read_model(req(p, "augment", "t2s")), vocab, lang, via, options);
    const auto s2t = decode::model_translator("s2t", read_model(req(p, "augment", "s2t")), vocab, via, lang, options);
    const auto result = augment::cycle_translate(mono, lang, t2s, s2t, lm, &manifest);
    ensure_parent(out);
    corpus::write_monolingual(out, result.sentences);
    metrics["sentences"] = result.sentences.size();
    metrics["replaced"] = result.replaced.size();
  } else if (method == "self-training") {
    const auto para = read_oriented(p, req(p, "augment", "para"));
    const auto dev = read_oriented(p, req(p, "augment", "dev"));
    const auto [src, tgt] = direction_of(p, para, "augment");
    augment::SelfTrainingConfig st;
    st.rounds = p.value("rounds", st.rounds);
    st.at_per_side = p.value("at_per_side", st.at_per_side);
    st.nat_per_side = p.value("nat_per_side", st.nat_per_side);
    st.at_model = model_from(p, vocab->size());
    st.nat_model = st.at_model;
    st.nat_model.mode = model::Mode::NAT;
    st.train = train_from(p);
    st.train.total_steps = p.value("teacher_updates", 300);
    st.train.warmup_steps = std::min(st.train.warmup_steps, st.train.total_steps);
    st.decode = decode_from(p);
    st.seed = seed_of(p);
    if (p.contains("forward_init")) st.forward_init = read_checkpoint(p.at("forward_init"));
    if (p.contains("backward_init")) st.backward_init = read_checkpoint(p.at("backward_init"));
    const auto mono_src = p.contains("mono_src") ? read_sentences(p.at("mono_src")) : std::vector<Sentence>{};
    const auto mono_tgt = p.contains("mono_tgt") ? read_sentences(p.at("mono_tgt")) : std::vector<Sentence>{};
    if (progress) progress("self-training " + train::direction_key(src, tgt));
    const auto result =
        augment::run_bidirectional_self_training(st, src, tgt, para, mono_src, mono_tgt, dev, vocab, &manifest);
    ensure_parent(out);
    corpus::write_parallel(out, result.corpus);
    metrics["corpus"] = result.corpus.size();
    auto& rounds = metrics["rounds"] = json::array();
    for (const auto& r : result.rounds) {
      rounds.push_back({{"round", r.round},
                        {"training_pairs", r.training_pairs},
                        {"synthetic", r.synthetic},
                        {"teacher_dev_bleu", r.teacher_dev_bleu}});
    }
  } else {
    throw InvalidArgument("augment: unknown method '" + method + "'");
  }
  manifest.write(manifest_path);
  return metrics;
}

numerics::Checkpoint averaged_from_run(const std::string& dir, std::size_t k) {
  if (!fs::is_directory(dir)) throw NotFound("missing run directory '" + dir + "'");
  std::vector<std::pair<std::int64_t, std::string>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("checkpoint_", 0) == 0 && entry.path().extension() == ".bin") {
      found.emplace_back(std::stoll(name.substr(11)), entry.path().string());
    }
  }
  if (found.empty()) throw NotFound("no checkpoints in '" + dir + "'");
  std::sort(found.begin(), found.end());
  const auto n = std::min(k, found.size());
  std::vector<numerics::Checkpoint> ckpts;
  for (std::size_t i = found.size() - n; i < found.size(); ++i) ckpts.push_back(numerics::load_checkpoint(found[i].second));
  return numerics::average_checkpoints(ckpts);
}

json decode_stage(const json& p, const Progress&) {
  const auto vocab = read_vocab(req(p, "decode", "vocab"));
  const auto avg = p.value("avg_last", std::size_t{1});
  numerics::Checkpoint ckpt;
  if (p.contains("run")) {
    ckpt = averaged_from_run(p.at("run"), avg);
  } else {
    ckpt = read_checkpoint(req(p, "decode", "checkpoint"));
  }
  auto m = std::make_shared<const model::Transformer<float>>(model::from_checkpoint(ckpt));
  const bool nat = p.value("nat", false);
  if (nat != (m->config().mode == model::Mode::NAT)) {
    throw InvalidArgument(std::string("decode: checkpoint is ") + model::to_string(m->config().mode) +
                          (nat ? " but --nat was given" : "; pass --nat for NAT models"));
  }
  const auto input = read_sentences(req(p, "decode", "input"));
  const auto t = decode::model_translator("decode", m, vocab, req(p, "decode", "src"), req(p, "decode", "tgt"),
                                          decode_from(p));
  const auto hyps = t.translate(input);
  const std::string out = req(p, "decode", "out");
  ensure_parent(out);
  corpus::write_monolingual(out, hyps);
  json metrics{{"sentences", hyps.size()}, {"averaged", p.contains("run") ? ckpt.meta.value("averaged", 1) : 1}};
  if (p.contains("references")) metrics["bleu"] = decode::corpus_bleu(hyps, read_sentences(p.at("references"))).score;
  return metrics;
}

json ensemble_select_stage(const json& p, const Progress&) {
  const auto vocab = read_vocab(req(p, "ensemble-select", "vocab"));
  std::vector<adapt::Candidate> candidates;
  for (const auto& path : str_list(p, "candidates")) candidates.push_back({path, read_model(path)});
  const auto dev = read_oriented(p, req(p, "ensemble-select", "dev"));
  const auto combine = adapt::combine_from_string(p.value("combine", std::string("probability")));
  const auto sel = adapt::greedy_select(candidates, dev, vocab, p.value("max_size", std::size_t{3}), decode_from(p),
                                        combine);
  write_json(req(p, "ensemble-select", "out"), json(sel.spec));
  auto log = json::array();
  for (const auto& s : sel.log) log.push_back({{"members", s.members}, {"dev_bleu", s.dev_bleu}, {"accepted", s.accepted}});
  return {{"members", sel.spec.members},
          {"dev_bleu", sel.dev_bleu},
          {"best_single_bleu", sel.best_single_bleu},
          {"log", log}};
}

json genft_stage(const json& p, const Progress& progress) {
  const auto vocab = read_vocab(req(p, "genft", "vocab"));
  const auto spec = read_json(req(p, "genft", "ensemble")).get<adapt::EnsembleSpec>();
  std::vector<adapt::ModelPtr> members;
  for (const auto& id : spec.members) members.push_back(read_model(id));
  const auto base = read_oriented(p, req(p, "genft", "base"));
  const auto dev = read_oriented(p, req(p, "genft", "dev"));
  const auto [src, tgt] = direction_of(p, base, "genft");
  std::vector<adapt::DomainSeed> seeds;
  for (const auto& f : str_list(p, "seeds")) seeds.push_back({fs::path(f).stem().string(), read_sentences(f)});
  adapt::GenFtConfig gc;
  gc.max_iters = p.value("max_iters", gc.max_iters);
  gc.convergence_delta = p.value("convergence_delta", gc.convergence_delta);
  gc.base_ratio = p.value("base_ratio", gc.base_ratio);
  gc.train = train_from(p);
  gc.train.total_steps = p.value("updates", 200);
  gc.train.warmup_steps = std::min(gc.train.warmup_steps, gc.train.total_steps);
  gc.decode = decode_from(p);
  gc.seed = seed_of(p);
  const auto ensemble = adapt::ensemble_translator(members, vocab, src, tgt, gc.decode, spec.combine);
  corpus::PipelineManifest manifest;
  if (progress) progress("generalization finetuning on " + std::to_string(seeds.size()) + " domain(s)");
  const auto result = adapt::generalization_finetune(read_checkpoint(req(p, "genft", "checkpoint")), seeds, ensemble,
                                                     base, dev, vocab, gc, &manifest);
  const std::string out = req(p, "genft", "out");
  ensure_parent(out);
  numerics::save_checkpoint(out, result.model);
  if (p.contains("manifest")) manifest.write(p.at("manifest"));
  auto its = json::array();
  for (const auto& it : result.iterations) {
    its.push_back({{"iteration", it.iteration},
                   {"pseudo_pairs", it.pseudo_pairs},
                   {"base_pairs", it.base_pairs},
                   {"dev_bleu", it.dev_bleu}});
  }
  return {{"initial_dev_bleu", result.initial_dev_bleu}, {"converged", result.converged}, {"iterations", its}};
}

json postprocess_stage(const json& p, const Progress&) {
  const auto src = read_sentences(req(p, "postprocess", "source"));
  auto hyps = read_sentences(req(p, "postprocess", "hypotheses"));
  if (src.size() != hyps.size()) throw InvalidArgument("postprocess: source and hypotheses differ in length");
  auto registry = post::ProfileRegistry::defaults();
  if (p.contains("world")) registry.add_toy_languages(family_of(read_json(p.at("world")).get<WorldConfig>()));
  const std::string lang = req(p, "postprocess", "lang");
  const bool numbers = p.value("numbers", true);
  const bool punctuation = p.value("punctuation", true);
  const auto& profile = registry.get(lang);
  std::size_t before = 0;
  std::size_t after = 0;
  auto log = json::array();
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    before += post::count_number_mismatches(src[i], hyps[i]);
    if (numbers) {
      auto r = post::repair_numbers(src[i], hyps[i]);
      for (const auto& c : r.changes) {
        log.push_back({{"sentence", i}, {"position", c.position}, {"before", c.before}, {"after", c.after}});
      }
      hyps[i] = std::move(r.tokens);
    }
    if (punctuation) hyps[i] = post::convert_punctuation(hyps[i], profile);
    after += post::count_number_mismatches(src[i], hyps[i]);
  }
  const std::string out = req(p, "postprocess", "out");
  ensure_parent(out);
  corpus::write_monolingual(out, hyps);
  if (p.contains("log")) write_json(p.at("log"), log);
  return {{"sentences", hyps.size()},
          {"changes", log.size()},
          {"number_mismatches_before", before},
          {"number_mismatches_after", after},
          {"profile", profile.name}};
}

json score_stage(const json& p, const Progress&) {
  const auto report = decode::corpus_bleu(read_sentences(req(p, "score", "hypotheses")),
                                          read_sentences(req(p, "score", "references")))
                          .to_json();
  if (p.contains("out")) write_json(p.at("out"), report);
  return report;
}

json ablate_stage(const json& p, const Progress& progress) {
  json cj = p.value("config", json::object());
  if (!cj.contains("train") || !cj.at("train").contains("seed")) cj["train"]["seed"] = seed_of(p);
  const auto config = cj.get<LadderConfig>();
  const auto ladder = ablate(config, p.value("work", std::string()), progress).to_json();
  if (p.contains("out")) write_json(p.at("out"), ladder);
  return ladder;
}

json transfer_stage(const json& p, const Progress& progress) {
  json cj = p.value("config", json::object());
  if (!cj.contains("train") || !cj.at("train").contains("seed")) cj["train"]["seed"] = seed_of(p);
  const auto config = cj.get<TransferConfig>();
  const auto report = run_transfer_experiment(config, p.value("work", std::string()), progress).to_json();
  if (p.contains("out")) write_json(p.at("out"), report);
  return report;
}

struct KindInfo {
  std::vector<std::string> required;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::function<json(const json&, const Progress&)> run;
};

const std::map<std::string, KindInfo>& kinds() {
  static const std::map<std::string, KindInfo> k = {
      {"gen-data", {{"out"}, {}, {"out"}, gen_data}},
      {"filter", {{"input", "output", "world"}, {"input", "world"}, {"output", "report"}, filter_stage}},
      {"train-bpe", {{"inputs", "out"}, {"inputs"}, {"out"}, train_bpe_stage}},
      {"pretrain", {{"data", "vocab", "out"}, {"data", "vocab"}, {"out"}, pretrain_stage}},
      {"finetune",
       {{"checkpoint", "vocab", "train", "dev", "out"},
        {"checkpoint", "vocab", "ft_vocab", "train", "dev"},
        {"out"},
        finetune_stage}},
      {"augment",
       {{"vocab", "out"},
        {"vocab", "para", "dev", "mono_src", "mono_tgt", "forward_init", "backward_init", "mono", "t2s", "s2t",
         "lm_corpus"},
        {"out", "manifest"},
        augment_stage}},
      {"decode",
       {{"vocab", "input", "src", "tgt", "out"}, {"vocab", "checkpoint", "run", "input", "references"}, {"out"},
        decode_stage}},
      {"ensemble-select",
       {{"candidates", "vocab", "dev", "out"}, {"candidates", "vocab", "dev"}, {"out"}, ensemble_select_stage}},
      {"genft",
       {{"checkpoint", "ensemble", "vocab", "seeds", "base", "dev", "out"},
        {"checkpoint", "ensemble", "vocab", "seeds", "base", "dev"},
        {"out", "manifest"},
        genft_stage}},
      {"postprocess",
       {{"source", "hypotheses", "lang", "out"}, {"source", "hypotheses", "world"}, {"out", "log"}, postprocess_stage}},
      {"score", {{"hypotheses", "references"}, {"hypotheses", "references"}, {"out"}, score_stage}},
      {"ablate", {{}, {}, {"out", "work"}, ablate_stage}},
      {"transfer", {{}, {}, {"out", "work"}, transfer_stage}},
  };
  return k;
}

const KindInfo& kind_info(const std::string& kind) {
  const auto it = kinds().find(kind);
  if (it == kinds().end()) throw InvalidArgument("unknown stage kind '" + kind + "'");
  return it->second;
}

struct CwdGuard {
  fs::path saved = fs::current_path();
  explicit CwdGuard(const fs::path& to) { fs::current_path(to); }
  ~CwdGuard() {
    std::error_code ec;
    fs::current_path(saved, ec);
  }
};

bool produced_by(const std::string& input, const std::set<std::string>& outputs) {
  const auto in = fs::path(input).lexically_normal();
  for (const auto& o : outputs) {
    const auto out = fs::path(o).lexically_normal();
    if (in == out) return true;
    const auto rel = in.lexically_relative(out);
    if (!rel.empty() && *rel.begin() != "..") return true;
  }
  return false;
}

}  // namespace

void RunConfig::validate() const {
  std::set<std::string> names;
  for (const auto& s : stages) {
    if (s.name.empty()) throw InvalidArgument("stage without a name");
    if (!names.insert(s.name).second) throw InvalidArgument("duplicate stage name '" + s.name + "'");
    const auto& info = kind_info(s.kind);
    if (!s.params.is_object()) throw InvalidArgument("stage '" + s.name + "': params must be an object");
    for (const auto& key : info.required) {
      if (!s.params.contains(key)) throw InvalidArgument("stage '" + s.name + "': missing parameter '" + key + "'");
    }
  }
}

void to_json(json& j, const StageSpec& s) { j = {{"name", s.name}, {"kind", s.kind}, {"params", s.params}}; }

void from_json(const json& j, StageSpec& s) {
  s.kind = j.at("kind").get<std::string>();
  s.name = j.value("name", s.kind);
  s.params = j.value("params", json::object());
}

void to_json(json& j, const RunConfig& c) {
  j = {{"experiment", c.experiment}, {"seed", c.seed}, {"run_dir", c.run_dir}, {"stages", c.stages}};
}

void from_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw InvalidArgument("run config must be a JSON object");
  c = RunConfig{};
  c.experiment = j.value("experiment", c.experiment);
  c.seed = j.value("seed", c.seed);
  c.run_dir = j.value("run_dir", c.run_dir);
  c.stages = j.value("stages", std::vector<StageSpec>{});
}

const std::vector<std::string>& stage_kinds() {
  static const std::vector<std::string> k = {"gen-data", "filter",          "train-bpe", "pretrain",    "finetune",
                                             "augment",  "decode",          "ensemble-select", "genft", "postprocess",
                                             "score",    "ablate",          "transfer"};
  return k;
}

StageIO stage_io(const StageSpec& stage) {
  const auto& info = kind_info(stage.kind);
  StageIO io;
  for (const auto& key : info.inputs) {
    for (const auto& v : str_list(stage.params, key)) io.inputs.push_back(v);
  }
  for (const auto& key : info.outputs) {
    for (const auto& v : str_list(stage.params, key)) io.outputs.push_back(v);
  }
  if (stage.kind == "decode" && !stage.params.contains("run") && !stage.params.contains("checkpoint")) {
    throw InvalidArgument("stage '" + stage.name + "': decode needs 'checkpoint' or 'run'");
  }
  return io;
}

json run_stage(const std::string& kind, const json& params, const Progress& progress) {
  const auto& info = kind_info(kind);
  for (const auto& key : info.required) {
    if (!params.contains(key)) throw InvalidArgument(kind + ": missing parameter '" + key + "'");
  }
  try {
    return info.run(params, progress);
  } catch (const json::exception& e) {
    throw InvalidArgument(kind + ": " + e.what());
  }
}

json run(const RunConfig& config, const Progress& progress) {
  config.validate();
  std::vector<StageIO> ios;
  for (const auto& s : config.stages) ios.push_back(stage_io(s));

  fs::create_directories(config.run_dir);
  const CwdGuard cwd(config.run_dir);
  std::set<std::string> produced;
  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    for (const auto& in : ios[i].inputs) {
      if (!produced_by(in, produced) && !artifact_exists(in)) {
        throw NotFound("stage '" + config.stages[i].name + "': missing artifact '" + in + "'");
      }
    }
    for (const auto& out : ios[i].outputs) produced.insert(out);
  }

  json config_copy = config;
  config_copy.erase("run_dir");
  write_json("config.json", config_copy);
  json report{{"experiment", config.experiment}, {"seed", config.seed}, {"stages", json::array()}};
  for (std::size_t i = 0; i < config.stages.size(); ++i) {
    const auto& s = config.stages[i];
    json params = s.params;
    if (!params.contains("seed")) params["seed"] = config.seed;
    if (progress) progress("stage " + s.name + " (" + s.kind + ")");
    json metrics;
    try {
      metrics = run_stage(s.kind, params, progress);
    } catch (const NotFound& e) {
      throw NotFound("stage '" + s.name + "': " + e.what());
    } catch (const std::exception& e) {
      throw StageFailed(s.name, e.what());
    }
    report["stages"].push_back(
        {{"name", s.name}, {"kind", s.kind}, {"inputs", ios[i].inputs}, {"outputs", ios[i].outputs}, {"metrics", metrics}});
  }
  write_json("report.json", report);
  return report;
}

}  // namespace vega::pipeline
