#include "vega/train/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "vega/core/error.hpp"
#include "vega/filter/sampler.hpp"
#include "vega/model/serialize.hpp"

namespace vega::train {

namespace {

using DevSets = std::map<std::string, std::vector<Example>>;
using BatchSource = std::function<std::pair<std::string, std::vector<Example>>()>;

bool is_embedding(const std::string& name) { return name == "embed"; }

DevSets encode_dev(const ParallelData& dev, const subword::SubwordVocab& vocab) {
  DevSets out;
  for (const auto& [key, pairs] : dev) out[key] = encode_pairs(pairs, vocab);
  return out;
}

nlohmann::json dev_losses(model::Transformer<float>& model, const DevSets& dev, std::size_t budget) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, examples] : dev) out[key] = evaluate_loss(model, examples, budget);
  return out;
}

std::string checkpoint_path(const std::string& run_dir, std::int64_t step) {
  return (std::filesystem::path(run_dir) / ("checkpoint_" + std::to_string(step) + ".bin")).string();
}

class Loop {
 public:
  Loop(Trainer& trainer, const DevSets& dev, const std::string& run_dir, nlohmann::json meta)
      : trainer_(trainer),
        dev_(dev),
        run_dir_(run_dir),
        meta_(std::move(meta)),
        log_(run_dir.empty() ? std::string() : (std::filesystem::path(run_dir) / "log.jsonl").string()) {
    if (!run_dir.empty()) {
      std::filesystem::create_directories(run_dir);
      std::ofstream(std::filesystem::path(run_dir) / "log.jsonl", std::ios::trunc);
    }
  }

  void log_initial_dev() {
    log_.write({{"step", trainer_.step()}, {"event", "dev"},
                {"dev_loss", dev_losses(trainer_.model(), dev_, trainer_.config().tokens_per_batch)}});
  }

  void run(int updates, const BatchSource& source, const ParamFilter& trainable, int stage, bool close_stage) {
    const int interval = trainer_.config().checkpoint_interval();
    for (int i = 0; i < updates; ++i) {
      auto [direction, batch] = source();
      const auto stats = trainer_.update(batch, trainable);
      ++mix_[direction];
      log_.write({{"step", stats.step}, {"lr", stats.lr}, {"loss", stats.loss},
                  {"nll_per_token", stats.nll_per_token}, {"tokens", stats.tokens},
                  {"direction", direction}, {"stage", stage}});
      const bool last = i + 1 == updates;
      if (stats.step % interval == 0 || (last && close_stage)) checkpoint(stage);
    }
  }

  void checkpoint(int stage) {
    const auto dev = dev_losses(trainer_.model(), dev_, trainer_.config().tokens_per_batch);
    auto meta = meta_;
    meta["dev_loss"] = dev;
    meta["stage"] = stage;
    meta["direction_mix"] = mix_;
    auto ckpt = model::to_checkpoint(trainer_.model(), trainer_.step(), meta);
    if (!run_dir_.empty()) numerics::save_checkpoint(checkpoint_path(run_dir_, ckpt.step), ckpt);
    log_.write({{"step", trainer_.step()}, {"event", "checkpoint"}, {"stage", stage}, {"dev_loss", dev},
                {"direction_mix", mix_}});
    result_.checkpoints.push_back(std::move(ckpt));
  }

  TrainResult finish() {
    result_.log = log_.entries();
    return std::move(result_);
  }

 private:
  Trainer& trainer_;
  const DevSets& dev_;
  std::string run_dir_;
  nlohmann::json meta_;
  RunLog log_;
  std::map<std::string, std::uint64_t> mix_;
  TrainResult result_;
};

TrainConfig with_total(TrainConfig config, int total) {
  config.total_steps = total;
  config.warmup_steps = std::min(config.warmup_steps, total);
  return config;
}

}  // namespace

Trainer::Trainer(model::Transformer<float>& model, const TrainConfig& config)
    : model_(model),
      config_(config),
      optimizer_(config.beta1, config.beta2, config.adam_eps, config.weight_decay),
      dropout_rng_(mix_seed(config.seed, 0xd409)) {
  config_.validate();
  model_.set_dropout(config_.dropout);
}

StepStats Trainer::update(const std::vector<Example>& batch, const ParamFilter& trainable) {
  if (batch.empty()) throw InvalidArgument("Trainer::update: empty batch");
  model_.zero_grad();
  numerics::Tape<float> tape;
  const auto stats = model_.loss(tape, batch, config_.label_smoothing,
                                 config_.dropout > 0 ? &dropout_rng_ : nullptr);
  const double loss = static_cast<double>(tape.value(stats.loss)(0, 0));
  if (!std::isfinite(loss)) throw NumericError("training loss is not finite at step " + std::to_string(step_ + 1));
  tape.backward(stats.loss);
  if (config_.clip_norm > 0) clip_gradients(model_.parameters(), config_.clip_norm, trainable);
  ++step_;
  const double lr = lr_at(config_, step_);
  optimizer_.step(model_.parameters(), lr, trainable);
  return {step_, lr, loss, stats.tokens ? stats.nll / static_cast<double>(stats.tokens) : 0.0, stats.tokens};
}

double evaluate_loss(model::Transformer<float>& model, const std::vector<Example>& examples,
                     std::size_t tokens_per_batch) {
  if (examples.empty()) return 0.0;
  const auto plan = make_batches(examples, std::max(tokens_per_batch, std::size_t{1}), 0);
  double nll = 0;
  std::size_t tokens = 0;
  auto run = [&](const std::vector<Example>& batch) {
    numerics::Tape<float> tape(false);
    const auto stats = model.loss(tape, batch, 0.0, nullptr);
    nll += stats.nll;
    tokens += stats.tokens;
  };
  for (const auto& b : plan.batches) {
    std::vector<Example> batch;
    for (std::size_t i : b.indices) batch.push_back(examples[i]);
    run(batch);
  }
  for (std::size_t i : plan.skipped) run({examples[i]});
  return tokens ? nll / static_cast<double>(tokens) : 0.0;
}

RunLog::RunLog(std::string path) : path_(std::move(path)) {}

void RunLog::write(const nlohmann::json& entry) {
  entries_.push_back(entry);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    out << entry.dump() << '\n';
  }
}

std::string direction_key(const std::string& src_lang, const std::string& tgt_lang) {
  return src_lang + "-" + tgt_lang;
}

TrainResult train_pairs(model::Transformer<float>& model, const std::vector<corpus::SentencePair>& train,
                        const ParallelData& dev, const subword::SubwordVocab& vocab,
                        const TrainConfig& config, const std::string& run_dir) {
  Trainer trainer(model, config);
  const auto dev_sets = encode_dev(dev, vocab);
  BatchStream stream(encode_pairs(train, vocab), config.tokens_per_batch, config.seed);
  Loop loop(trainer, dev_sets, run_dir, {{"config", model.config()}, {"train", config}});
  loop.log_initial_dev();
  loop.run(config.total_steps, [&] { return std::make_pair(std::string("all"), stream.next()); }, {}, 0, true);
  return loop.finish();
}

std::string to_string(DirectionSet set) { return set == DirectionSet::O2M ? "O2M" : "M2O"; }

DirectionSet direction_set_from_string(const std::string& name) {
  if (name == "O2M") return DirectionSet::O2M;
  if (name == "M2O") return DirectionSet::M2O;
  throw InvalidArgument("unknown direction set '" + name + "'");
}

void validate_pretrain_data(const PretrainSpec& spec, const ParallelData& data,
                            const subword::SubwordVocab& vocab) {
  if (spec.updates < 1) throw InvalidArgument("pretrain: updates must be >= 1");
  if (data.empty()) throw InvalidArgument("pretrain: no training data");
  for (const auto& [key, pairs] : data) {
    if (pairs.empty()) throw InvalidArgument("pretrain: direction " + key + " has no pairs");
    for (const auto& p : pairs) {
      if (direction_key(p.src_lang, p.tgt_lang) != key) {
        throw InvalidArgument("pretrain: pair " + p.id + " filed under " + key);
      }
      const bool ok = spec.direction_set == DirectionSet::O2M ? p.src_lang == spec.pivot
                                                              : p.tgt_lang == spec.pivot;
      if (!ok) {
        throw InvalidArgument("pretrain: pair " + p.id + " (" + key + ") violates " +
                              to_string(spec.direction_set) + " with pivot " + spec.pivot);
      }
    }
    vocab.language_id(pairs.front().src_lang);
    vocab.language_id(pairs.front().tgt_lang);
  }
}

std::vector<std::string> direction_schedule(const PretrainSpec& spec, const ParallelData& data,
                                            std::uint64_t seed) {
  filter::SamplerConfig sc;
  sc.temperature = spec.temperature;
  for (const auto& [key, pairs] : data) sc.sizes[key] = pairs.size();
  const filter::TemperatureSampler sampler(sc);
  Rng rng(mix_seed(seed, 0x5a3));
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(std::max(spec.updates, 0)));
  for (int i = 0; i < spec.updates; ++i) out.push_back(sampler.draw(rng));
  return out;
}

TrainResult pretrain(model::Transformer<float>& model, const PretrainSpec& spec, const ParallelData& train,
                     const ParallelData& dev, const subword::SubwordVocab& vocab, const TrainConfig& config,
                     const std::string& run_dir) {
  validate_pretrain_data(spec, train, vocab);
  const auto cfg = with_total(config, spec.updates);
  Trainer trainer(model, cfg);
  std::map<std::string, BatchStream> streams;
  std::uint64_t salt = 0;
  for (const auto& [key, pairs] : train) {
    streams.emplace(key, BatchStream(encode_pairs(pairs, vocab), cfg.tokens_per_batch, mix_seed(cfg.seed, ++salt)));
  }
  const auto schedule = direction_schedule(spec, train, cfg.seed);
  const auto dev_sets = encode_dev(dev, vocab);
  Loop loop(trainer, dev_sets, run_dir,
            {{"config", model.config()}, {"train", cfg}, {"direction_set", to_string(spec.direction_set)},
             {"pivot", spec.pivot}, {"temperature", spec.temperature}});
  loop.log_initial_dev();
  std::size_t next = 0;
  loop.run(spec.updates, [&] {
    const auto& key = schedule[next++];
    return std::make_pair(key, streams.at(key).next());
  }, {}, 0, true);
  return loop.finish();
}

std::pair<int, int> FinetuneSpec::stage_updates() const {
  if (embedding_ratio < 1 || full_ratio < 1 || total_updates < 1) {
    throw InvalidArgument("finetune: ratio parts and total updates must be positive");
  }
  const int first = static_cast<int>(static_cast<std::int64_t>(total_updates) * embedding_ratio /
                                     (embedding_ratio + full_ratio));
  return {first, total_updates - first};
}

TrainResult finetune(const FinetuneSpec& spec, const Checkpoint& pt_checkpoint,
                     const subword::SubwordVocab& pt_vocab, const subword::SubwordVocab& ft_vocab,
                     const std::vector<corpus::SentencePair>& train, const std::vector<corpus::SentencePair>& dev,
                     const TrainConfig& config, const std::string& run_dir) {
  const auto [stage1, stage2] = spec.stage_updates();
  for (const auto& p : train) {
    if (p.src_lang != spec.src_lang || p.tgt_lang != spec.tgt_lang) {
      throw InvalidArgument("finetune: pair " + p.id + " is not " + direction_key(spec.src_lang, spec.tgt_lang));
    }
  }
  auto pt = model::from_checkpoint(pt_checkpoint);
  auto mc = pt.config();
  mc.vocab = static_cast<int>(ft_vocab.size());
  model::Transformer<float> model(mc, config.seed);
  for (auto& p : model.parameters()) {
    if (!is_embedding(p.name)) p.value = pt.parameter(p.name).value;
  }
  model.parameter("embed").value =
      subword::rebind_embeddings(pt_vocab, ft_vocab, pt.parameter("embed").value, mix_seed(config.seed, 0xeb));

  const auto cfg = with_total(config, spec.total_updates);
  Trainer trainer(model, cfg);
  const auto key = direction_key(spec.src_lang, spec.tgt_lang);
  const auto dev_sets = encode_dev({{key, dev}}, ft_vocab);
  BatchStream stream(encode_pairs(train, ft_vocab), cfg.tokens_per_batch, cfg.seed);
  Loop loop(trainer, dev_sets, run_dir,
            {{"config", mc}, {"train", cfg}, {"direction", key},
             {"stage_updates", {stage1, stage2}}, {"pretrained_step", pt_checkpoint.step}});
  loop.log_initial_dev();
  const BatchSource source = [&] { return std::make_pair(key, stream.next()); };
  loop.run(stage1, source, is_embedding, 1, true);
  loop.run(stage2, source, {}, 2, true);
  return loop.finish();
}

TrainResult finetune(const FinetuneSpec& spec, const std::string& pt_checkpoint_path,
                     const subword::SubwordVocab& pt_vocab, const subword::SubwordVocab& ft_vocab,
                     const std::vector<corpus::SentencePair>& train, const std::vector<corpus::SentencePair>& dev,
                     const TrainConfig& config, const std::string& run_dir) {
  return finetune(spec, numerics::load_checkpoint(pt_checkpoint_path), pt_vocab, ft_vocab, train, dev, config,
                  run_dir);
}

}  // namespace vega::train
