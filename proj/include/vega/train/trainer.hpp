#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/model/transformer.hpp"
#include "vega/numerics/checkpoint.hpp"
#include "vega/train/batching.hpp"
#include "vega/train/config.hpp"
#include "vega/train/optimizer.hpp"

namespace vega::train {

using numerics::Checkpoint;

struct StepStats {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double nll_per_token = 0.0;
  std::size_t tokens = 0;
};

/// Owns the optimizer and dropout stream for one model. Single-threaded, so
/// a fixed seed reproduces the same parameters.
class Trainer {
 public:
  Trainer(model::Transformer<float>& model, const TrainConfig& config);

  /// One optimizer update on `batch` at the schedule position step() + 1.
  StepStats update(const std::vector<Example>& batch, const ParamFilter& trainable = {});

  std::int64_t step() const { return step_; }
  const TrainConfig& config() const { return config_; }
  model::Transformer<float>& model() { return model_; }
  const AdamW<float>& optimizer() const { return optimizer_; }

 private:
  model::Transformer<float>& model_;
  TrainConfig config_;
  AdamW<float> optimizer_;
  Rng dropout_rng_;
  std::int64_t step_ = 0;
};

/// Mean unsmoothed NLL per target token (EOS included for AT), without
/// dropout. Returns 0 for an empty set.
double evaluate_loss(model::Transformer<float>& model, const std::vector<Example>& examples,
                     std::size_t tokens_per_batch);

/// JSON-lines log kept in memory and, when a path is given, appended to disk.
class RunLog {
 public:
  explicit RunLog(std::string path = {});
  void write(const nlohmann::json& entry);
  const std::vector<nlohmann::json>& entries() const { return entries_; }

 private:
  std::string path_;
  std::vector<nlohmann::json> entries_;
};

struct TrainResult {
  std::vector<Checkpoint> checkpoints;
  std::vector<nlohmann::json> log;
};

/// Direction key "E-L1".
std::string direction_key(const std::string& src_lang, const std::string& tgt_lang);

using ParallelData = std::map<std::string, std::vector<corpus::SentencePair>>;

/// Trains all parameters of `model` in place on pooled pairs for
/// config.total_steps updates. Dev loss per direction is logged at every
/// checkpoint. Checkpoints and log.jsonl go to run_dir when it is non-empty.
TrainResult train_pairs(model::Transformer<float>& model, const std::vector<corpus::SentencePair>& train,
                        const ParallelData& dev, const subword::SubwordVocab& vocab,
                        const TrainConfig& config, const std::string& run_dir = {});

enum class DirectionSet { O2M, M2O };

std::string to_string(DirectionSet set);
DirectionSet direction_set_from_string(const std::string& name);

struct PretrainSpec {
  DirectionSet direction_set = DirectionSet::O2M;
  std::string pivot = "E";
  double temperature = 5.0;
  int updates = 1000;
};

/// Throws InvalidArgument when a pair breaks the direction set, sits under
/// the wrong key, or names a language without a tag in `vocab`.
void validate_pretrain_data(const PretrainSpec& spec, const ParallelData& data,
                            const subword::SubwordVocab& vocab);

/// The direction drawn for each of `updates` steps.
std::vector<std::string> direction_schedule(const PretrainSpec& spec, const ParallelData& data,
                                            std::uint64_t seed);

/// Multi-directional pretraining: each update draws a direction from the
/// temperature sampler and takes that direction's next batch. Checkpoints
/// every config.checkpoint_interval() updates, each carrying dev loss per
/// direction in meta["dev_loss"]; the log starts with the dev loss at init.
TrainResult pretrain(model::Transformer<float>& model, const PretrainSpec& spec, const ParallelData& train,
                     const ParallelData& dev, const subword::SubwordVocab& vocab, const TrainConfig& config,
                     const std::string& run_dir = {});

struct FinetuneSpec {
  std::string src_lang;
  std::string tgt_lang;
  int embedding_ratio = 1;
  int full_ratio = 4;
  int total_updates = 400;

  /// {embedding-only updates, full updates}; throws InvalidArgument for
  /// non-positive parts or total.
  std::pair<int, int> stage_updates() const;
};

/// Two-stage finetuning from a pretrained checkpoint: embeddings are rebound
/// onto ft_vocab, stage 1 updates only "embed" (which is also the tied output
/// projection), stage 2 updates everything. The checkpoint closing stage 1 is
/// always emitted with meta["stage"] = 1; the last checkpoint is the final
/// model.
TrainResult finetune(const FinetuneSpec& spec, const Checkpoint& pt_checkpoint,
                     const subword::SubwordVocab& pt_vocab, const subword::SubwordVocab& ft_vocab,
                     const std::vector<corpus::SentencePair>& train, const std::vector<corpus::SentencePair>& dev,
                     const TrainConfig& config, const std::string& run_dir = {});

/// As above, loading the checkpoint from disk; throws NotFound when missing.
TrainResult finetune(const FinetuneSpec& spec, const std::string& pt_checkpoint_path,
                     const subword::SubwordVocab& pt_vocab, const subword::SubwordVocab& ft_vocab,
                     const std::vector<corpus::SentencePair>& train, const std::vector<corpus::SentencePair>& dev,
                     const TrainConfig& config, const std::string& run_dir = {});

}  // namespace vega::train
