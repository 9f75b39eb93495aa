#include "vega/pipeline/transfer.hpp"

#include <filesystem>

#include "vega/model/serialize.hpp"

namespace vega::pipeline {

namespace {

std::string sub(const std::string& dir, const std::string& name) {
  return dir.empty() ? std::string() : (std::filesystem::path(dir) / name).string();
}

double dev_bleu(const model::Transformer<float>& m, const World& w, const std::string& split, const std::string& src,
                const std::string& tgt, const decode::DecodeOptions& options) {
  auto shared = std::make_shared<const model::Transformer<float>>(m);
  const auto t = decode::model_translator("eval", shared, w.vocab, src, tgt, options);
  return decode::evaluate_bleu(t, w.pairs(split, src, tgt)).score;
}

}  // namespace

void to_json(nlohmann::json& j, const TransferConfig& c) {
  j = {{"world", c.world},
       {"model", c.model},
       {"train", c.train},
       {"direction_set", train::to_string(c.direction_set)},
       {"temperature", c.temperature},
       {"pretrain_updates", c.pretrain_updates},
       {"finetune_updates", c.finetune_updates},
       {"embedding_ratio", c.embedding_ratio},
       {"full_ratio", c.full_ratio},
       {"greedy", c.decode.greedy},
       {"beam", c.decode.beam.beam_size}};
}

void from_json(const nlohmann::json& j, TransferConfig& c) {
  c = TransferConfig{};
  if (j.contains("world")) c.world = overlay(c.world, j.at("world"));
  if (j.contains("model")) c.model = overlay(c.model, j.at("model"));
  if (j.contains("train")) c.train = overlay(c.train, j.at("train"));
  if (j.contains("direction_set")) c.direction_set = train::direction_set_from_string(j.at("direction_set"));
  c.temperature = j.value("temperature", c.temperature);
  c.pretrain_updates = j.value("pretrain_updates", c.pretrain_updates);
  c.finetune_updates = j.value("finetune_updates", c.finetune_updates);
  c.embedding_ratio = j.value("embedding_ratio", c.embedding_ratio);
  c.full_ratio = j.value("full_ratio", c.full_ratio);
  c.decode.greedy = j.value("greedy", c.decode.greedy);
  c.decode.beam.beam_size = j.value("beam", c.decode.beam.beam_size);
}

std::size_t TransferReport::wins() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.transfer_dev_bleu > r.baseline_dev_bleu;
  return n;
}

nlohmann::json TransferReport::to_json() const {
  nlohmann::json out{{"wins", wins()}, {"directions", rows.size()}};
  auto& list = out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    list.push_back({{"direction", r.direction},
                    {"train_pairs", r.train_pairs},
                    {"updates", r.updates},
                    {"baseline_dev_bleu", r.baseline_dev_bleu},
                    {"pretrained_dev_bleu", r.pretrained_dev_bleu},
                    {"transfer_dev_bleu", r.transfer_dev_bleu},
                    {"baseline_test_bleu", r.baseline_test_bleu},
                    {"transfer_test_bleu", r.transfer_test_bleu}});
  }
  return out;
}

TransferReport run_transfer_experiment(const TransferConfig& config, const std::string& run_dir,
                                       const Progress& progress) {
  const auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const World w = build_world(config.world);
  const bool o2m = config.direction_set == train::DirectionSet::O2M;
  auto model_config = config.model;
  model_config.vocab = static_cast<int>(w.vocab->size());

  std::vector<std::pair<std::string, std::string>> directions;
  train::ParallelData pt_train;
  train::ParallelData pt_dev;
  for (const auto& lang : config.world.languages) {
    const auto src = o2m ? std::string(kPivot) : lang;
    const auto tgt = o2m ? lang : std::string(kPivot);
    directions.emplace_back(src, tgt);
    pt_train[train::direction_key(src, tgt)] = w.pairs("train", src, tgt);
    pt_dev[train::direction_key(src, tgt)] = w.pairs("dev", src, tgt);
  }

  say("pretraining " + train::to_string(config.direction_set) + " for " + std::to_string(config.pretrain_updates) +
      " updates");
  model::Transformer<float> pt_model(model_config, mix_seed(config.train.seed, 1));
  train::PretrainSpec spec{config.direction_set, kPivot, config.temperature, config.pretrain_updates};
  const auto pt = train::pretrain(pt_model, spec, pt_train, pt_dev, *w.vocab, config.train, sub(run_dir, "pretrain"));
  const auto& pt_ckpt = pt.checkpoints.back();

  TransferReport report;
  const int total = config.pretrain_updates + config.finetune_updates;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const auto& [src, tgt] = directions[k];
    const auto key = train::direction_key(src, tgt);
    TransferRow row;
    row.direction = key;
    row.train_pairs = pt_train.at(key).size();
    row.updates = total;
    row.pretrained_dev_bleu = dev_bleu(pt_model, w, "dev", src, tgt, config.decode);

    say(key + ": finetuning for " + std::to_string(config.finetune_updates) + " updates");
    train::FinetuneSpec ft{src, tgt, config.embedding_ratio, config.full_ratio, config.finetune_updates};
    auto ft_cfg = config.train;
    ft_cfg.seed = mix_seed(config.train.seed, 100 + k);
    const auto ft_result = train::finetune(ft, pt_ckpt, *w.vocab, *w.vocab, pt_train.at(key), pt_dev.at(key), ft_cfg,
                                           sub(run_dir, "finetune-" + key));
    const auto ft_model = model::from_checkpoint(ft_result.checkpoints.back());
    row.transfer_dev_bleu = dev_bleu(ft_model, w, "dev", src, tgt, config.decode);
    row.transfer_test_bleu = dev_bleu(ft_model, w, "test", src, tgt, config.decode);

    say(key + ": bilingual baseline for " + std::to_string(total) + " updates");
    auto base_cfg = config.train;
    base_cfg.total_steps = total;
    base_cfg.seed = mix_seed(config.train.seed, 200 + k);
    model::Transformer<float> base(model_config, mix_seed(config.train.seed, 300 + k));
    train::train_pairs(base, pt_train.at(key), {{key, pt_dev.at(key)}}, *w.vocab, base_cfg,
                       sub(run_dir, "baseline-" + key));
    row.baseline_dev_bleu = dev_bleu(base, w, "dev", src, tgt, config.decode);
    row.baseline_test_bleu = dev_bleu(base, w, "test", src, tgt, config.decode);
    say(key + ": baseline " + std::to_string(row.baseline_dev_bleu) + ", pretrained " +
        std::to_string(row.pretrained_dev_bleu) + ", finetuned " + std::to_string(row.transfer_dev_bleu));
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace vega::pipeline
