#include "vega/pipeline/world.hpp"

#include "vega/core/error.hpp"
#include "vega/core/random.hpp"

namespace vega::pipeline {

void WorldConfig::validate() const {
  if (languages.empty()) throw InvalidArgument("world: no languages");
  if (languages.size() > 5) throw InvalidArgument("world: at most five languages besides the pivot");
  if (train_sizes.size() != languages.size()) throw InvalidArgument("world: train_sizes must align with languages");
  for (auto n : train_sizes) {
    if (n == 0) throw InvalidArgument("world: empty training split");
  }
  if (dev_size == 0 || test_size == 0) throw InvalidArgument("world: empty dev or test split");
}

void to_json(nlohmann::json& j, const WorldConfig& c) {
  j = {{"seed", c.seed},
       {"concept_vocab", c.concept_vocab},
       {"max_clauses", c.generation.max_clauses},
       {"min_clauses", c.generation.min_clauses},
       {"max_adjectives", c.generation.max_adjectives},
       {"literal_rate", c.generation.literal_rate},
       {"concept_limit", c.generation.concept_limit},
       {"concept_offset", c.generation.concept_offset},
       {"languages", c.languages},
       {"train_sizes", c.train_sizes},
       {"dev_size", c.dev_size},
       {"test_size", c.test_size},
       {"bpe_merges", c.bpe_merges}};
}

void from_json(const nlohmann::json& j, WorldConfig& c) {
  c = WorldConfig{};
  c.seed = j.value("seed", c.seed);
  c.concept_vocab = j.value("concept_vocab", c.concept_vocab);
  c.generation.max_clauses = j.value("max_clauses", c.generation.max_clauses);
  c.generation.min_clauses = j.value("min_clauses", c.generation.min_clauses);
  c.generation.max_adjectives = j.value("max_adjectives", c.generation.max_adjectives);
  c.generation.literal_rate = j.value("literal_rate", c.generation.literal_rate);
  c.generation.concept_limit = j.value("concept_limit", c.generation.concept_limit);
  c.generation.concept_offset = j.value("concept_offset", c.generation.concept_offset);
  c.languages = j.value("languages", c.languages);
  c.train_sizes = j.value("train_sizes", c.train_sizes);
  c.dev_size = j.value("dev_size", c.dev_size);
  c.test_size = j.value("test_size", c.test_size);
  c.bpe_merges = j.value("bpe_merges", c.bpe_merges);
}

const corpus::ToyLanguage& World::language(const std::string& id) const {
  for (const auto& lang : family) {
    if (lang.id() == id) return lang;
  }
  throw NotFound("world has no language '" + id + "'");
}

std::vector<corpus::SentencePair> World::pairs(const std::string& split, const std::string& src,
                                               const std::string& tgt) const {
  const train::ParallelData* data = split == "train" ? &train : split == "dev" ? &dev : split == "test" ? &test : nullptr;
  if (!data) throw InvalidArgument("unknown split '" + split + "'");
  if (src == kPivot) {
    const auto it = data->find(train::direction_key(src, tgt));
    if (it == data->end()) throw NotFound("no " + split + " data for " + train::direction_key(src, tgt));
    return it->second;
  }
  const auto it = data->find(train::direction_key(tgt, src));
  if (tgt != kPivot || it == data->end()) throw NotFound("no " + split + " data for " + train::direction_key(src, tgt));
  std::vector<corpus::SentencePair> out;
  out.reserve(it->second.size());
  for (const auto& p : it->second) out.push_back(corpus::flipped(p));
  return out;
}

World build_world(const WorldConfig& config) {
  config.validate();
  World w;
  w.config = config;
  const auto full = corpus::generate_language_family(config.seed, config.concept_vocab);
  w.family.push_back(full.front());
  for (const auto& id : config.languages) {
    bool found = false;
    for (const auto& lang : full) {
      if (lang.id() == id && id != kPivot) {
        w.family.push_back(lang);
        found = true;
      }
    }
    if (!found) throw InvalidArgument("world: unknown language '" + id + "'");
  }
  std::vector<Sentence> bpe_corpus;
  std::vector<std::string> tags;
  tags.push_back(subword::language_token(kPivot));
  for (std::size_t k = 0; k < config.languages.size(); ++k) {
    const auto& lang = w.language(config.languages[k]);
    const auto key = train::direction_key(kPivot, lang.id());
    const auto salt = static_cast<std::uint64_t>(k + 1) * 16;
    w.train[key] = corpus::generate_parallel(w.family[0], lang, config.train_sizes[k], mix_seed(config.seed, salt),
                                             config.generation);
    w.dev[key] = corpus::generate_parallel(w.family[0], lang, config.dev_size, mix_seed(config.seed, salt + 1),
                                           config.generation);
    w.test[key] = corpus::generate_parallel(w.family[0], lang, config.test_size, mix_seed(config.seed, salt + 2),
                                            config.generation);
    for (const auto& p : w.train[key]) {
      bpe_corpus.push_back(p.src);
      bpe_corpus.push_back(p.tgt);
    }
    tags.push_back(subword::language_token(lang.id()));
  }
  w.vocab = std::make_shared<const subword::SubwordVocab>(subword::train_bpe(bpe_corpus, config.bpe_merges, tags));
  return w;
}

train::TrainConfig desk_train_config() {
  train::TrainConfig c;
  c.tokens_per_batch = 512;
  c.peak_lr = 2e-3;
  return c;
}

}  // namespace vega::pipeline
