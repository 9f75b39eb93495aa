#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "vega/core/error.hpp"
#include "vega/pipeline/stages.hpp"

using namespace vega;
using json = nlohmann::json;

namespace {

enum class Type { Str, Int, Real, Flag, NoFlag, Strs, Ints };

struct Opt {
  const char* flag;
  const char* key;  // dotted path into params
  Type type;
  const char* help;
};

const std::vector<Opt> kTrain = {
    {"--seed", "seed", Type::Int, "random seed"},
    {"--lr", "optim.peak_lr", Type::Real, "peak learning rate"},
    {"--batch-tokens", "optim.tokens_per_batch", Type::Int, "tokens per batch"},
    {"--warmup", "optim.warmup_steps", Type::Int, "warmup updates"},
    {"--model", "model", Type::Str, "model preset: tiny, small, base, big, xl"},
};

const std::vector<Opt> kDecode = {
    {"--beam", "beam", Type::Int, "beam size (default 4)"},
    {"--greedy", "greedy", Type::Flag, "greedy decoding"},
};

std::vector<Opt> with(std::vector<Opt> a, const std::vector<Opt>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::map<std::string, std::pair<std::string, std::vector<Opt>>>& commands() {
  static const std::map<std::string, std::pair<std::string, std::vector<Opt>>> c = {
      {"gen-data",
       {"generate a toy language family with train/dev/test splits",
        {{"--out", "out", Type::Str, "output directory"},
         {"--seed", "seed", Type::Int, "world seed"},
         {"--languages", "world.languages", Type::Strs, "languages besides the pivot E"},
         {"--train-sizes", "world.train_sizes", Type::Ints, "train pairs per direction"},
         {"--dev-size", "world.dev_size", Type::Int, "dev pairs per direction"},
         {"--test-size", "world.test_size", Type::Int, "test pairs per direction"},
         {"--concept-vocab", "world.concept_vocab", Type::Int, "concepts per language"},
         {"--concept-limit", "world.concept_limit", Type::Int, "sample only the first N concepts"},
         {"--literal-rate", "world.literal_rate", Type::Real, "share of sentences with a number"},
         {"--max-clauses", "world.max_clauses", Type::Int, "clauses per sentence"},
         {"--mono-size", "mono_size", Type::Int, "monolingual sentences per language"}}}},
      {"filter",
       {"clean a parallel corpus",
        {{"--input", "input", Type::Str, "input corpus prefix"},
         {"--output", "output", Type::Str, "output corpus prefix"},
         {"--world", "world", Type::Str, "world.json from gen-data"},
         {"--report", "report", Type::Str, "filter report path"}}}},
      {"train-bpe",
       {"learn a joint subword vocabulary",
        {{"--inputs", "inputs", Type::Strs, "corpus prefixes or sentence files"},
         {"--merges", "merges", Type::Int, "merge operations"},
         {"--languages", "languages", Type::Strs, "extra language tags"},
         {"--out", "out", Type::Str, "vocabulary path"}}}},
      {"pretrain",
       {"multi-directional pretraining",
        with({{"--data", "data", Type::Str, "gen-data directory"},
              {"--vocab", "vocab", Type::Str, "vocabulary"},
              {"--direction-set", "direction_set", Type::Str, "O2M or M2O"},
              {"--temperature", "temperature", Type::Real, "sampling temperature"},
              {"--updates", "updates", Type::Int, "updates"},
              {"--languages", "languages", Type::Strs, "languages to include"},
              {"--out", "out", Type::Str, "run directory"}},
             kTrain)}},
      {"finetune",
       {"two-stage specific-directional finetuning",
        with({{"--checkpoint", "checkpoint", Type::Str, "pretrained checkpoint"},
              {"--vocab", "vocab", Type::Str, "pretraining vocabulary"},
              {"--ft-vocab", "ft_vocab", Type::Str, "finetuning vocabulary (default: same)"},
              {"--train", "train", Type::Str, "train corpus prefix"},
              {"--dev", "dev", Type::Str, "dev corpus prefix"},
              {"--src", "src", Type::Str, "source language"},
              {"--tgt", "tgt", Type::Str, "target language"},
              {"--updates", "updates", Type::Int, "total updates"},
              {"--embedding-ratio", "embedding_ratio", Type::Int, "embedding-only share"},
              {"--full-ratio", "full_ratio", Type::Int, "full-model share"},
              {"--out", "out", Type::Str, "run directory"}},
             kTrain)}},
      {"augment",
       {"bidirectional self-training or cycle translation",
        with(with({{"--method", "method", Type::Str, "self-training or cycle"},
                   {"--para", "para", Type::Str, "authentic corpus prefix"},
                   {"--dev", "dev", Type::Str, "dev corpus prefix"},
                   {"--vocab", "vocab", Type::Str, "vocabulary"},
                   {"--src", "src", Type::Str, "source language"},
                   {"--tgt", "tgt", Type::Str, "target language"},
                   {"--mono-src", "mono_src", Type::Str, "source-side monolingual file"},
                   {"--mono-tgt", "mono_tgt", Type::Str, "target-side monolingual file"},
                   {"--rounds", "rounds", Type::Int, "self-training rounds"},
                   {"--teacher-updates", "teacher_updates", Type::Int, "updates per teacher"},
                   {"--forward-init", "forward_init", Type::Str, "forward teacher init checkpoint"},
                   {"--backward-init", "backward_init", Type::Str, "backward teacher init checkpoint"},
                   {"--mono", "mono", Type::Str, "monolingual file to cycle-translate"},
                   {"--lang", "lang", Type::Str, "language of --mono"},
                   {"--via", "via", Type::Str, "intermediate language"},
                   {"--t2s", "t2s", Type::Str, "lang -> via checkpoint"},
                   {"--s2t", "s2t", Type::Str, "via -> lang checkpoint"},
                   {"--lm-corpus", "lm_corpus", Type::Strs, "clean text for the scoring LM"},
                   {"--out", "out", Type::Str, "output corpus prefix or file"},
                   {"--manifest", "manifest", Type::Str, "manifest path"}},
                  kTrain),
             kDecode)}},
      {"decode",
       {"translate a file",
        with({{"--checkpoint", "checkpoint", Type::Str, "checkpoint"},
              {"--run", "run", Type::Str, "run directory (with --avg-last)"},
              {"--avg-last", "avg_last", Type::Int, "average the last k checkpoints of --run"},
              {"--vocab", "vocab", Type::Str, "vocabulary"},
              {"--input", "input", Type::Str, "source sentences"},
              {"--src", "src", Type::Str, "source language"},
              {"--tgt", "tgt", Type::Str, "target language"},
              {"--nat", "nat", Type::Flag, "non-autoregressive decoding"},
              {"--nat-lengths", "nat_lengths", Type::Int, "length candidates for NAT"},
              {"--references", "references", Type::Str, "score against these"},
              {"--out", "out", Type::Str, "output file"}},
             kDecode)}},
      {"ensemble-select",
       {"greedy ensemble search on dev BLEU",
        with({{"--candidates", "candidates", Type::Strs, "candidate checkpoints"},
              {"--vocab", "vocab", Type::Str, "vocabulary"},
              {"--dev", "dev", Type::Str, "dev corpus prefix"},
              {"--max-size", "max_size", Type::Int, "largest ensemble"},
              {"--combine", "combine", Type::Str, "probability or log_probability"},
              {"--out", "out", Type::Str, "ensemble spec path"}},
             kDecode)}},
      {"genft",
       {"generalization finetuning on ensemble translations",
        with(with({{"--checkpoint", "checkpoint", Type::Str, "model to finetune"},
                   {"--ensemble", "ensemble", Type::Str, "ensemble spec"},
                   {"--vocab", "vocab", Type::Str, "vocabulary"},
                   {"--seeds", "seeds", Type::Strs, "domain seed files"},
                   {"--base", "base", Type::Str, "base parallel corpus prefix"},
                   {"--dev", "dev", Type::Str, "dev corpus prefix"},
                   {"--max-iters", "max_iters", Type::Int, "iterations"},
                   {"--delta", "convergence_delta", Type::Real, "convergence threshold in BLEU"},
                   {"--base-ratio", "base_ratio", Type::Real, "base pairs per pseudo pair"},
                   {"--updates", "updates", Type::Int, "updates per iteration"},
                   {"--out", "out", Type::Str, "output checkpoint"},
                   {"--manifest", "manifest", Type::Str, "manifest path"}},
                  kTrain),
             kDecode)}},
      {"postprocess",
       {"repair numbers and convert punctuation",
        {{"--source", "source", Type::Str, "source sentences"},
         {"--hypotheses", "hypotheses", Type::Str, "system output"},
         {"--lang", "lang", Type::Str, "target language"},
         {"--world", "world", Type::Str, "world.json, registers toy profiles"},
         {"--no-numbers", "numbers", Type::NoFlag, "skip number repair"},
         {"--no-punctuation", "punctuation", Type::NoFlag, "skip punctuation conversion"},
         {"--out", "out", Type::Str, "output file"},
         {"--log", "log", Type::Str, "change log (JSON)"}}}},
      {"score",
       {"corpus BLEU",
        {{"--hypotheses", "hypotheses", Type::Str, "system output"},
         {"--references", "references", Type::Str, "references"},
         {"--out", "out", Type::Str, "report path"}}}},
      {"ablate",
       {"run the ablation ladder",
        {{"--config", "config", Type::Str, "ladder config (JSON file)"},
         {"--work", "work", Type::Str, "directory for intermediate checkpoints"},
         {"--seed", "seed", Type::Int, "seed"},
         {"--out", "out", Type::Str, "report path"}}}},
      {"transfer",
       {"pretrain + finetune against bilingual baselines",
        {{"--config", "config", Type::Str, "transfer config (JSON file)"},
         {"--work", "work", Type::Str, "directory for intermediate checkpoints"},
         {"--seed", "seed", Type::Int, "seed"},
         {"--out", "out", Type::Str, "report path"}}}},
  };
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void set_path(json& root, const std::string& dotted, json value) {
  json* node = &root;
  std::size_t start = 0;
  for (auto dot = dotted.find('.'); dot != std::string::npos; dot = dotted.find('.', start)) {
    node = &(*node)[dotted.substr(start, dot - start)];
    start = dot + 1;
  }
  (*node)[dotted.substr(start)] = std::move(value);
}

struct Bound {
  Opt opt;
  CLI::Option* handle = nullptr;
  std::string str;
  std::vector<std::string> strs;
  bool flag = false;
};

int fail(int code, const std::string& msg) {
  std::cerr << "vega: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vega: desk-scale multilingual translation pipeline"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no progress on stderr");

  std::map<std::string, std::vector<std::unique_ptr<Bound>>> bound;
  std::map<std::string, std::string> params_file;
  for (const auto& [name, spec] : commands()) {
    auto* sub = app.add_subcommand(name, spec.first);
    sub->add_option("--params", params_file[name], "JSON file with base parameters");
    for (const auto& opt : spec.second) {
      auto b = std::make_unique<Bound>();
      b->opt = opt;
      switch (opt.type) {
        case Type::Flag:
        case Type::NoFlag:
          b->handle = sub->add_flag(opt.flag, b->flag, opt.help);
          break;
        case Type::Strs:
        case Type::Ints:
          b->handle = sub->add_option(opt.flag, b->strs, opt.help);
          break;
        default:
          b->handle = sub->add_option(opt.flag, b->str, opt.help);
      }
      bound[name].push_back(std::move(b));
    }
  }
  std::string run_config;
  std::string run_dir;
  auto* run_cmd = app.add_subcommand("run", "execute a declarative run configuration");
  run_cmd->add_option("--config", run_config, "run configuration (JSON)")->required();
  run_cmd->add_option("--run-dir", run_dir, "override the configured run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const pipeline::Progress progress = [&](const std::string& msg) {
    if (!quiet) std::cerr << "[vega] " << msg << "\n";
  };
  try {
    if (run_cmd->parsed()) {
      auto config = read_json_file(run_config).get<pipeline::RunConfig>();
      if (!run_dir.empty()) config.run_dir = run_dir;
      std::cout << pipeline::run(config, progress).dump(2) << "\n";
      return 0;
    }
    for (const auto& [name, opts] : bound) {
      if (!app.got_subcommand(name)) continue;
      json params = params_file[name].empty() ? json::object() : read_json_file(params_file[name]);
      for (const auto& b : opts) {
        if (b->handle->count() == 0) continue;
        const std::string key = b->opt.key;
        switch (b->opt.type) {
          case Type::Str:
            if ((name == "ablate" || name == "transfer") && key == "config") {
              set_path(params, key, read_json_file(b->str));
            } else {
              set_path(params, key, b->str);
            }
            break;
          case Type::Int:
            set_path(params, key, std::stoll(b->str));
            break;
          case Type::Real:
            set_path(params, key, std::stod(b->str));
            break;
          case Type::Flag:
            set_path(params, key, true);
            break;
          case Type::NoFlag:
            set_path(params, key, false);
            break;
          case Type::Strs:
            set_path(params, key, b->strs);
            break;
          case Type::Ints: {
            std::vector<long long> v;
            for (const auto& s : b->strs) v.push_back(std::stoll(s));
            set_path(params, key, v);
            break;
          }
        }
      }
      std::cout << pipeline::run_stage(name, params, progress).dump(2) << "\n";
      return 0;
    }
  } catch (const NotFound& e) {
    return fail(3, e.what());
  } catch (const InvalidArgument& e) {
    return fail(2, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(2, e.what());
  } catch (const std::out_of_range& e) {
    return fail(2, e.what());
  } catch (const pipeline::StageFailed& e) {
    return fail(4, e.what());
  } catch (const std::exception& e) {
    return fail(4, e.what());
  }
  return 0;
}
