#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "vega/core/error.hpp"
#include "vega/pipeline/ladder.hpp"
#include "vega/pipeline/stages.hpp"

using namespace vega;
using namespace vega::pipeline;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vega_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json micro_world() {
  return {{"languages", {"L1", "L2"}}, {"train_sizes", {60, 40}}, {"dev_size", 12}, {"test_size", 12},
          {"concept_vocab", 60},       {"concept_limit", 40},      {"bpe_merges", 80}};
}

json micro_train() { return {{"tokens_per_batch", 256}, {"warmup_steps", 4}}; }

RunConfig micro_run(const fs::path& dir) {
  const json cfg = {
      {"experiment", "micro"},
      {"seed", 5},
      {"run_dir", dir.string()},
      {"stages",
       {{{"name", "data"}, {"kind", "gen-data"}, {"params", {{"out", "data"}, {"world", micro_world()}}}},
        {{"name", "clean"},
         {"kind", "filter"},
         {"params", {{"input", "data/train.E-L1"}, {"output", "clean/train.E-L1"}, {"world", "data/world.json"},
                     {"report", "clean/report.json"}}}},
        {{"name", "bpe"},
         {"kind", "train-bpe"},
         {"params", {{"inputs", {"data/train.E-L1", "data/train.E-L2"}}, {"merges", 80}, {"out", "vocab.json"}}}},
        {{"name", "pt"},
         {"kind", "pretrain"},
         {"params", {{"data", "data"}, {"vocab", "vocab.json"}, {"direction_set", "O2M"}, {"updates", 20},
                     {"optim", micro_train()}, {"out", "pt"}}}},
        {{"name", "ft"},
         {"kind", "finetune"},
         {"params", {{"checkpoint", "pt/model.bin"}, {"vocab", "vocab.json"}, {"train", "clean/train.E-L1"},
                     {"dev", "data/dev.E-L1"}, {"updates", 10}, {"optim", micro_train()}, {"out", "ft"}}}},
        {{"name", "hyp"},
         {"kind", "decode"},
         {"params", {{"run", "ft"}, {"avg_last", 2}, {"vocab", "vocab.json"}, {"input", "data/test.E-L1.src"},
                     {"src", "E"}, {"tgt", "L1"}, {"greedy", true}, {"out", "hyp.txt"}}}},
        {{"name", "post"},
         {"kind", "postprocess"},
         {"params", {{"source", "data/test.E-L1.src"}, {"hypotheses", "hyp.txt"}, {"lang", "L1"},
                     {"world", "data/world.json"}, {"out", "hyp.post.txt"}, {"log", "post.json"}}}},
        {{"name", "bleu"},
         {"kind", "score"},
         {"params", {{"hypotheses", "hyp.post.txt"}, {"references", "data/test.E-L1.tgt"}, {"out", "bleu.json"}}}}}}};
  return cfg.get<RunConfig>();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

LadderConfig micro_ladder() {
  LadderConfig c = json{{"world", micro_world()}, {"train", micro_train()}}.get<LadderConfig>();
  c.src_lang = "L1";
  c.tgt_lang = "E";
  c.baseline_updates = 30;
  c.pretrain_updates = 20;
  c.finetune_updates = 10;
  c.teacher_updates = 5;
  c.student_updates = 5;
  c.mono_size = 20;
  c.genft_updates = 5;
  c.genft_iters = 1;
  return c;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(VEGA_CLI) + " -q " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.stages.push_back({"a", "nonsense", json::object()});
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.stages = {{"a", "score", {{"hypotheses", "h"}, {"references", "r"}}}, {"a", "score", {{"hypotheses", "h"}, {"references", "r"}}}};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.stages = {{"a", "score", {{"hypotheses", "h"}}}};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(stage_kinds().size() == 13);

  const auto io = stage_io({"f", "finetune", {{"checkpoint", "pt/model.bin"}, {"train", "t"}, {"out", "ft"}}});
  CHECK(io.inputs == std::vector<std::string>{"pt/model.bin", "t"});
  CHECK(io.outputs == std::vector<std::string>{"ft"});
}

TEST_CASE("empty stage list gives an empty report") {
  const auto dir = fresh_dir("empty");
  RunConfig c;
  c.run_dir = dir.string();
  const auto report = run(c);
  CHECK(report.at("stages").empty());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("missing artifacts and stage failures") {
  const auto dir = fresh_dir("errors");
  RunConfig c;
  c.run_dir = dir.string();
  c.stages = {{"scorer", "score", {{"hypotheses", "nowhere.txt"}, {"references", "nowhere.txt"}}}};
  try {
    run(c);
    FAIL("expected NotFound");
  } catch (const NotFound& e) {
    CHECK(std::string(e.what()).find("scorer") != std::string::npos);
  }

  std::ofstream(dir / "junk.bin") << "not a checkpoint";
  std::ofstream(dir / "v.json") << "{}";
  c.stages = {{"bad", "decode",
               {{"checkpoint", "junk.bin"}, {"vocab", "v.json"}, {"input", "junk.bin"}, {"src", "E"}, {"tgt", "L1"},
                {"out", "h.txt"}}},
              {"after", "score", {{"hypotheses", "h.txt"}, {"references", "h.txt"}}}};
  try {
    run(c);
    FAIL("expected StageFailed");
  } catch (const StageFailed& e) {
    CHECK(e.stage() == "bad");
  }
  CHECK_FALSE(fs::exists(dir / "h.txt"));
  CHECK_FALSE(fs::exists(dir / "report.json"));
}

TEST_CASE("micro pipeline is deterministic and every artifact is declared") {
  const auto a = fresh_dir("run_a");
  const auto b = fresh_dir("run_b");
  const auto report = run(micro_run(a));
  run(micro_run(b));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "hyp.post.txt") == slurp(b / "hyp.post.txt"));
  REQUIRE(report.at("stages").size() == 8);
  CHECK(report.at("stages")[1].at("metrics").at("output_count").get<std::size_t>() <= 60);
  CHECK(report.at("stages")[5].at("metrics").at("averaged") == 2);

  std::set<fs::path> declared = {"report.json", "config.json"};
  for (const auto& stage : report.at("stages")) {
    for (const auto& out : stage.at("outputs")) declared.insert(fs::path(out.get<std::string>()));
  }
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), a);
    bool reachable = false;
    for (const auto& d : declared) {
      const auto r = rel.lexically_relative(d);
      reachable = reachable || rel == d || (!r.empty() && *r.begin() != "..") ||
                  rel.string().rfind(d.string() + ".", 0) == 0;
    }
    CAPTURE(rel);
    CHECK(reachable);
  }

  const auto reversed = run_stage("finetune", {{"checkpoint", (a / "pt/model.bin").string()},
                                               {"vocab", (a / "vocab.json").string()},
                                               {"train", (a / "data/train.E-L1").string()},
                                               {"dev", (a / "data/dev.E-L1").string()},
                                               {"src", "L1"},
                                               {"tgt", "E"},
                                               {"updates", 5},
                                               {"optim", micro_train()},
                                               {"out", (b / "reversed").string()}});
  CHECK(reversed.at("direction") == "L1-E");
}

TEST_CASE("ablation ladder") {
  SUBCASE("baseline only") {
    auto c = micro_ladder();
    c.steps = {"baseline"};
    const auto ladder = ablate(c);
    REQUIRE(ladder.rows.size() == 1);
    CHECK(ladder.rows[0].delta_dev == 0.0);
    CHECK(ladder.rows[0].delta_test == 0.0);
  }
  SUBCASE("steps must be a prefix") {
    auto c = micro_ladder();
    c.steps = {"baseline", "+specific-FT"};
    CHECK_THROWS_AS(ablate(c), InvalidArgument);
    c.steps = {};
    c.tgt_lang = "L3";
    CHECK_THROWS_AS(ablate(c), InvalidArgument);
  }
  SUBCASE("full ladder runs in order and repeats exactly") {
    const auto first = ablate(micro_ladder());
    REQUIRE(first.rows.size() == ladder_steps().size());
    for (std::size_t i = 0; i < first.rows.size(); ++i) CHECK(first.rows[i].step == ladder_steps()[i]);
    CHECK(first.rows.back().number_mismatches <= first.rows[first.rows.size() - 2].number_mismatches);
    CHECK(ablate(micro_ladder()).to_json().dump() == first.to_json().dump());
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("cli");
  CHECK(cli("--help") == 0);
  CHECK(cli("no-such-command") == 2);
  std::ofstream(dir / "empty.json") << json{{"run_dir", (dir / "r0").string()}}.dump();
  CHECK(cli("run --config " + (dir / "empty.json").string()) == 0);
  std::ofstream(dir / "bad.json") << json{{"stages", {{{"kind", "warp-drive"}}}}}.dump();
  CHECK(cli("run --config " + (dir / "bad.json").string()) == 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli("run --config " + (dir / "broken.json").string()) == 2);
  CHECK(cli("score --hypotheses " + (dir / "missing.txt").string() + " --references x") == 3);
  std::ofstream(dir / "junk.bin") << "junk";
  std::ofstream(dir / "v.json") << "{}";
  const json failing{{"run_dir", (dir / "r1").string()},
                     {"stages",
                      {{{"kind", "decode"},
                        {"params",
                         {{"checkpoint", (dir / "junk.bin").string()}, {"vocab", (dir / "v.json").string()},
                          {"input", (dir / "junk.bin").string()}, {"src", "E"}, {"tgt", "L1"}, {"out", "h.txt"}}}}}}};
  std::ofstream(dir / "fail.json") << failing.dump();
  CHECK(cli("run --config " + (dir / "fail.json").string()) == 4);
}
