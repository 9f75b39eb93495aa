#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/pipeline/transfer.hpp"

namespace vega::pipeline {

/// A stage raised an error while running; carries the stage name.
class StageFailed : public std::runtime_error {
 public:
  StageFailed(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageSpec {
  std::string name;
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

/// Stages run in list order with the working directory set to run_dir, so
/// relative paths in params resolve inside the run directory.
struct RunConfig {
  std::string experiment = "run";
  std::uint64_t seed = 1;
  std::string run_dir = ".";
  std::vector<StageSpec> stages;

  /// Throws InvalidArgument for an unknown kind, a duplicate stage name or a
  /// missing required parameter.
  void validate() const;
};

void to_json(nlohmann::json& j, const StageSpec& s);
void from_json(const nlohmann::json& j, StageSpec& s);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Kinds in the order a full pipeline would use them.
const std::vector<std::string>& stage_kinds();

/// Paths a stage reads and writes, taken from its params.
struct StageIO {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};
StageIO stage_io(const StageSpec& stage);

/// Runs one stage and returns its metrics. Throws InvalidArgument for bad
/// params and NotFound for a missing input.
nlohmann::json run_stage(const std::string& kind, const nlohmann::json& params, const Progress& progress = {});

/// Executes all stages and returns the report {experiment, seed, stages:
/// [{name, kind, inputs, outputs, metrics}]}, also written to
/// run_dir/report.json next to a copy of the config. Before any stage runs,
/// every input must exist or be an output of an earlier stage (NotFound
/// naming the stage). A stage error aborts the run as StageFailed, except
/// NotFound which propagates.
nlohmann::json run(const RunConfig& config, const Progress& progress = {});

}  // namespace vega::pipeline
