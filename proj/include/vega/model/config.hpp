#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace vega::model {

enum class Mode { AT, NAT };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Architecture axes of the encoder-decoder. Encoder and decoder both have
/// `layers` blocks; source, target and output share one joint vocabulary.
struct ModelConfig {
  int layers = 2;
  int hidden = 64;
  int ffn = 256;
  int heads = 4;
  int vocab = 0;
  Mode mode = Mode::AT;
  double dropout = 0.1;
  /// NAT length classifier predicts offsets in [-K, K] relative to |src|.
  int length_offsets = 20;

  /// Throws InvalidArgument unless hidden % heads == 0, all counts >= 1 and
  /// dropout lies in [0, 1).
  void validate() const;

  int length_classes() const { return 2 * length_offsets + 1; }

  static ModelConfig tiny(int vocab, Mode mode = Mode::AT);
  static ModelConfig small(int vocab, Mode mode = Mode::AT);
  static ModelConfig base(int vocab, Mode mode = Mode::AT);
  static ModelConfig big(int vocab, Mode mode = Mode::AT);
  static ModelConfig xl(int vocab, Mode mode = Mode::AT);

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Exact number of scalar parameters a model with this config holds.
std::uint64_t count_parameters(const ModelConfig& config);

}  // namespace vega::model
