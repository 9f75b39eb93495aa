#include "vega/model/config.hpp"

#include "vega/core/error.hpp"

namespace vega::model {

std::string to_string(Mode mode) { return mode == Mode::AT ? "AT" : "NAT"; }

Mode mode_from_string(const std::string& name) {
  if (name == "AT") return Mode::AT;
  if (name == "NAT") return Mode::NAT;
  throw InvalidArgument("unknown model mode '" + name + "'");
}

void ModelConfig::validate() const {
  if (layers < 1 || hidden < 1 || ffn < 1 || heads < 1 || vocab < 1 || length_offsets < 1) {
    throw InvalidArgument("model config: all counts must be >= 1");
  }
  if (hidden % heads != 0) {
    throw InvalidArgument("model config: hidden " + std::to_string(hidden) +
                          " not divisible by heads " + std::to_string(heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("model config: dropout not in [0,1)");
}

namespace {
ModelConfig preset(int layers, int hidden, int ffn, int heads, int vocab, Mode mode) {
  ModelConfig c;
  c.layers = layers;
  c.hidden = hidden;
  c.ffn = ffn;
  c.heads = heads;
  c.vocab = vocab;
  c.mode = mode;
  return c;
}
}  // namespace

ModelConfig ModelConfig::tiny(int vocab, Mode mode) { return preset(2, 64, 256, 4, vocab, mode); }
ModelConfig ModelConfig::small(int vocab, Mode mode) { return preset(4, 256, 1024, 8, vocab, mode); }
ModelConfig ModelConfig::base(int vocab, Mode mode) { return preset(6, 512, 2048, 8, vocab, mode); }
ModelConfig ModelConfig::big(int vocab, Mode mode) { return preset(6, 1024, 4096, 16, vocab, mode); }
ModelConfig ModelConfig::xl(int vocab, Mode mode) { return preset(24, 2048, 16384, 32, vocab, mode); }

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"layers", c.layers},   {"hidden", c.hidden},
                     {"ffn", c.ffn},         {"heads", c.heads},
                     {"vocab", c.vocab},     {"mode", to_string(c.mode)},
                     {"dropout", c.dropout}, {"length_offsets", c.length_offsets}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.layers = j.at("layers").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.ffn = j.at("ffn").get<int>();
  c.heads = j.at("heads").get<int>();
  c.vocab = j.at("vocab").get<int>();
  c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.dropout = j.at("dropout").get<double>();
  c.length_offsets = j.value("length_offsets", 20);
}

std::uint64_t count_parameters(const ModelConfig& c) {
  const std::uint64_t h = static_cast<std::uint64_t>(c.hidden);
  const std::uint64_t f = static_cast<std::uint64_t>(c.ffn);
  const std::uint64_t v = static_cast<std::uint64_t>(c.vocab);
  const std::uint64_t attention = 4 * (h * h + h);
  const std::uint64_t feed_forward = h * f + f + f * h + h;
  const std::uint64_t norm = 2 * h;
  const std::uint64_t encoder_layer = attention + feed_forward + 2 * norm;
  const std::uint64_t decoder_layer = 2 * attention + feed_forward + 3 * norm;
  std::uint64_t total = v * h  // tied source/target/output embedding
                        + static_cast<std::uint64_t>(c.layers) * (encoder_layer + decoder_layer) +
                        2 * norm;  // final encoder and decoder norms
  if (c.mode == Mode::NAT) {
    const auto k = static_cast<std::uint64_t>(c.length_classes());
    total += h * k + k;
  }
  return total;
}

}  // namespace vega::model
