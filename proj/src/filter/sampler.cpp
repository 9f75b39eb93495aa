#include "vega/filter/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "vega/core/error.hpp"

namespace vega::filter {

void SamplerConfig::validate() const {
  if (!(temperature > 0.0)) throw InvalidArgument("sampler: temperature must be > 0");
  if (std::none_of(sizes.begin(), sizes.end(), [](const auto& kv) { return kv.second > 0; })) {
    throw InvalidArgument("sampler: all corpus sizes are zero");
  }
}

std::map<std::string, double> sampling_probabilities(const SamplerConfig& config) {
  config.validate();
  std::map<std::string, double> out;
  double z = 0.0;
  for (const auto& [key, n] : config.sizes) {
    const double w = n == 0 ? 0.0 : std::exp(std::log(static_cast<double>(n)) / config.temperature);
    out[key] = w;
    z += w;
  }
  for (auto& [_, p] : out) p /= z;
  return out;
}

TemperatureSampler::TemperatureSampler(const SamplerConfig& config)
    : probs_(sampling_probabilities(config)) {
  double acc = 0.0;
  for (const auto& [key, p] : probs_) {
    if (p <= 0.0) continue;
    acc += p;
    keys_.push_back(key);
    cumulative_.push_back(acc);
  }
}

const std::string& TemperatureSampler::draw(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), keys_.size() - 1);
  return keys_[i];
}

std::map<std::string, std::uint64_t> temperature_sample(const SamplerConfig& config,
                                                        std::uint64_t total, std::uint64_t seed) {
  TemperatureSampler sampler(config);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& [key, _] : config.sizes) counts[key] = 0;
  Rng rng(seed);
  for (std::uint64_t i = 0; i < total; ++i) ++counts[sampler.draw(rng)];
  return counts;
}

}  // namespace vega::filter
