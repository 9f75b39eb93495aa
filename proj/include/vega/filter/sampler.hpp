#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vega/core/random.hpp"

namespace vega::filter {

/// Corpus sizes per language pair and the sampling temperature.
struct SamplerConfig {
  double temperature = 5.0;
  std::map<std::string, std::uint64_t> sizes;

  /// Throws InvalidArgument unless T > 0 and some size is positive.
  void validate() const;
};

/// p_i = n_i^(1/T) / sum_j n_j^(1/T).
std::map<std::string, double> sampling_probabilities(const SamplerConfig& config);

/// Draws one key at a time according to sampling_probabilities.
class TemperatureSampler {
 public:
  explicit TemperatureSampler(const SamplerConfig& config);

  const std::string& draw(Rng& rng) const;
  const std::map<std::string, double>& probabilities() const { return probs_; }

 private:
  std::map<std::string, double> probs_;
  std::vector<std::string> keys_;
  std::vector<double> cumulative_;
};

/// Allocates `total` draws across pairs; the counts sum to total.
std::map<std::string, std::uint64_t> temperature_sample(const SamplerConfig& config,
                                                        std::uint64_t total, std::uint64_t seed);

}  // namespace vega::filter
