#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vega/core/text.hpp"

namespace vega::corpus {

enum class Origin { authentic, synthetic_at, synthetic_nat, cycle_translated };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view name);

/// One parallel example with provenance.
struct SentencePair {
  std::string id;
  std::string src_lang;
  std::string tgt_lang;
  Sentence src;
  Sentence tgt;
  Origin origin = Origin::authentic;
  std::optional<std::string> teacher_id;
  std::optional<int> round;

  bool operator==(const SentencePair&) const = default;
};

/// Throws InvalidArgument when the provenance invariants do not hold:
/// authentic pairs have non-empty sides and no teacher; round is present
/// exactly for synthetic origins.
void validate(const SentencePair& pair);

bool is_synthetic(Origin origin);

/// Swaps source and target (used when flipping backward-teacher output).
SentencePair flipped(SentencePair pair);

}  // namespace vega::corpus
