#include "vega/corpus/sentence_pair.hpp"

#include <utility>

#include "vega/core/error.hpp"

namespace vega::corpus {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::authentic:
      return "authentic";
    case Origin::synthetic_at:
      return "synthetic_at";
    case Origin::synthetic_nat:
      return "synthetic_nat";
    case Origin::cycle_translated:
      return "cycle_translated";
  }
  return "authentic";
}

Origin origin_from_string(std::string_view name) {
  if (name == "authentic") return Origin::authentic;
  if (name == "synthetic_at") return Origin::synthetic_at;
  if (name == "synthetic_nat") return Origin::synthetic_nat;
  if (name == "cycle_translated") return Origin::cycle_translated;
  throw InvalidArgument("unknown origin '" + std::string(name) + "'");
}

bool is_synthetic(Origin origin) {
  return origin == Origin::synthetic_at || origin == Origin::synthetic_nat;
}

void validate(const SentencePair& pair) {
  if (pair.origin == Origin::authentic) {
    if (pair.src.empty() || pair.tgt.empty()) {
      throw InvalidArgument("authentic pair " + pair.id + " has an empty side");
    }
    if (pair.teacher_id) throw InvalidArgument("authentic pair " + pair.id + " has a teacher");
  }
  if (is_synthetic(pair.origin) != pair.round.has_value()) {
    throw InvalidArgument("pair " + pair.id + ": round must be present iff origin is synthetic");
  }
}

SentencePair flipped(SentencePair pair) {
  std::swap(pair.src_lang, pair.tgt_lang);
  std::swap(pair.src, pair.tgt);
  return pair;
}

}  // namespace vega::corpus
