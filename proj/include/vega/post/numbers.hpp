#pragma once

#include <string>
#include <vector>

#include "vega/core/text.hpp"

namespace vega::post {

enum class SpanKind { integer, decimal, range_date };

std::string to_string(SpanKind kind);

/// A maximal run of consecutive digit-bearing tokens.
struct NumberSpan {
  std::string surface;  // tokens joined by single spaces
  std::string digits;   // sorted digit multiset
  std::size_t position = 0;
  std::size_t length = 1;
  SpanKind kind = SpanKind::integer;
};

std::vector<NumberSpan> extract_number_spans(const Sentence& tokens);

struct NumberChange {
  std::size_t position = 0;  // in the input hypothesis
  std::string before;
  std::string after;
  std::size_t source_position = 0;
};

struct RepairResult {
  Sentence tokens;
  std::vector<NumberChange> changes;
};

/// Replaces hypothesis number spans whose digit multiset equals that of an
/// unused source span but whose surface differs. Runs of spans joined by at
/// most one non-number token may match as one group ("2006 at 07" against
/// "2006-07"). Larger groups are matched first, then the nearest relative
/// position. Tokens without digits are never altered except connectors inside
/// a replaced group.
RepairResult repair_numbers(const Sentence& src, const Sentence& hyp);

/// Hypothesis spans whose surface occurs in no source span, plus source spans
/// whose surface occurs in no hypothesis span.
std::size_t count_number_mismatches(const Sentence& src, const Sentence& hyp);

}  // namespace vega::post
