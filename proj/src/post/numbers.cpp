#include "vega/post/numbers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>

namespace vega::post {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

SpanKind classify(const std::string& surface) {
  if (surface.find_first_of("-/") != std::string::npos) return SpanKind::range_date;
  const auto sep = surface.find_first_of(".,");
  if (sep == std::string::npos || surface.find(' ') != std::string::npos) return SpanKind::integer;
  const std::string head = surface.substr(0, sep);
  const std::string tail = surface.substr(sep + 1);
  const bool all_digits = !head.empty() && !tail.empty() && std::all_of(head.begin(), head.end(), is_digit) &&
                          std::all_of(tail.begin(), tail.end(), is_digit);
  if (all_digits && tail.size() == 3 && head.size() <= 3) return SpanKind::integer;
  return SpanKind::decimal;
}

std::string digits_of(const std::string& s) {
  std::string d;
  for (char c : s) {
    if (is_digit(c)) d += c;
  }
  std::sort(d.begin(), d.end());
  return d;
}

struct Group {
  std::size_t first_span = 0;
  std::size_t last_span = 0;
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;
  std::string digits;
  std::string surface;
};

double relative(std::size_t pos, std::size_t len) {
  return len <= 1 ? 0.0 : static_cast<double>(pos) / static_cast<double>(len - 1);
}

}  // namespace

std::string to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::integer:
      return "integer";
    case SpanKind::decimal:
      return "decimal";
    case SpanKind::range_date:
      return "range/date";
  }
  return "integer";
}

std::vector<NumberSpan> extract_number_spans(const Sentence& tokens) {
  std::vector<NumberSpan> spans;
  for (std::size_t i = 0; i < tokens.size();) {
    if (!has_digit(tokens[i])) {
      ++i;
      continue;
    }
    NumberSpan s;
    s.position = i;
    std::size_t j = i;
    while (j < tokens.size() && has_digit(tokens[j])) ++j;
    s.length = j - i;
    s.surface = join_words(Sentence(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(j)));
    s.digits = digits_of(s.surface);
    s.kind = classify(s.surface);
    spans.push_back(std::move(s));
    i = j;
  }
  return spans;
}

RepairResult repair_numbers(const Sentence& src, const Sentence& hyp) {
  RepairResult out;
  const auto src_spans = extract_number_spans(src);
  const auto hyp_spans = extract_number_spans(hyp);
  std::vector<bool> src_used(src_spans.size(), false);
  std::vector<bool> hyp_done(hyp_spans.size(), false);

  for (std::size_t h = 0; h < hyp_spans.size(); ++h) {
    for (std::size_t s = 0; s < src_spans.size(); ++s) {
      if (!src_used[s] && src_spans[s].surface == hyp_spans[h].surface) {
        src_used[s] = true;
        hyp_done[h] = true;
        break;
      }
    }
  }

  std::vector<Group> groups;
  for (std::size_t a = 0; a < hyp_spans.size(); ++a) {
    if (hyp_done[a]) continue;
    Group g{a, a, hyp_spans[a].position, hyp_spans[a].position + hyp_spans[a].length, hyp_spans[a].digits, {}};
    groups.push_back(g);
    for (std::size_t b = a + 1; b < hyp_spans.size() && b < a + 3; ++b) {
      if (hyp_done[b] || hyp_spans[b].position - g.end > 1) break;
      g.last_span = b;
      g.end = hyp_spans[b].position + hyp_spans[b].length;
      g.digits = digits_of(g.digits + hyp_spans[b].digits);
      groups.push_back(g);
    }
  }
  for (auto& g : groups) {
    g.surface = join_words(Sentence(hyp.begin() + static_cast<std::ptrdiff_t>(g.begin),
                                    hyp.begin() + static_cast<std::ptrdiff_t>(g.end)));
  }

  struct Match {
    std::size_t group;
    std::size_t source;
    std::size_t size;
    double distance;
  };
  std::vector<Match> matches;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (std::size_t s = 0; s < src_spans.size(); ++s) {
      if (src_used[s] || src_spans[s].digits != groups[gi].digits || src_spans[s].surface == groups[gi].surface) continue;
      matches.push_back({gi, s, groups[gi].digits.size(),
                         std::abs(relative(groups[gi].begin, hyp.size()) - relative(src_spans[s].position, src.size()))});
    }
  }
  std::stable_sort(matches.begin(), matches.end(), [](const Match& x, const Match& y) {
    if (x.size != y.size) return x.size > y.size;
    return x.distance < y.distance;
  });

  std::map<std::size_t, std::pair<std::size_t, std::size_t>> chosen;  // token begin -> (group, source)
  for (const auto& m : matches) {
    const auto& g = groups[m.group];
    if (src_used[m.source]) continue;
    bool free = true;
    for (std::size_t k = g.first_span; k <= g.last_span; ++k) free = free && !hyp_done[k];
    if (!free) continue;
    for (std::size_t k = g.first_span; k <= g.last_span; ++k) hyp_done[k] = true;
    src_used[m.source] = true;
    chosen[g.begin] = {m.group, m.source};
  }

  for (std::size_t i = 0; i < hyp.size();) {
    const auto it = chosen.find(i);
    if (it == chosen.end()) {
      out.tokens.push_back(hyp[i]);
      ++i;
      continue;
    }
    const auto& g = groups[it->second.first];
    const auto& s = src_spans[it->second.second];
    const auto replacement = split_words(s.surface);
    out.tokens.insert(out.tokens.end(), replacement.begin(), replacement.end());
    out.changes.push_back({g.begin, g.surface, s.surface, s.position});
    i = g.end;
  }
  return out;
}

std::size_t count_number_mismatches(const Sentence& src, const Sentence& hyp) {
  const auto s = extract_number_spans(src);
  const auto h = extract_number_spans(hyp);
  std::size_t n = 0;
  for (const auto& x : h) {
    n += std::none_of(s.begin(), s.end(), [&](const NumberSpan& y) { return y.surface == x.surface; });
  }
  for (const auto& y : s) {
    n += std::none_of(h.begin(), h.end(), [&](const NumberSpan& x) { return y.surface == x.surface; });
  }
  return n;
}

}  // namespace vega::post
