#include "vega/decode/beam.hpp"

#include <algorithm>
#include <cmath>

#include "vega/core/error.hpp"

namespace vega::decode {

void BeamConfig::validate() const {
  if (beam_size < 1) throw InvalidArgument("beam_size must be >= 1");
  if (!(length_penalty >= 0.0)) throw InvalidArgument("length_penalty must be >= 0");
  if (max_len < 0) throw InvalidArgument("max_len must be >= 0");
  if (max_len == 0 && !(max_len_factor > 0.0)) throw InvalidArgument("max_len_factor must be > 0");
}

int BeamConfig::max_length(std::size_t src_len) const {
  if (max_len > 0) return max_len;
  return static_cast<int>(std::ceil(max_len_factor * static_cast<double>(src_len))) + 5;
}

double normalized_score(double logprob, std::size_t length, double alpha) {
  if (length == 0) return logprob;
  return logprob / std::pow(static_cast<double>(length), alpha);
}

bool is_banned(TokenId id) { return id == subword::kPad || id == subword::kBos; }

namespace {

struct Live {
  std::vector<TokenId> tokens;
  double logprob = 0.0;
};

struct Candidate {
  double logprob;
  std::size_t parent;
  TokenId token;
};

Hypothesis finish(std::vector<TokenId> tokens, double logprob, bool eos, double alpha) {
  Hypothesis h;
  h.score = normalized_score(logprob, tokens.size() + (eos ? 1 : 0), alpha);
  h.tokens = std::move(tokens);
  h.logprob = logprob;
  h.finished = eos;
  return h;
}

bool better(const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; }

}  // namespace

Hypothesis beam_search(DecodeSession& session, std::size_t src_len, const BeamConfig& config,
                       TokenId start) {
  config.validate();
  if (src_len == 0) throw InvalidArgument("beam_search: empty source");
  const int max_len = config.max_length(src_len);
  const auto beam = static_cast<std::size_t>(config.beam_size);
  const double alpha = config.length_penalty;

  std::vector<Live> live(1);
  Tensor<float> logp = session.step({0}, {start});
  std::vector<Hypothesis> finished;

  for (int t = 1; t <= max_len && !live.empty(); ++t) {
    std::vector<Candidate> cands;
    cands.reserve(live.size() * static_cast<std::size_t>(logp.cols()));
    for (std::size_t h = 0; h < live.size(); ++h) {
      for (Index v = 0; v < logp.cols(); ++v) {
        if (is_banned(static_cast<TokenId>(v))) continue;
        cands.push_back({live[h].logprob + static_cast<double>(logp(static_cast<Index>(h), v)), h,
                         static_cast<TokenId>(v)});
      }
    }
    const std::size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Live> next;
    std::vector<std::size_t> parents;
    std::vector<TokenId> tokens;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& c = cands[i];
      if (c.token == subword::kEos) {
        finished.push_back(finish(live[c.parent].tokens, c.logprob, true, alpha));
        continue;
      }
      Live l{live[c.parent].tokens, c.logprob};
      l.tokens.push_back(c.token);
      if (t == max_len) {
        finished.push_back(finish(std::move(l.tokens), l.logprob, false, alpha));
        continue;
      }
      next.push_back(std::move(l));
      parents.push_back(c.parent);
      tokens.push_back(c.token);
    }
    live = std::move(next);
    if (!live.empty()) logp = session.step(parents, tokens);
  }
  // min_element keeps the earliest of equal scores
  return *std::min_element(finished.begin(), finished.end(),
                           [](const Hypothesis& a, const Hypothesis& b) { return better(a, b); });
}

Hypothesis greedy_decode(DecodeSession& session, std::size_t src_len, const BeamConfig& config,
                         TokenId start) {
  config.validate();
  if (src_len == 0) throw InvalidArgument("greedy_decode: empty source");
  const int max_len = config.max_length(src_len);
  std::vector<TokenId> out;
  double logprob = 0.0;
  Tensor<float> logp = session.step({0}, {start});
  for (int t = 1; t <= max_len; ++t) {
    TokenId best = -1;
    for (Index v = 0; v < logp.cols(); ++v) {
      if (is_banned(static_cast<TokenId>(v))) continue;
      if (best < 0 || logp(0, v) > logp(0, best)) best = static_cast<TokenId>(v);
    }
    logprob += static_cast<double>(logp(0, best));
    if (best == subword::kEos) return finish(std::move(out), logprob, true, config.length_penalty);
    out.push_back(best);
    if (t == max_len) break;
    logp = session.step({0}, {best});
  }
  return finish(std::move(out), logprob, false, config.length_penalty);
}

Hypothesis beam_search(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                       const BeamConfig& config, TokenId start) {
  if (src.empty()) throw InvalidArgument("beam_search: empty source");
  auto session = start_session(model, src);
  return beam_search(*session, src.size(), config, start);
}

Hypothesis greedy_decode(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                         const BeamConfig& config, TokenId start) {
  if (src.empty()) throw InvalidArgument("greedy_decode: empty source");
  auto session = start_session(model, src);
  return greedy_decode(*session, src.size(), config, start);
}

}  // namespace vega::decode
