#include "vega/adapt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vega/core/error.hpp"

namespace vega::adapt {

namespace {

class EnsembleSession : public decode::DecodeSession {
 public:
  EnsembleSession(std::vector<std::unique_ptr<decode::DecodeSession>> members, Combine combine)
      : members_(std::move(members)), combine_(combine) {}

  int vocab_size() const override { return members_.front()->vocab_size(); }

  Tensor<float> step(const std::vector<std::size_t>& parents, const std::vector<TokenId>& tokens) override {
    std::vector<Tensor<float>> outs;
    outs.reserve(members_.size());
    for (auto& m : members_) outs.push_back(m->step(parents, tokens));
    return combine_log_probs(outs, combine_);
  }

 private:
  std::vector<std::unique_ptr<decode::DecodeSession>> members_;
  Combine combine_;
};

}  // namespace

Tensor<float> combine_log_probs(const std::vector<Tensor<float>>& members, Combine combine) {
  if (members.empty()) throw InvalidArgument("combine_log_probs: no members");
  const Index rows = members.front().rows();
  const Index cols = members.front().cols();
  for (const auto& m : members) {
    if (m.rows() != rows || m.cols() != cols) throw InvalidArgument("combine_log_probs: shape mismatch");
  }
  const auto n = static_cast<double>(members.size());
  Tensor<float> result(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    Eigen::RowVectorXd combined = Eigen::RowVectorXd::Zero(cols);
    if (combine == Combine::log_probability) {
      for (const auto& m : members) combined += m.row(r).cast<double>();
      combined /= n;
    } else {
      Eigen::RowVectorXd top = members.front().row(r).cast<double>();
      for (const auto& m : members) top = top.cwiseMax(m.row(r).cast<double>());
      for (const auto& m : members) combined += (m.row(r).cast<double>() - top).array().exp().matrix();
      combined = ((combined.array() / n).log() + top.array()).matrix();
    }
    const double peak = combined.maxCoeff();
    const double lse = peak + std::log((combined.array() - peak).exp().sum());
    result.row(r) = (combined.array() - lse).cast<float>().matrix();
  }
  return result;
}

std::string to_string(Combine combine) {
  return combine == Combine::probability ? "probability" : "log_probability";
}

Combine combine_from_string(const std::string& name) {
  if (name == "probability") return Combine::probability;
  if (name == "log_probability") return Combine::log_probability;
  throw InvalidArgument("unknown ensemble combination '" + name + "'");
}

void to_json(nlohmann::json& j, const EnsembleSpec& spec) {
  j = {{"members", spec.members}, {"combine", to_string(spec.combine)}};
}

void from_json(const nlohmann::json& j, EnsembleSpec& spec) {
  spec.members = j.at("members").get<std::vector<std::string>>();
  spec.combine = combine_from_string(j.value("combine", std::string("probability")));
}

std::unique_ptr<decode::DecodeSession> ensemble_session(const std::vector<ModelPtr>& members,
                                                        const std::vector<TokenId>& src, Combine combine) {
  if (members.empty()) throw InvalidArgument("ensemble: no members");
  std::vector<std::unique_ptr<decode::DecodeSession>> sessions;
  for (const auto& m : members) {
    if (!m) throw InvalidArgument("ensemble: null member");
    if (m->config().mode != model::Mode::AT) throw InvalidArgument("ensemble: members must be AT models");
    if (m->config().vocab != members.front()->config().vocab) throw InvalidArgument("ensemble: vocabulary mismatch");
    sessions.push_back(decode::start_session(*m, src));
  }
  return std::make_unique<EnsembleSession>(std::move(sessions), combine);
}

decode::Hypothesis ensemble_decode(const std::vector<ModelPtr>& members, const std::vector<TokenId>& src,
                                   const decode::BeamConfig& beam, Combine combine) {
  if (src.empty()) throw InvalidArgument("ensemble_decode: empty source");
  auto session = ensemble_session(members, src, combine);
  return decode::beam_search(*session, src.size(), beam, subword::kBos);
}

std::vector<ModelPtr> resolve(const EnsembleSpec& spec, const std::vector<Candidate>& candidates) {
  std::vector<ModelPtr> out;
  for (const auto& id : spec.members) {
    const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.id == id; });
    if (it == candidates.end()) throw NotFound("ensemble member '" + id + "' is not a candidate");
    out.push_back(it->model);
  }
  return out;
}

decode::Translator ensemble_translator(const std::vector<ModelPtr>& members,
                                       std::shared_ptr<const subword::SubwordVocab> vocab,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const decode::DecodeOptions& options, Combine combine) {
  if (members.empty()) throw InvalidArgument("ensemble: no members");
  for (const auto& m : members) {
    if (!m || m->config().vocab != static_cast<int>(vocab->size())) {
      throw InvalidArgument("ensemble: member vocabulary does not match");
    }
  }
  return decode::session_translator(
      "ensemble", [members, combine](const std::vector<TokenId>& src) { return ensemble_session(members, src, combine); },
      std::move(vocab), src_lang, tgt_lang, options);
}

Selection greedy_select(const std::vector<Candidate>& candidates, const std::vector<corpus::SentencePair>& dev,
                        std::shared_ptr<const subword::SubwordVocab> vocab, std::size_t max_size,
                        const decode::DecodeOptions& options, Combine combine) {
  if (candidates.empty()) throw InvalidArgument("greedy_select: no candidates");
  if (dev.empty()) throw InvalidArgument("greedy_select: empty dev set");
  if (max_size < 1) throw InvalidArgument("greedy_select: max_size must be >= 1");
  const auto& src_lang = dev.front().src_lang;
  const auto& tgt_lang = dev.front().tgt_lang;

  Selection sel;
  sel.spec.combine = combine;
  auto score = [&](const std::vector<std::string>& ids) {
    EnsembleSpec spec{ids, combine};
    const auto t = ensemble_translator(resolve(spec, candidates), vocab, src_lang, tgt_lang, options, combine);
    const double bleu = decode::evaluate_bleu(t, dev).score;
    sel.log.push_back({ids, bleu, false});
    return std::make_pair(bleu, sel.log.size() - 1);
  };

  double best = -1;
  std::size_t best_entry = 0;
  for (const auto& c : candidates) {
    const auto [b, entry] = score({c.id});
    if (b > best) {
      best = b;
      best_entry = entry;
    }
  }
  sel.log[best_entry].accepted = true;
  sel.spec.members = sel.log[best_entry].members;
  sel.best_single_bleu = best;

  while (sel.spec.members.size() < max_size) {
    double round_best = -1;
    std::size_t round_entry = 0;
    for (const auto& c : candidates) {
      if (std::find(sel.spec.members.begin(), sel.spec.members.end(), c.id) != sel.spec.members.end()) continue;
      auto ids = sel.spec.members;
      ids.push_back(c.id);
      const auto [b, entry] = score(ids);
      if (b > round_best) {
        round_best = b;
        round_entry = entry;
      }
    }
    if (!(round_best > best)) break;
    best = round_best;
    sel.log[round_entry].accepted = true;
    sel.spec.members = sel.log[round_entry].members;
  }
  sel.dev_bleu = best;
  return sel;
}

}  // namespace vega::adapt
