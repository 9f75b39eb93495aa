#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vega/corpus/corpus_io.hpp"
#include "vega/decode/translator.hpp"
#include "vega/model/config.hpp"
#include "vega/numerics/checkpoint.hpp"
#include "vega/train/config.hpp"

namespace vega::augment {

enum class TeacherKind { AT, NAT };

struct Teacher {
  decode::Translator translator;  // translator.id is the teacher id
  TeacherKind kind = TeacherKind::AT;
  int round = 1;
};

/// Forward teachers translate src_lang -> tgt_lang, backward ones the reverse.
struct TeacherSet {
  std::string src_lang;
  std::string tgt_lang;
  std::vector<Teacher> forward_at;
  std::vector<Teacher> backward_at;
  std::vector<Teacher> forward_nat;
  std::vector<Teacher> backward_nat;

  /// Throws InvalidState unless there are at_per_side AT and nat_per_side NAT
  /// teachers per side with distinct ids; InvalidArgument when a teacher's
  /// direction or kind does not match its slot.
  void validate(std::size_t at_per_side = 3, std::size_t nat_per_side = 1) const;
  std::size_t size() const;
};

/// One pass of every teacher over its side: forward teachers over para
/// sources plus mono_src, backward teachers over para targets plus mono_tgt,
/// with backward output flipped to src -> tgt. Yields
/// 4 * (|para| + |mono_src|) + 4 * (|para| + |mono_tgt|) pairs for the
/// default teacher counts. Throws InvalidArgument unless round >= 1.
std::vector<corpus::SentencePair> self_train_round(const TeacherSet& teachers,
                                                   const std::vector<corpus::SentencePair>& para,
                                                   const std::vector<Sentence>& mono_src,
                                                   const std::vector<Sentence>& mono_tgt, int round,
                                                   corpus::PipelineManifest* manifest = nullptr);

struct SelfTrainingConfig {
  int rounds = 2;
  std::size_t at_per_side = 3;
  std::size_t nat_per_side = 1;
  model::ModelConfig at_model;
  model::ModelConfig nat_model = [] {
    model::ModelConfig c;
    c.mode = model::Mode::NAT;
    return c;
  }();
  train::TrainConfig train;
  decode::DecodeOptions decode;
  std::uint64_t seed = 1;
  /// Teachers start from these weights when set (AT teachers only).
  std::optional<numerics::Checkpoint> forward_init;
  std::optional<numerics::Checkpoint> backward_init;
};

struct RoundReport {
  int round = 0;
  std::map<std::string, double> teacher_dev_bleu;  // AT teachers, forward and backward
  std::string best_forward;
  std::string best_backward;
  std::size_t training_pairs = 0;
  std::size_t synthetic = 0;
};

struct SelfTrainingResult {
  std::vector<corpus::SentencePair> corpus;  // authentic + last-round synthetic
  std::vector<RoundReport> rounds;
};

/// Round r trains AT teachers on authentic + round r-1 synthetic data (both
/// orientations), distils NAT teachers from the best AT teacher per side by
/// dev BLEU, then runs self_train_round. `dev` holds src -> tgt pairs; the
/// backward teachers are scored on it flipped.
SelfTrainingResult run_bidirectional_self_training(
    const SelfTrainingConfig& config, const std::string& src_lang, const std::string& tgt_lang,
    const std::vector<corpus::SentencePair>& para, const std::vector<Sentence>& mono_src,
    const std::vector<Sentence>& mono_tgt, const std::vector<corpus::SentencePair>& dev,
    std::shared_ptr<const subword::SubwordVocab> vocab, corpus::PipelineManifest* manifest = nullptr);

}  // namespace vega::augment
