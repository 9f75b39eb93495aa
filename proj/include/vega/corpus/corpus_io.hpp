#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vega/corpus/sentence_pair.hpp"

namespace vega::corpus {

/// Parallel corpus on disk: `<prefix>.src` and `<prefix>.tgt` hold one
/// sentence per line, `<prefix>.jsonl` holds one provenance record per line
/// (id, src_lang, tgt_lang, origin, and teacher_id / round when present).
void write_parallel(const std::string& prefix, const std::vector<SentencePair>& pairs);
std::vector<SentencePair> read_parallel(const std::string& prefix);

nlohmann::json provenance(const SentencePair& pair);

void write_monolingual(const std::string& path, const std::vector<Sentence>& sentences);
std::vector<Sentence> read_monolingual(const std::string& path);

/// Append-only JSON-lines log of corpus transformations.
class PipelineManifest {
 public:
  void append(nlohmann::json record);
  const std::vector<nlohmann::json>& records() const { return records_; }
  /// Records whose "stage" field equals `stage`.
  std::vector<nlohmann::json> stage(const std::string& stage) const;
  void write(const std::string& path) const;
  static PipelineManifest read(const std::string& path);

 private:
  std::vector<nlohmann::json> records_;
};

}  // namespace vega::corpus
