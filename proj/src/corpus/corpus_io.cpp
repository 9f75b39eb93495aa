#include "vega/corpus/corpus_io.hpp"

#include <fstream>

#include "vega/core/error.hpp"

namespace vega::corpus {

nlohmann::json provenance(const SentencePair& pair) {
  nlohmann::json j;
  j["id"] = pair.id;
  j["src_lang"] = pair.src_lang;
  j["tgt_lang"] = pair.tgt_lang;
  j["origin"] = std::string(to_string(pair.origin));
  if (pair.teacher_id) j["teacher_id"] = *pair.teacher_id;
  if (pair.round) j["round"] = *pair.round;
  return j;
}

void write_parallel(const std::string& prefix, const std::vector<SentencePair>& pairs) {
  std::vector<std::string> src, tgt, meta;
  src.reserve(pairs.size());
  tgt.reserve(pairs.size());
  meta.reserve(pairs.size());
  for (const auto& p : pairs) {
    src.push_back(join_words(p.src));
    tgt.push_back(join_words(p.tgt));
    meta.push_back(provenance(p).dump());
  }
  write_lines(prefix + ".src", src);
  write_lines(prefix + ".tgt", tgt);
  write_lines(prefix + ".jsonl", meta);
}

std::vector<SentencePair> read_parallel(const std::string& prefix) {
  const auto src = read_lines(prefix + ".src");
  const auto tgt = read_lines(prefix + ".tgt");
  const auto meta = read_lines(prefix + ".jsonl");
  if (src.size() != tgt.size() || src.size() != meta.size()) {
    throw InvalidArgument("corpus " + prefix + ": src/tgt/manifest line counts differ");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto j = nlohmann::json::parse(meta[i]);
    SentencePair p;
    p.id = j.at("id").get<std::string>();
    p.src_lang = j.at("src_lang").get<std::string>();
    p.tgt_lang = j.at("tgt_lang").get<std::string>();
    p.origin = origin_from_string(j.at("origin").get<std::string>());
    if (j.contains("teacher_id")) p.teacher_id = j["teacher_id"].get<std::string>();
    if (j.contains("round")) p.round = j["round"].get<int>();
    p.src = split_words(src[i]);
    p.tgt = split_words(tgt[i]);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_monolingual(const std::string& path, const std::vector<Sentence>& sentences) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) lines.push_back(join_words(s));
  write_lines(path, lines);
}

std::vector<Sentence> read_monolingual(const std::string& path) {
  std::vector<Sentence> out;
  for (const auto& line : read_lines(path)) out.push_back(split_words(line));
  return out;
}

void PipelineManifest::append(nlohmann::json record) { records_.push_back(std::move(record)); }

std::vector<nlohmann::json> PipelineManifest::stage(const std::string& stage) const {
  std::vector<nlohmann::json> out;
  for (const auto& r : records_) {
    if (r.value("stage", "") == stage) out.push_back(r);
  }
  return out;
}

void PipelineManifest::write(const std::string& path) const {
  std::vector<std::string> lines;
  for (const auto& r : records_) lines.push_back(r.dump());
  write_lines(path, lines);
}

PipelineManifest PipelineManifest::read(const std::string& path) {
  PipelineManifest m;
  for (const auto& line : read_lines(path)) {
    if (!line.empty()) m.append(nlohmann::json::parse(line));
  }
  return m;
}

}  // namespace vega::corpus
