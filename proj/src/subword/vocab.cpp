#include "vega/subword/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vega/core/error.hpp"
#include "vega/core/random.hpp"

namespace vega::subword {

namespace {

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> kSpecials = {"<pad>", "<s>", "</s>", "<unk>"};
  return kSpecials;
}

std::string merge_key(const std::string& a, const std::string& b) { return a + '\x1f' + b; }

std::vector<std::string> initial_symbols(const std::string& word) {
  std::vector<std::string> symbols = utf8_chars(word);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

using PairCounts = std::map<Merge, long long>;

void add_pairs(PairCounts& counts, const std::vector<std::string>& symbols, long long freq) {
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
    auto& c = counts[{symbols[i], symbols[i + 1]}];
    c += freq;
    if (c == 0) counts.erase({symbols[i], symbols[i + 1]});
  }
}

bool contains_pair(const std::vector<std::string>& symbols, const Merge& m) {
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
    if (symbols[i] == m.first && symbols[i + 1] == m.second) return true;
  }
  return false;
}

void apply_merge(std::vector<std::string>& symbols, const Merge& m) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == m.first && symbols[i + 1] == m.second) {
      out.push_back(m.first + m.second);
      ++i;
    } else {
      out.push_back(symbols[i]);
    }
  }
  symbols = std::move(out);
}

}  // namespace

std::string language_token(const std::string& lang) { return "<" + lang + ">"; }

SubwordVocab::SubwordVocab(std::vector<std::string> tokens,
                           std::vector<std::string> language_tokens, std::vector<Merge> merges)
    : tokens_(std::move(tokens)),
      language_tokens_(std::move(language_tokens)),
      merges_(std::move(merges)) {
  if (tokens_.size() < kSpecialCount ||
      !std::equal(special_tokens().begin(), special_tokens().end(), tokens_.begin())) {
    throw InvalidArgument("vocabulary must start with <pad> <s> </s> <unk>");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
  for (const auto& tag : language_tokens_) {
    if (!index_.count(tag)) throw InvalidArgument("language token " + tag + " missing from vocab");
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    merge_rank_.emplace(merge_key(merges_[r].first, merges_[r].second), r);
  }
}

const std::string& SubwordVocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> SubwordVocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::is_language_token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) return false;
  const auto& tok = tokens_[static_cast<std::size_t>(id)];
  return std::find(language_tokens_.begin(), language_tokens_.end(), tok) !=
         language_tokens_.end();
}

TokenId SubwordVocab::language_id(const std::string& lang) const {
  const std::string tag = (!lang.empty() && lang.front() == '<') ? lang : language_token(lang);
  if (std::find(language_tokens_.begin(), language_tokens_.end(), tag) == language_tokens_.end()) {
    throw InvalidArgument("unknown language token " + tag);
  }
  return index_.at(tag);
}

std::vector<std::string> SubwordVocab::segment(const std::string& word) const {
  std::vector<std::string> symbols = initial_symbols(word);
  while (symbols.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find(merge_key(symbols[i], symbols[i + 1]));
      if (it != merge_rank_.end()) best_rank = std::min(best_rank, it->second);
    }
    if (best_rank == merges_.size()) break;
    apply_merge(symbols, merges_[best_rank]);
  }
  return symbols;
}

std::vector<TokenId> SubwordVocab::encode(const Sentence& sentence,
                                          const std::optional<std::string>& lang_token) const {
  std::vector<TokenId> ids;
  if (lang_token) ids.push_back(language_id(*lang_token));
  for (const auto& word : sentence) {
    for (const auto& piece : segment(word)) {
      auto it = index_.find(piece);
      ids.push_back(it == index_.end() ? kUnk : it->second);
    }
  }
  return ids;
}

Sentence SubwordVocab::decode(const std::vector<TokenId>& ids) const {
  Sentence out;
  std::string word;
  const std::string eow = kEndOfWord;
  for (TokenId id : ids) {
    const std::string& piece = token(id);
    if (id == kUnk) {
      word += piece;
      continue;
    }
    if (is_special(id) || is_language_token(id)) continue;
    if (piece.size() >= eow.size() && piece.compare(piece.size() - eow.size(), eow.size(), eow) == 0) {
      word.append(piece, 0, piece.size() - eow.size());
      out.push_back(std::move(word));
      word.clear();
    } else {
      word += piece;
    }
  }
  if (!word.empty()) out.push_back(std::move(word));
  return out;
}

void SubwordVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFound("cannot write " + path);
  out << "# vega subword vocabulary v1\n";
  out << "tokens " << tokens_.size() << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\n';
  out << "language_tokens " << language_tokens_.size() << '\n';
  for (const auto& t : language_tokens_) out << t << '\n';
  out << "merges " << merges_.size() << '\n';
  for (const auto& [a, b] : merges_) out << a << '\t' << b << '\n';
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t pos = 0;
  auto expect_header = [&](const std::string& name) {
    while (pos < lines.size() && (lines[pos].empty() || lines[pos][0] == '#')) ++pos;
    if (pos >= lines.size() || lines[pos].rfind(name + " ", 0) != 0) {
      throw InvalidArgument(path + ": expected section '" + name + "'");
    }
    return static_cast<std::size_t>(std::stoull(lines[pos++].substr(name.size() + 1)));
  };
  auto tab_split = [&](const std::string& line) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InvalidArgument(path + ": malformed line '" + line + "'");
    return std::pair{line.substr(0, tab), line.substr(tab + 1)};
  };
  const std::size_t n_tokens = expect_header("tokens");
  std::vector<std::string> tokens(n_tokens);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    auto [tok, id] = tab_split(lines.at(pos++));
    const auto idx = static_cast<std::size_t>(std::stoull(id));
    if (idx >= n_tokens) throw InvalidArgument(path + ": id out of range");
    tokens[idx] = tok;
  }
  const std::size_t n_lang = expect_header("language_tokens");
  std::vector<std::string> langs;
  for (std::size_t i = 0; i < n_lang; ++i) langs.push_back(lines.at(pos++));
  const std::size_t n_merges = expect_header("merges");
  std::vector<Merge> merges;
  for (std::size_t i = 0; i < n_merges; ++i) merges.push_back(tab_split(lines.at(pos++)));
  return SubwordVocab(std::move(tokens), std::move(langs), std::move(merges));
}

SubwordVocab train_bpe(const std::vector<Sentence>& corpus, std::size_t merge_ops,
                       const std::vector<std::string>& reserved) {
  std::map<std::string, long long> word_freq;
  for (const auto& sentence : corpus) {
    for (const auto& word : sentence) ++word_freq[word];
  }
  if (word_freq.empty()) throw InvalidArgument("train_bpe: empty corpus");

  std::vector<std::vector<std::string>> words;
  std::vector<long long> freqs;
  std::set<std::string> base;
  for (const auto& [word, freq] : word_freq) {
    words.push_back(initial_symbols(word));
    freqs.push_back(freq);
    base.insert(words.back().begin(), words.back().end());
  }

  PairCounts counts;
  for (std::size_t w = 0; w < words.size(); ++w) add_pairs(counts, words[w], freqs[w]);

  std::vector<Merge> merges;
  while (merges.size() < merge_ops && !counts.empty()) {
    // std::map iterates pairs in lexicographic order, so the first maximum
    // wins ties.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const Merge m = best->first;
    merges.push_back(m);
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (!contains_pair(words[w], m)) continue;
      add_pairs(counts, words[w], -freqs[w]);
      apply_merge(words[w], m);
      add_pairs(counts, words[w], freqs[w]);
    }
  }

  std::vector<std::string> tokens = special_tokens();
  std::set<std::string> seen(tokens.begin(), tokens.end());
  auto add_token = [&](const std::string& t) {
    if (seen.insert(t).second) tokens.push_back(t);
  };
  std::vector<std::string> langs;
  for (const auto& r : reserved) {
    add_token(r);
    if (std::find(langs.begin(), langs.end(), r) == langs.end()) langs.push_back(r);
  }
  for (const auto& b : base) add_token(b);
  for (const auto& [a, b] : merges) add_token(a + b);
  return SubwordVocab(std::move(tokens), std::move(langs), std::move(merges));
}

numerics::Tensor<float> rebind_embeddings(const SubwordVocab& pt_vocab,
                                          const SubwordVocab& ft_vocab,
                                          const numerics::Tensor<float>& pt_embeddings,
                                          std::uint64_t seed) {
  if (static_cast<std::size_t>(pt_embeddings.rows()) != pt_vocab.size()) {
    throw InvalidArgument("rebind_embeddings: table has " + std::to_string(pt_embeddings.rows()) +
                          " rows for a vocabulary of " + std::to_string(pt_vocab.size()));
  }
  const auto width = pt_embeddings.cols();
  const double stddev = 1.0 / std::sqrt(static_cast<double>(width));
  numerics::Tensor<float> out(static_cast<numerics::Index>(ft_vocab.size()), width);
  Rng rng(seed);
  for (std::size_t i = 0; i < ft_vocab.size(); ++i) {
    const auto row = static_cast<numerics::Index>(i);
    if (auto src = pt_vocab.find(ft_vocab.tokens()[i])) {
      out.row(row) = pt_embeddings.row(*src);
    } else {
      for (numerics::Index c = 0; c < width; ++c) {
        out(row, c) = static_cast<float>(rng.normal(0.0, stddev));
      }
    }
  }
  return out;
}

}  // namespace vega::subword
