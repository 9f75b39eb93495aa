#include "vega/corpus/toy_language.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string_view>
#include <unordered_set>

#include "vega/core/error.hpp"
#include "vega/core/random.hpp"

namespace vega::corpus {

namespace {

constexpr std::string_view kConsonants = "bcdfghjklmnpqrstvwxyz";
constexpr std::string_view kVowels = "aeiou";

std::uint64_t hash_id(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string pick_letters(Rng& rng, std::string_view pool, std::size_t count) {
  std::string letters(pool);
  rng.shuffle(std::span<char>(letters.data(), letters.size()));
  letters.resize(count);
  std::sort(letters.begin(), letters.end());
  return letters;
}

std::string format_literal(Rng& rng, const NumberFormat& fmt) {
  switch (rng.index(3)) {
    case 0: {
      const auto value = 1 + rng.index(9999);
      std::string digits = std::to_string(value);
      if (value >= 1000) digits.insert(digits.size() - 3, 1, fmt.group_separator);
      return digits;
    }
    case 1:
      return std::to_string(1 + rng.index(99)) + fmt.decimal_mark + std::to_string(rng.index(10));
    default: {
      const auto year = 1950 + rng.index(75);
      const auto part = 1 + rng.index(12);
      std::string tail = std::to_string(part);
      if (tail.size() == 1) tail.insert(tail.begin(), '0');
      return std::to_string(year) + fmt.date_separator + tail;
    }
  }
}

int sample_concept(Rng& rng, std::size_t first, std::size_t limit, Category want) {
  // Concept ids cycle noun, noun, verb, adjective.
  const std::size_t blocks = limit / 4;
  const std::size_t block = first / 4 + rng.index(blocks);
  switch (want) {
    case Category::noun:
      return static_cast<int>(block * 4 + rng.index(2));
    case Category::verb:
      return static_cast<int>(block * 4 + 2);
    case Category::adjective:
      return static_cast<int>(block * 4 + 3);
  }
  return 0;
}

}  // namespace

Category category_of(int concept_id) {
  switch (concept_id % 4) {
    case 2:
      return Category::verb;
    case 3:
      return Category::adjective;
    default:
      return Category::noun;
  }
}

ToyLanguage::ToyLanguage(std::string id, std::vector<std::string> lexicon, WordOrder order,
                         NumberFormat numbers, PunctuationSet punctuation)
    : id_(std::move(id)),
      lexicon_(std::move(lexicon)),
      order_(order),
      numbers_(numbers),
      punctuation_(std::move(punctuation)) {
  for (std::size_t i = 0; i < lexicon_.size(); ++i) {
    if (!reverse_.emplace(lexicon_[i], static_cast<int>(i)).second) {
      throw InvalidArgument("lexicon of " + id_ + " is not bijective at '" + lexicon_[i] + "'");
    }
  }
  if (punctuation_.sentence_final.empty()) {
    throw InvalidArgument("language " + id_ + " needs a sentence-final glyph");
  }
}

const std::string& ToyLanguage::token(int concept_id) const {
  if (concept_id < 0 || static_cast<std::size_t>(concept_id) >= lexicon_.size()) {
    throw InvalidArgument("concept " + std::to_string(concept_id) + " outside lexicon of " + id_);
  }
  return lexicon_[static_cast<std::size_t>(concept_id)];
}

std::optional<int> ToyLanguage::concept_of(const std::string& token) const {
  auto it = reverse_.find(token);
  if (it == reverse_.end()) return std::nullopt;
  return it->second;
}

bool ToyLanguage::is_punctuation(const std::string& token) const {
  return token == punctuation_.sentence_final || token == punctuation_.clause_separator;
}

bool ToyLanguage::operator==(const ToyLanguage& other) const {
  return id_ == other.id_ && lexicon_ == other.lexicon_ && order_ == other.order_ &&
         numbers_.decimal_mark == other.numbers_.decimal_mark &&
         numbers_.group_separator == other.numbers_.group_separator &&
         numbers_.date_separator == other.numbers_.date_separator &&
         punctuation_.sentence_final == other.punctuation_.sentence_final &&
         punctuation_.open_quote == other.punctuation_.open_quote;
}

std::vector<int> ConceptSentence::concepts() const {
  std::vector<int> out;
  for (const auto& clause : clauses) {
    for (const auto& np : clause.phrases) {
      out.insert(out.end(), np.adjectives.begin(), np.adjectives.end());
      out.push_back(np.noun);
    }
    out.insert(out.end(), clause.verbs.begin(), clause.verbs.end());
  }
  return out;
}

std::vector<std::string> ConceptSentence::literals() const {
  std::vector<std::string> out;
  for (const auto& clause : clauses) {
    for (const auto& np : clause.phrases) {
      if (np.literal) out.push_back(*np.literal);
    }
  }
  return out;
}

ToyLanguage generate_language(std::uint64_t seed, const std::string& id,
                              std::size_t concept_vocab_size) {
  if (concept_vocab_size < 10) {
    throw InvalidArgument("generate_language: concept_vocab_size must be >= 10, got " +
                          std::to_string(concept_vocab_size));
  }
  Rng rng(mix_seed(seed, hash_id(id)));
  const std::string consonants = pick_letters(rng, kConsonants, 8);
  const std::string vowels = pick_letters(rng, kVowels, 3);

  std::vector<std::string> syllables;
  for (char c : consonants) {
    for (char v : vowels) syllables.push_back(std::string{c, v});
  }
  // Enough syllables per word that the lexicon occupies a small share of the
  // word space, which keeps lexicons of different languages nearly disjoint.
  std::size_t min_syllables = 2;
  while (std::pow(static_cast<double>(syllables.size()), static_cast<double>(min_syllables)) <
         8.0 * static_cast<double>(concept_vocab_size)) {
    ++min_syllables;
  }

  std::vector<std::string> lexicon;
  lexicon.reserve(concept_vocab_size);
  std::unordered_set<std::string> seen;
  while (lexicon.size() < concept_vocab_size) {
    const std::size_t n = min_syllables + rng.index(2);
    std::string word;
    for (std::size_t s = 0; s < n; ++s) word += syllables[rng.index(syllables.size())];
    if (seen.insert(word).second) lexicon.push_back(std::move(word));
  }

  const auto order = static_cast<WordOrder>(rng.index(3));
  NumberFormat numbers;
  if (rng.bernoulli(0.5)) {
    numbers.decimal_mark = ',';
    numbers.group_separator = '.';
  }
  constexpr char kDateSeparators[] = {'-', '/', '.'};
  numbers.date_separator = kDateSeparators[rng.index(3)];

  PunctuationSet punct;
  static const std::vector<std::string> kFinals = {".", ".", "\xE3\x80\x82", "\xEF\xBC\x8E"};
  punct.sentence_final = kFinals[rng.index(kFinals.size())];
  return ToyLanguage(id, std::move(lexicon), order, numbers, punct);
}

std::vector<ToyLanguage> generate_language_family(std::uint64_t seed,
                                                  std::size_t concept_vocab_size) {
  std::vector<ToyLanguage> family;
  for (const char* id : {"E", "L1", "L2", "L3", "L4", "L5"}) {
    family.push_back(generate_language(seed, id, concept_vocab_size));
  }
  return family;
}

ConceptSentence sample_concept_sentence(std::uint64_t seed, std::size_t concept_count,
                                        const NumberFormat& numbers,
                                        const GenerationOptions& options) {
  Rng rng(seed);
  const std::size_t first = options.concept_offset - options.concept_offset % 4;
  if (first >= concept_count) throw InvalidArgument("sample_concept_sentence: concept_offset out of range");
  const std::size_t available = concept_count - first;
  std::size_t limit = options.concept_limit ? std::min(options.concept_limit, available) : available;
  if (limit < 4) throw InvalidArgument("sample_concept_sentence: need at least 4 concepts");
  const int span = options.max_clauses - options.min_clauses + 1;
  const int clauses = options.min_clauses + static_cast<int>(rng.index(static_cast<std::uint64_t>(span)));
  ConceptSentence meaning;
  for (int c = 0; c < clauses; ++c) {
    Clause clause;
    for (int p = 0; p < 2; ++p) {
      NounPhrase np;
      const auto adjs = rng.index(static_cast<std::uint64_t>(options.max_adjectives) + 1);
      for (std::uint64_t a = 0; a < adjs; ++a) {
        np.adjectives.push_back(sample_concept(rng, first, limit, Category::adjective));
      }
      np.noun = sample_concept(rng, first, limit, Category::noun);
      clause.phrases.push_back(std::move(np));
    }
    clause.verbs.push_back(sample_concept(rng, first, limit, Category::verb));
    meaning.clauses.push_back(std::move(clause));
  }
  if (rng.bernoulli(options.literal_rate)) {
    auto& clause = meaning.clauses[rng.index(meaning.clauses.size())];
    clause.phrases[rng.index(clause.phrases.size())].literal = format_literal(rng, numbers);
  }
  return meaning;
}

Sentence realize(const ToyLanguage& lang, const ConceptSentence& meaning) {
  Sentence out;
  auto emit_phrase = [&](const NounPhrase& np) {
    if (np.literal) out.push_back(*np.literal);
    for (int a : np.adjectives) out.push_back(lang.token(a));
    out.push_back(lang.token(np.noun));
  };
  auto emit_verbs = [&](const Clause& clause) {
    for (int v : clause.verbs) out.push_back(lang.token(v));
  };
  bool first = true;
  for (const auto& clause : meaning.clauses) {
    if (clause.phrases.empty() && clause.verbs.empty()) continue;
    if (!first) out.push_back(lang.punctuation().clause_separator);
    first = false;
    const auto& phrases = clause.phrases;
    switch (lang.word_order()) {
      case WordOrder::SVO:
        if (!phrases.empty()) emit_phrase(phrases[0]);
        emit_verbs(clause);
        for (std::size_t i = 1; i < phrases.size(); ++i) emit_phrase(phrases[i]);
        break;
      case WordOrder::SOV:
        for (const auto& np : phrases) emit_phrase(np);
        emit_verbs(clause);
        break;
      case WordOrder::VSO:
        emit_verbs(clause);
        for (const auto& np : phrases) emit_phrase(np);
        break;
    }
  }
  out.push_back(lang.punctuation().sentence_final);
  return out;
}

ConceptSentence parse(const ToyLanguage& lang, const Sentence& tokens) {
  ConceptSentence meaning;
  Clause clause;
  NounPhrase pending;
  auto close_clause = [&] {
    if (!clause.phrases.empty() || !clause.verbs.empty()) meaning.clauses.push_back(clause);
    clause = Clause{};
    pending = NounPhrase{};
  };
  for (const auto& tok : tokens) {
    if (tok == lang.punctuation().clause_separator) {
      close_clause();
      continue;
    }
    if (tok == lang.punctuation().sentence_final) continue;
    if (has_digit(tok)) {
      pending.literal = tok;
      continue;
    }
    const auto concept_id = lang.concept_of(tok);
    if (!concept_id) throw UnknownToken(tok);
    switch (category_of(*concept_id)) {
      case Category::verb:
        clause.verbs.push_back(*concept_id);
        break;
      case Category::adjective:
        pending.adjectives.push_back(*concept_id);
        break;
      case Category::noun:
        pending.noun = *concept_id;
        clause.phrases.push_back(pending);
        pending = NounPhrase{};
        break;
    }
  }
  close_clause();
  return meaning;
}

bool is_well_formed(const ToyLanguage& lang, const Sentence& tokens) {
  try {
    const ConceptSentence meaning = parse(lang, tokens);
    for (const auto& clause : meaning.clauses) {
      if (clause.phrases.size() != 2 || clause.verbs.size() != 1) return false;
    }
    return !meaning.clauses.empty() && realize(lang, meaning) == tokens;
  } catch (const UnknownToken&) {
    return false;
  }
}

Sentence ground_truth_translate(const ToyLanguage& from, const ToyLanguage& to,
                                const Sentence& tokens) {
  if (from.id() == to.id()) {
    for (const auto& tok : tokens) {
      if (!has_digit(tok) && !from.is_punctuation(tok) && !from.concept_of(tok)) {
        throw UnknownToken(tok);
      }
    }
    return tokens;
  }
  return realize(to, parse(from, tokens));
}

std::vector<SentencePair> generate_parallel(const ToyLanguage& a, const ToyLanguage& b,
                                            std::size_t n, std::uint64_t seed,
                                            const GenerationOptions& options) {
  if (a.concept_count() != b.concept_count()) {
    throw InvalidArgument("generate_parallel: languages have different concept spaces");
  }
  std::vector<SentencePair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ConceptSentence meaning =
        sample_concept_sentence(mix_seed(seed, i), a.concept_count(), a.number_format(), options);
    SentencePair p;
    p.id = a.id() + "-" + b.id() + "-" + std::to_string(seed) + "-" + std::to_string(i);
    p.src_lang = a.id();
    p.tgt_lang = b.id();
    p.src = realize(a, meaning);
    p.tgt = realize(b, meaning);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<Sentence> generate_monolingual(const ToyLanguage& lang, std::size_t n,
                                           std::uint64_t seed, const GenerationOptions& options) {
  std::vector<Sentence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(realize(lang, sample_concept_sentence(mix_seed(seed, i), lang.concept_count(),
                                                        lang.number_format(), options)));
  }
  return out;
}

Degradation degrade_monolingual(const Sentence& tokens, double severity, std::uint64_t seed) {
  if (!(severity >= 0.0 && severity <= 1.0)) {
    throw InvalidArgument("degrade_monolingual: severity must be in [0, 1]");
  }
  Degradation result;
  const std::size_t len = tokens.size();
  const auto k = std::min<std::size_t>(
      len, static_cast<std::size_t>(std::ceil(severity * static_cast<double>(len) - 1e-9)));
  if (k == 0) {
    result.tokens = tokens;
    return result;
  }
  Rng rng(seed);
  std::vector<std::size_t> order(len);
  for (std::size_t i = 0; i < len; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(chosen.begin(), chosen.end());

  std::vector<std::size_t> dropped;
  std::vector<std::size_t> permuted;
  for (std::size_t pos : chosen) (rng.bernoulli(0.5) ? dropped : permuted).push_back(pos);
  if (permuted.size() == 1) {
    dropped.push_back(permuted.back());
    permuted.clear();
  }

  Sentence work = tokens;
  // Cyclic rotation is a derangement, so every permuted position changes slot.
  for (std::size_t i = 0; i < permuted.size(); ++i) {
    work[permuted[i]] = tokens[permuted[(i + 1) % permuted.size()]];
  }
  std::vector<bool> drop(len, false);
  for (std::size_t pos : dropped) drop[pos] = true;
  for (std::size_t i = 0; i < len; ++i) {
    if (!drop[i]) result.tokens.push_back(work[i]);
  }
  if (result.tokens.empty()) result.tokens.push_back(tokens.front());
  result.perturbed = k;
  return result;
}

}  // namespace vega::corpus
