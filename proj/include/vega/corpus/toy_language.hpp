#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vega/core/text.hpp"
#include "vega/corpus/sentence_pair.hpp"

namespace vega::corpus {

enum class WordOrder { SVO, SOV, VSO };

/// Concepts are shared by every language; the category is a function of the
/// concept id alone so all lexicons agree on it.
enum class Category { noun, verb, adjective };

Category category_of(int concept_id);

struct NumberFormat {
  char decimal_mark = '.';
  char group_separator = ',';
  char date_separator = '-';
};

struct PunctuationSet {
  std::string sentence_final = ".";
  std::string clause_separator = ",";
  std::string open_quote = "\"";
  std::string close_quote = "\"";
};

/// A synthetic language: a bijective concept lexicon plus a constituent
/// order, a number convention and punctuation glyphs.
class ToyLanguage {
 public:
  ToyLanguage(std::string id, std::vector<std::string> lexicon, WordOrder order,
              NumberFormat numbers, PunctuationSet punctuation);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& lexicon() const { return lexicon_; }
  std::size_t concept_count() const { return lexicon_.size(); }
  WordOrder word_order() const { return order_; }
  const NumberFormat& number_format() const { return numbers_; }
  const PunctuationSet& punctuation() const { return punctuation_; }

  const std::string& token(int concept_id) const;
  /// Concept for a surface token, if it is in the lexicon.
  std::optional<int> concept_of(const std::string& token) const;
  bool is_punctuation(const std::string& token) const;

  bool operator==(const ToyLanguage& other) const;

 private:
  std::string id_;
  std::vector<std::string> lexicon_;
  std::unordered_map<std::string, int> reverse_;
  WordOrder order_;
  NumberFormat numbers_;
  PunctuationSet punctuation_;
};

/// Literal-bearing noun phrase: [literal] adjective* noun.
struct NounPhrase {
  std::optional<std::string> literal;
  std::vector<int> adjectives;
  int noun = 0;

  bool operator==(const NounPhrase&) const = default;
};

struct Clause {
  std::vector<NounPhrase> phrases;  // subject first, then object(s)
  std::vector<int> verbs;

  bool operator==(const Clause&) const = default;
};

/// Language-independent meaning of a sentence. Literal slots are number or
/// date strings carried verbatim between languages.
struct ConceptSentence {
  std::vector<Clause> clauses;

  std::vector<int> concepts() const;
  std::vector<std::string> literals() const;

  bool operator==(const ConceptSentence&) const = default;
};

struct GenerationOptions {
  int min_clauses = 1;
  int max_clauses = 3;
  int max_adjectives = 2;
  double literal_rate = 0.1;
  /// Restrict sampled concepts to the first N ids (0 = all).
  std::size_t concept_limit = 0;
  /// First concept id sampled (rounded down to a multiple of 4).
  std::size_t concept_offset = 0;
};

/// Throws InvalidArgument when concept_vocab_size < 10.
ToyLanguage generate_language(std::uint64_t seed, const std::string& id,
                              std::size_t concept_vocab_size);

/// The pivot "E" followed by L1..L5, all from one seed.
std::vector<ToyLanguage> generate_language_family(std::uint64_t seed,
                                                  std::size_t concept_vocab_size);

ConceptSentence sample_concept_sentence(std::uint64_t seed, std::size_t concept_count,
                                        const NumberFormat& numbers,
                                        const GenerationOptions& options = {});

Sentence realize(const ToyLanguage& lang, const ConceptSentence& meaning);

/// Lenient parse: verbs may sit anywhere in a clause, noun phrases keep their
/// relative order. Throws UnknownToken for out-of-lexicon words.
ConceptSentence parse(const ToyLanguage& lang, const Sentence& tokens);

/// True when the sentence is exactly what `lang` would realise for its meaning.
bool is_well_formed(const ToyLanguage& lang, const Sentence& tokens);

Sentence ground_truth_translate(const ToyLanguage& from, const ToyLanguage& to,
                                const Sentence& tokens);

std::vector<SentencePair> generate_parallel(const ToyLanguage& a, const ToyLanguage& b,
                                            std::size_t n, std::uint64_t seed,
                                            const GenerationOptions& options = {});

std::vector<Sentence> generate_monolingual(const ToyLanguage& lang, std::size_t n,
                                           std::uint64_t seed,
                                           const GenerationOptions& options = {});

struct Degradation {
  Sentence tokens;
  std::size_t perturbed = 0;
};

/// Drops or permutes ceil(severity * len) tokens; never returns an empty
/// sentence. severity must lie in [0, 1].
Degradation degrade_monolingual(const Sentence& tokens, double severity, std::uint64_t seed);

}  // namespace vega::corpus
