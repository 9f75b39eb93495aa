#include <set>

#include "doctest.h"
#include "vega/core/error.hpp"
#include "vega/core/random.hpp"
#include "vega/corpus/toy_language.hpp"
#include "vega/post/numbers.hpp"
#include "vega/post/punctuation.hpp"
#include "vega/subword/vocab.hpp"

using namespace vega;
using namespace vega::post;

namespace {

const char* kLow = "\xE2\x80\x9E";
const char* kHigh = "\xE2\x80\x9C";

std::string random_number(Rng& rng) {
  static const char* kSeps[] = {".", ",", "-", "/"};
  std::string s = std::to_string(rng.index(3000));
  if (rng.bernoulli(0.5)) s += std::string(kSeps[rng.index(4)]) + std::to_string(rng.index(100));
  return s;
}

Sentence random_sentence(Rng& rng, const std::vector<std::string>& numbers) {
  static const std::vector<std::string> kWords = {"the", "at", "was", "\"", ".", ",", "in", "and", "?"};
  Sentence s;
  const auto n = 1 + rng.index(12);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(0.3)) {
      s.push_back(rng.bernoulli(0.6) && !numbers.empty() ? numbers[rng.index(numbers.size())] : random_number(rng));
    } else {
      s.push_back(kWords[rng.index(kWords.size())]);
    }
  }
  return s;
}

// Reshapes a number the way a sloppy translation might: swap separators,
// split at a separator with a connector word, or keep it.
Sentence mangle(Rng& rng, const std::string& number) {
  std::string out = number;
  switch (rng.index(3)) {
    case 0:
      for (char& c : out) {
        if (c == '.') c = ',';
        else if (c == ',') c = '.';
        else if (c == '-') c = '/';
      }
      return {out};
    case 1: {
      const auto sep = out.find_first_of(".,-/");
      if (sep == std::string::npos) return {out};
      return {out.substr(0, sep), "at", out.substr(sep + 1)};
    }
    default:
      return {out};
  }
}

}  // namespace

TEST_CASE("number span extraction") {
  const auto spans = extract_number_spans({"was", "2006-07"});
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].surface == "2006-07");
  CHECK(spans[0].kind == SpanKind::range_date);
  CHECK(spans[0].position == 1);
  CHECK(spans[0].digits == "000267");

  CHECK(extract_number_spans({"no", "digits", "here"}).empty());

  const auto mixed = extract_number_spans({"3.5", "and", "7"});
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].surface == "3.5");
  CHECK(mixed[0].kind == SpanKind::decimal);
  CHECK(mixed[1].surface == "7");
  CHECK(mixed[1].kind == SpanKind::integer);
  CHECK(mixed[1].position == 2);

  CHECK(extract_number_spans({"1,234"})[0].kind == SpanKind::integer);
  CHECK(extract_number_spans({"12,5"})[0].kind == SpanKind::decimal);
  const auto run = extract_number_spans({"a", "12", "34", "b", "5"});
  REQUIRE(run.size() == 2);
  CHECK(run[0].surface == "12 34");
  CHECK(run[0].length == 2);
}

TEST_CASE("number repair") {
  const auto date = repair_numbers({"output", "was", "2006-07"}, {"output", "was", "2006", "at", "07"});
  CHECK(date.tokens == Sentence{"output", "was", "2006-07"});
  REQUIRE(date.changes.size() == 1);
  CHECK(date.changes[0].before == "2006 at 07");
  CHECK(date.changes[0].after == "2006-07");

  CHECK(repair_numbers({"3,5"}, {"3.5"}).tokens == Sentence{"3,5"});
  CHECK(repair_numbers({"3,5"}, {"x", "y"}).tokens == Sentence{"x", "y"});
  CHECK(repair_numbers({"3,5"}, {"3.6"}).tokens == Sentence{"3.6"});
  CHECK(repair_numbers({"3,5"}, {"3,5"}).changes.empty());

  SUBCASE("each source span is used once") {
    const auto r = repair_numbers({"3,5"}, {"3.5", "and", "5.3"});
    CHECK(r.changes.size() == 1);
    CHECK(r.tokens == Sentence{"3,5", "and", "5.3"});
  }
  SUBCASE("ties go to the nearest relative position") {
    const auto r = repair_numbers({"1,2", "a", "b", "c", "2,1"}, {"x", "x", "x", "x", "1.2"});
    REQUIRE(r.changes.size() == 1);
    CHECK(r.changes[0].source_position == 4);
    CHECK(r.tokens.back() == "2,1");
  }
  SUBCASE("larger digit multisets are matched first") {
    const auto r = repair_numbers({"12-34", "x", "5"}, {"12", "at", "34"});
    CHECK(r.tokens == Sentence{"12-34"});
  }
  CHECK(count_number_mismatches({"2006-07"}, {"2006", "at", "07"}) == 3);
  CHECK(count_number_mismatches({"2006-07"}, {"2006-07"}) == 0);
}

TEST_CASE("number repair properties over random sentences") {
  Rng rng(31);
  std::size_t changed = 0;
  for (int n = 0; n < 1000; ++n) {
    std::vector<std::string> numbers;
    for (std::size_t k = rng.index(4); k > 0; --k) numbers.push_back(random_number(rng));
    const auto src = random_sentence(rng, numbers);
    Sentence hyp;
    for (const auto& tok : random_sentence(rng, {})) {
      if (has_digit(tok) && !numbers.empty()) {
        for (auto& t : mangle(rng, numbers[rng.index(numbers.size())])) hyp.push_back(t);
      } else {
        hyp.push_back(tok);
      }
    }
    const auto once = repair_numbers(src, hyp);
    CHECK(repair_numbers(src, once.tokens).tokens == once.tokens);
    changed += !once.changes.empty();

    std::vector<std::string> src_digits;
    for (const auto& s : extract_number_spans(src)) src_digits.push_back(s.digits);
    std::size_t removed = 0;
    std::size_t added = 0;
    for (const auto& c : once.changes) {
      CHECK(std::count(src_digits.begin(), src_digits.end(), extract_number_spans(split_words(c.after))[0].digits) >= 1);
      removed += split_words(c.before).size();
      added += split_words(c.after).size();
    }
    CHECK(once.tokens.size() + removed == hyp.size() + added);

    // Tokens outside replaced groups are untouched.
    Sentence kept_hyp;
    std::set<std::size_t> inside;
    for (const auto& c : once.changes) {
      for (std::size_t k = 0; k < split_words(c.before).size(); ++k) inside.insert(c.position + k);
    }
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      if (!inside.count(i)) kept_hyp.push_back(hyp[i]);
    }
    Sentence kept_out;
    std::size_t i = 0;
    std::size_t c = 0;
    for (std::size_t h = 0; h < hyp.size();) {
      if (c < once.changes.size() && once.changes[c].position == h) {
        h += split_words(once.changes[c].before).size();
        i += split_words(once.changes[c].after).size();
        ++c;
      } else {
        kept_out.push_back(once.tokens[i++]);
        ++h;
      }
    }
    CHECK(kept_out == kept_hyp);
  }
  MESSAGE("repairs applied in " << changed << " of 1000 sentences");
  CHECK(changed > 50);
}

TEST_CASE("punctuation profiles") {
  const auto reg = ProfileRegistry::defaults();
  CHECK(convert_punctuation({"\"", "x", "\""}, "de", reg) == Sentence{kLow, "x", kHigh});
  CHECK(convert_punctuation({"\"x\""}, "cs", reg) == Sentence{std::string(kLow) + "x" + kHigh});
  CHECK(convert_punctuation({"a", "\"", ".", "\""}, "en", reg) == Sentence{"a", "\"", ".", "\""});
  CHECK(convert_punctuation({"a", ",", "b", "."}, "zh", reg) ==
        Sentence{"a", "\xEF\xBC\x8C", "b", "\xE3\x80\x82"});
  CHECK(convert_punctuation({"a", "."}, "ja", reg).back() == "\xE3\x80\x82");
  CHECK_THROWS_AS(convert_punctuation({"a"}, "xx", reg), InvalidArgument);
  CHECK(convert_punctuation({"a"}, identity_profile()) == Sentence{"a"});

  auto toy = reg;
  const auto family = corpus::generate_language_family(3, 40);
  toy.add_toy_languages(family);
  for (const auto& lang : family) {
    CHECK(convert_punctuation({"w", "."}, lang.id(), toy).back() == lang.punctuation().sentence_final);
  }

  Rng rng(5);
  for (int n = 0; n < 1000; ++n) {
    const auto s = random_sentence(rng, {});
    for (const char* lang : {"de", "zh", "en"}) {
      const auto once = convert_punctuation(s, lang, reg);
      CHECK(convert_punctuation(once, lang, reg) == once);
      CHECK(once.size() == s.size());
    }
  }
}

TEST_CASE("desubword") {
  const auto family = corpus::generate_language_family(5, 60);
  std::vector<Sentence> corpus;
  for (const auto& p : corpus::generate_parallel(family[0], family[1], 200, 3)) {
    corpus.push_back(p.src);
    corpus.push_back(p.tgt);
  }
  const auto vocab = subword::train_bpe(corpus, 150, {subword::language_token("L1")});
  for (const auto& s : corpus) {
    CHECK(desubword(vocab.encode(s), vocab) == s);
    CHECK(desubword(vocab.encode(s, subword::language_token("L1")), vocab) == s);
    std::vector<std::string> pieces;
    for (auto id : vocab.encode(s)) pieces.push_back(vocab.token(id));
    CHECK(desubword(pieces) == s);
  }
  CHECK(desubword(std::vector<subword::TokenId>{}, vocab).empty());
  CHECK_THROWS_AS(desubword({static_cast<subword::TokenId>(vocab.size() + 5)}, vocab), InvalidArgument);
}
