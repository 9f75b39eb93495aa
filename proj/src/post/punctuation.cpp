#include "vega/post/punctuation.hpp"

#include "vega/core/error.hpp"

namespace vega::post {

namespace {
constexpr const char* kLowQuote = "\xE2\x80\x9E";   // „
constexpr const char* kHighQuote = "\xE2\x80\x9C";  // “
}  // namespace

PunctuationProfile identity_profile() { return {"identity", {}, false}; }

PunctuationProfile german_profile() { return {"german", {}, true}; }

PunctuationProfile cjk_profile() {
  return {"cjk",
          {{".", "\xE3\x80\x82"},
           {",", "\xEF\xBC\x8C"},
           {"?", "\xEF\xBC\x9F"},
           {"!", "\xEF\xBC\x81"},
           {":", "\xEF\xBC\x9A"},
           {";", "\xEF\xBC\x9B"}},
          false};
}

PunctuationProfile toy_profile(const corpus::ToyLanguage& lang) {
  PunctuationProfile p{"toy:" + lang.id(), {}, false};
  const auto& punct = lang.punctuation();
  if (punct.sentence_final != ".") p.token_map["."] = punct.sentence_final;
  if (punct.clause_separator != ",") p.token_map[","] = punct.clause_separator;
  if (punct.open_quote == kLowQuote && punct.close_quote == kHighQuote) p.german_quotes = true;
  return p;
}

ProfileRegistry ProfileRegistry::defaults() {
  ProfileRegistry r;
  r.add("de", german_profile());
  r.add("cs", german_profile());
  r.add("zh", cjk_profile());
  r.add("ja", cjk_profile());
  r.add("en", identity_profile());
  r.add("ru", identity_profile());
  return r;
}

void ProfileRegistry::add(const std::string& lang, PunctuationProfile profile) {
  profiles_[lang] = std::move(profile);
}

void ProfileRegistry::add_toy_languages(const std::vector<corpus::ToyLanguage>& languages) {
  for (const auto& lang : languages) add(lang.id(), toy_profile(lang));
}

const PunctuationProfile& ProfileRegistry::get(const std::string& lang) const {
  const auto it = profiles_.find(lang);
  if (it == profiles_.end()) throw InvalidArgument("no punctuation profile registered for '" + lang + "'");
  return it->second;
}

Sentence convert_punctuation(const Sentence& tokens, const PunctuationProfile& profile) {
  Sentence out;
  out.reserve(tokens.size());
  bool open = true;
  for (const auto& tok : tokens) {
    const auto it = profile.token_map.find(tok);
    std::string t = it == profile.token_map.end() ? tok : it->second;
    if (profile.german_quotes && t.find('"') != std::string::npos) {
      std::string q;
      for (char c : t) {
        if (c == '"') {
          q += open ? kLowQuote : kHighQuote;
          open = !open;
        } else {
          q += c;
        }
      }
      t = std::move(q);
    }
    out.push_back(std::move(t));
  }
  return out;
}

Sentence convert_punctuation(const Sentence& tokens, const std::string& target_lang,
                             const ProfileRegistry& registry) {
  return convert_punctuation(tokens, registry.get(target_lang));
}

Sentence desubword(const std::vector<subword::TokenId>& ids, const subword::SubwordVocab& vocab) {
  return vocab.decode(ids);
}

Sentence desubword(const std::vector<std::string>& pieces) {
  const std::string eow = subword::kEndOfWord;
  Sentence out;
  std::string word;
  for (const auto& piece : pieces) {
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

}  // namespace vega::post
