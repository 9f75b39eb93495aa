#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vega {

/// A pre-tokenized sentence: whitespace-separated surface tokens.
using Sentence = std::vector<std::string>;

Sentence split_words(std::string_view line);
std::string join_words(const Sentence& words);

/// Splits UTF-8 text into code-point substrings. Invalid bytes come back as
/// single-byte strings so callers can detect them.
std::vector<std::string> utf8_chars(std::string_view text);

bool has_digit(std::string_view token);

std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace vega
