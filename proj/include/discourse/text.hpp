#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace discourse::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool contains_icase(std::string_view haystack, std::string_view needle);

/// Lowercased alphanumeric tokens; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);

/// Tokens minus a small English stopword list.
std::vector<std::string> content_words(std::string_view s);

bool is_stopword(std::string_view word);

/// Naive sentence split on '.', '!' or '?' followed by whitespace.
std::vector<std::string> split_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace discourse::text
