#include "discourse/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

namespace discourse::text {

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && to_lower(a) == to_lower(b);
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool is_stopword(std::string_view word) {
    static constexpr std::array<std::string_view, 64> kStop = {
        "a",     "about", "after", "all",  "also",  "an",   "and",   "are",   "as",    "at",   "be",
        "been",  "but",   "by",    "can",  "for",   "from", "had",   "has",   "have",  "he",   "her",
        "his",   "i",     "in",    "into", "is",    "it",   "its",   "more",  "new",   "not",  "of",
        "on",    "or",    "our",   "over", "said",  "she",  "so",    "some",  "than",  "that", "the",
        "their", "them",  "there", "they", "this",  "to",   "under", "up",    "was",   "we",   "were",
        "what",  "when",  "which", "while", "who",  "will", "with",  "would", "you"};
    return std::find(kStop.begin(), kStop.end(), word) != kStop.end();
}

std::vector<std::string> content_words(std::string_view s) {
    auto tokens = tokenize(s);
    std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < s.size(); ++i) {
        cur.push_back(s[i]);
        const char c = s[i];
        const bool at_end = i + 1 == s.size();
        if ((c == '.' || c == '!' || c == '?') &&
            (at_end || std::isspace(static_cast<unsigned char>(s[i + 1])))) {
            auto t = trim(cur);
            if (!t.empty()) out.push_back(std::move(t));
            cur.clear();
        }
    }
    auto t = trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace discourse::text
