#include "discourse/lenient.hpp"

#include <cctype>

#include "discourse/text.hpp"

namespace discourse::lenient {

namespace {

using nlohmann::json;

std::optional<json> try_parse(const std::string& s) {
    try {
        return json::parse(s);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::string strip_fences(std::string s) {
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto fence = s.find("```", pos);
        if (fence == std::string::npos) {
            out += s.substr(pos);
            break;
        }
        out += s.substr(pos, fence - pos);
        pos = fence + 3;
        // Drop a language tag such as ```json
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string normalize_quotes(std::string s) {
    s = replace_all(std::move(s), "\xE2\x80\x9C", "\"");
    s = replace_all(std::move(s), "\xE2\x80\x9D", "\"");
    s = replace_all(std::move(s), "\xE2\x80\x98", "'");
    s = replace_all(std::move(s), "\xE2\x80\x99", "'");
    return s;
}

/// Outermost {...} or [...] region starting at the first opener. Missing
/// closers are appended in the right order.
std::optional<std::string> bracket_region(const std::string& s) {
    const auto start = s.find_first_of("{[");
    if (start == std::string::npos) return std::nullopt;
    std::vector<char> stack;
    bool in_string = false;
    char quote = 0;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == quote) {
                in_string = false;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            in_string = true;
            quote = c;
        } else if (c == '{' || c == '[') {
            stack.push_back(c == '{' ? '}' : ']');
        } else if (c == '}' || c == ']') {
            if (!stack.empty() && stack.back() == c) stack.pop_back();
            if (stack.empty()) return s.substr(start, i - start + 1);
        }
    }
    std::string out = s.substr(start);
    if (in_string) out.push_back(quote);
    while (!stack.empty()) {
        out.push_back(stack.back());
        stack.pop_back();
    }
    return out;
}

std::string remove_trailing_commas(const std::string& s) {
    std::string out;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out.push_back(c);
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string quote_bare_keys(const std::string& s) {
    std::string out;
    bool in_string = false;
    bool escaped = false;
    char last_structural = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out.push_back(c);
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out.push_back(c);
            continue;
        }
        if ((last_structural == '{' || last_structural == ',') &&
            (std::isalpha(static_cast<unsigned char>(c)) || c == '_')) {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            std::size_t k = j;
            while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
            if (k < s.size() && s[k] == ':') {
                out += '"' + s.substr(i, j - i) + '"';
                i = j - 1;
                last_structural = 0;
                continue;
            }
        }
        if (!std::isspace(static_cast<unsigned char>(c))) last_structural = c;
        out.push_back(c);
    }
    return out;
}

std::string single_to_double_quotes(const std::string& s) {
    std::string out;
    bool in_double = false;
    bool in_single = false;
    bool escaped = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (escaped) {
            out.push_back(c);
            escaped = false;
            continue;
        }
        if (c == '\\') {
            out.push_back(c);
            escaped = true;
            continue;
        }
        if (in_double) {
            if (c == '"') in_double = false;
            out.push_back(c);
        } else if (in_single) {
            if (c == '\'') {
                // Apostrophe inside a word stays part of the string.
                const bool inner = i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1])) && i > 0 &&
                                   std::isalpha(static_cast<unsigned char>(s[i - 1]));
                if (inner) {
                    out.push_back('\'');
                } else {
                    in_single = false;
                    out.push_back('"');
                }
            } else if (c == '"') {
                out += "\\\"";
            } else {
                out.push_back(c);
            }
        } else if (c == '"') {
            in_double = true;
            out.push_back(c);
        } else if (c == '\'') {
            in_single = true;
            out.push_back('"');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string python_literals(const std::string& s) {
    std::string out;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out.push_back(c);
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        auto word_at = [&](std::string_view w) {
            if (s.compare(i, w.size(), w) != 0) return false;
            const bool before = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
            const std::size_t e = i + w.size();
            const bool after = e >= s.size() || !std::isalnum(static_cast<unsigned char>(s[e]));
            return before && after;
        };
        if (word_at("True")) {
            out += "true";
            i += 3;
        } else if (word_at("False")) {
            out += "false";
            i += 4;
        } else if (word_at("None")) {
            out += "null";
            i += 3;
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

JsonParse parse_json(std::string_view raw) {
    JsonParse result;
    std::string s(raw);
    if (auto v = try_parse(s)) {
        result.value = std::move(v);
        return result;
    }
    s = normalize_quotes(strip_fences(std::move(s)));
    auto region = bracket_region(s);
    if (!region) {
        result.notes.push_back("no JSON object or array found");
        return result;
    }
    std::string candidate = *region;
    struct Step {
        const char* note;
        std::string (*apply)(const std::string&);
    };
    static const Step steps[] = {
        {"removed trailing commas", remove_trailing_commas},
        {"quoted bare keys", quote_bare_keys},
        {"converted python literals", python_literals},
        {"converted single quotes", single_to_double_quotes},
    };
    if (auto v = try_parse(candidate)) {
        result.value = std::move(v);
        result.repaired = true;
        result.notes.push_back("extracted bracketed region");
        return result;
    }
    for (const auto& step : steps) {
        auto next = step.apply(candidate);
        if (next != candidate) {
            candidate = std::move(next);
            result.notes.push_back(step.note);
        }
        if (auto v = try_parse(candidate)) {
            result.value = std::move(v);
            result.repaired = true;
            return result;
        }
    }
    // Quote conversion can expose fresh trailing commas or bare keys.
    candidate = quote_bare_keys(remove_trailing_commas(candidate));
    if (auto v = try_parse(candidate)) {
        result.value = std::move(v);
        result.repaired = true;
        return result;
    }
    result.notes.push_back("repairs did not yield valid JSON");
    return result;
}

std::optional<bool> parse_yes_no(std::string_view raw) {
    auto parsed = parse_json(raw);
    if (parsed.value) {
        const auto& v = *parsed.value;
        if (v.is_boolean()) return v.get<bool>();
        if (v.is_number_integer()) {
            const auto n = v.get<long long>();
            if (n == 0 || n == 1) return n == 1;
        }
        if (v.is_object()) {
            for (const char* key : {"answer", "response", "result", "same"}) {
                auto it = v.find(key);
                if (it == v.end()) continue;
                if (it->is_boolean()) return it->get<bool>();
                if (it->is_number_integer()) {
                    const auto n = it->get<long long>();
                    if (n == 0 || n == 1) return n == 1;
                }
                if (it->is_string()) return parse_yes_no(it->get<std::string>());
            }
        }
    }
    const auto tokens = text::tokenize(raw);
    for (const auto& t : tokens) {
        if (t == "yes" || t == "true" || t == "1") return true;
        if (t == "no" || t == "false" || t == "0") return false;
    }
    return std::nullopt;
}

std::optional<int> parse_index(std::string_view raw, int lo, int hi) {
    std::size_t i = 0;
    while (i < raw.size()) {
        if (std::isdigit(static_cast<unsigned char>(raw[i]))) {
            long long value = 0;
            std::size_t j = i;
            while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j])) && j - i < 9) {
                value = value * 10 + (raw[j] - '0');
                ++j;
            }
            if (value >= lo && value <= hi) return static_cast<int>(value);
            return std::nullopt;
        }
        ++i;
    }
    return std::nullopt;
}

std::string safe_dump(const nlohmann::json& j, int indent) {
    return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace discourse::lenient
