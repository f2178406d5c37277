#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace discourse::lenient {

struct JsonParse {
    std::optional<nlohmann::json> value;
    bool repaired = false;               // strict parse failed, a repair succeeded
    std::vector<std::string> notes;      // what was repaired, or why nothing worked
};

/// Strict JSON parse first; failing that, extract the outermost bracketed
/// region and apply textual repairs (code fences, smart quotes, trailing
/// commas, unquoted keys, single-quoted strings, missing closers). Never
/// throws.
JsonParse parse_json(std::string_view raw);

/// "yes"/"no" (also 1/0, true/false, {"answer": ...}) from a model reply.
std::optional<bool> parse_yes_no(std::string_view raw);

/// First integer in the reply, if any, within [lo, hi].
std::optional<int> parse_index(std::string_view raw, int lo, int hi);

/// JSON dump that replaces invalid UTF-8 instead of throwing.
std::string safe_dump(const nlohmann::json& j, int indent = -1);

}  // namespace discourse::lenient
