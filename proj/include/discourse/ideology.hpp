#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace discourse {

enum class Ideology { left, right };

inline constexpr Ideology kIdeologies[] = {Ideology::left, Ideology::right};

std::string to_string(Ideology ideology);

/// Case-insensitive; accepts "left"/"right" (surrounding whitespace ignored).
std::optional<Ideology> parse_ideology(std::string_view text);

inline Ideology opposite(Ideology ideology) {
    return ideology == Ideology::left ? Ideology::right : Ideology::left;
}

void to_json(nlohmann::json& j, Ideology ideology);
void from_json(const nlohmann::json& j, Ideology& ideology);

}  // namespace discourse
