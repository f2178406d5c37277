#include "discourse/ideology.hpp"

#include <stdexcept>

#include "discourse/text.hpp"

namespace discourse {

std::string to_string(Ideology ideology) { return ideology == Ideology::left ? "left" : "right"; }

std::optional<Ideology> parse_ideology(std::string_view text) {
    const auto t = text::to_lower(text::trim(text));
    if (t == "left") return Ideology::left;
    if (t == "right") return Ideology::right;
    return std::nullopt;
}

void to_json(nlohmann::json& j, Ideology ideology) { j = to_string(ideology); }

void from_json(const nlohmann::json& j, Ideology& ideology) {
    auto parsed = parse_ideology(j.get<std::string>());
    if (!parsed) throw std::invalid_argument("not an ideology: " + j.dump());
    ideology = *parsed;
}

}  // namespace discourse
