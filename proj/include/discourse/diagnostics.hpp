#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace discourse {

/// A non-fatal problem noticed while processing some input. Stages collect
/// these instead of aborting so a batch run can report everything at once.
struct Diagnostic {
    std::string where;    // record / article / stage the issue belongs to
    std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

inline void to_json(nlohmann::json& j, const Diagnostic& d) {
    j = nlohmann::json{{"where", d.where}, {"message", d.message}};
}

inline void from_json(const nlohmann::json& j, Diagnostic& d) {
    d.where = j.at("where").get<std::string>();
    d.message = j.at("message").get<std::string>();
}

inline void append(Diagnostics& into, const Diagnostics& from) {
    into.insert(into.end(), from.begin(), from.end());
}

}  // namespace discourse
