#include "discourse/prompts.hpp"

#include <set>

namespace discourse {

namespace {

template <class OnText, class OnVar>
void scan(const std::string& text, OnText on_text, OnVar on_var) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) break;
        on_text(text.substr(pos, open - pos));
        on_var(text.substr(open + 2, close - open - 2));
        pos = close + 2;
    }
    on_text(text.substr(pos));
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    scan(
        text, [](const std::string&) {},
        [&](const std::string& name) {
            if (seen.insert(name).second) out.push_back(name);
        });
    return out;
}

std::string render_template(const std::string& text, const PromptVars& vars) {
    std::string out;
    out.reserve(text.size());
    scan(
        text, [&](const std::string& t) { out += t; },
        [&](const std::string& name) {
            auto it = vars.find(name);
            if (it == vars.end()) throw PromptError("no value for placeholder {{" + name + "}}");
            out += it->second;
        });
    return out;
}

const PromptRegistry& PromptRegistry::builtin() {
    static const PromptRegistry registry(detail::embedded_prompts());
    return registry;
}

PromptRegistry::PromptRegistry(std::vector<PromptTemplate> templates) {
    for (auto& t : templates) {
        auto id = t.id;
        if (!templates_.emplace(id, std::move(t)).second) throw PromptError("duplicate prompt template " + id);
    }
}

bool PromptRegistry::contains(const std::string& id) const { return templates_.count(id) != 0; }

const PromptTemplate& PromptRegistry::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw PromptError("unknown prompt template " + id);
    return it->second;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, t] : templates_) out.push_back(id);
    return out;
}

std::string PromptRegistry::render(const std::string& id, const PromptVars& vars) const {
    return render_template(get(id).text, vars);
}

std::string PromptRegistry::skeleton(const std::string& id) const {
    PromptVars empty;
    for (const auto& name : get(id).placeholders()) empty[name] = "";
    return render(id, empty);
}

}  // namespace discourse
