#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace discourse {

class PromptError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A versioned prompt asset. Placeholders are written `{{name}}`.
struct PromptTemplate {
    std::string id;
    int version = 1;
    std::string text;

    std::vector<std::string> placeholders() const;
};

using PromptVars = std::map<std::string, std::string>;

/// Substitutes every `{{name}}`. Values are inserted verbatim and never
/// re-scanned. Throws PromptError for a placeholder with no value.
std::string render_template(const std::string& text, const PromptVars& vars);

/// The prompt assets compiled into the library (assets/prompts/*.txt).
class PromptRegistry {
public:
    static const PromptRegistry& builtin();

    explicit PromptRegistry(std::vector<PromptTemplate> templates);

    bool contains(const std::string& id) const;
    const PromptTemplate& get(const std::string& id) const;
    std::vector<std::string> ids() const;

    std::string render(const std::string& id, const PromptVars& vars) const;

    /// The template with every placeholder replaced by an empty string: the
    /// fixed wording a reader sees regardless of inputs.
    std::string skeleton(const std::string& id) const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

namespace detail {
const std::vector<PromptTemplate>& embedded_prompts();
}

}  // namespace discourse
