#include "discourse/gateway/backend.hpp"

#include <cmath>

namespace discourse::gateway {

ChatRequest make_request(const std::string& template_id, PromptVars vars, const PromptRegistry& registry) {
    ChatRequest request;
    request.template_id = template_id;
    request.rendered_prompt = registry.render(template_id, vars);
    request.variables = std::move(vars);
    return request;
}

void validate(const ChatRequest& request, const PromptRegistry& registry) {
    if (request.rendered_prompt.empty()) throw std::invalid_argument("chat request has an empty prompt");
    if (!registry.contains(request.template_id)) {
        throw std::invalid_argument("chat request names unregistered template '" + request.template_id + "'");
    }
    if (!(request.temperature >= 0.0) || !std::isfinite(request.temperature)) {
        throw std::invalid_argument("chat request temperature must be >= 0");
    }
    if (request.max_tokens <= 0) throw std::invalid_argument("chat request max_tokens must be positive");
}

}  // namespace discourse::gateway
