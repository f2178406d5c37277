#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "discourse/gateway/http_backends.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

namespace discourse::gateway {
namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw GatewayError("endpoint URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
    return out;
}

json post_json(const HttpEndpoint& endpoint, const std::string& route, const json& body) {
    const auto url = split_url(endpoint.base_url);
    httplib::Client client(url.origin);
    const auto secs = static_cast<time_t>(endpoint.timeout.count());
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(url.path + route, headers, body.dump(), "application/json");
    if (!res) throw TransientError("request to " + endpoint.base_url + " failed: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
        throw AuthenticationError("backend rejected credentials (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500)
        throw TransientError("backend returned HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw GatewayError("backend returned HTTP " + std::to_string(res->status) + ": " + res->body);

    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw TransientError("backend returned a non-JSON body");
    return parsed;
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& shot : request.few_shot) {
        messages.push_back({{"role", "user"}, {"content", shot.input}});
        messages.push_back({{"role", "assistant"}, {"content", shot.output}});
    }
    messages.push_back({{"role", "user"}, {"content", request.rendered_prompt}});
    const json body = {{"model", endpoint_.model},
                       {"messages", messages},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_tokens}};
    const json reply = post_json(endpoint_, "/chat/completions", body);

    const auto& choices = reply.value("choices", json::array());
    if (!choices.is_array() || choices.empty()) throw GatewayError("chat reply has no choices");
    const auto& choice = choices.front();
    if (choice.value("finish_reason", "") == "content_filter")
        throw ContentError("backend filtered the response");
    const auto& message = choice.value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string())
        throw GatewayError("chat reply has no text content");
    return message["content"].get<std::string>();
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(const std::vector<std::string>& texts) {
    const json reply = post_json(endpoint_, "/embeddings", {{"model", endpoint_.model}, {"input", texts}});
    const auto& data = reply.value("data", json::array());
    if (!data.is_array() || data.size() != texts.size())
        throw GatewayError("embedding reply has " + std::to_string(data.size()) + " vectors for " +
                           std::to_string(texts.size()) + " inputs");
    std::vector<std::vector<double>> out(texts.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t slot = data[i].value("index", i);
        if (slot >= out.size()) throw GatewayError("embedding reply index out of range");
        out[slot] = data[i].at("embedding").get<std::vector<double>>();
    }
    return out;
}

}  // namespace discourse::gateway
