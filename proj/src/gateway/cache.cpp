#include "discourse/gateway/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include "discourse/hashing.hpp"

namespace discourse::gateway {

namespace {

using nlohmann::json;

std::string temp_suffix() {
    static std::atomic<unsigned long long> counter{0};
    std::ostringstream os;
    os << ".tmp." << std::this_thread::get_id() << "." << counter.fetch_add(1);
    return os.str();
}

}  // namespace

CacheKey CacheKey::for_chat(const std::string& backend_id, const std::string& model_id, const ChatRequest& request) {
    json few_shot = json::array();
    for (const auto& ex : request.few_shot) few_shot.push_back({ex.input, ex.output});
    // Fixed field order; temperature printed by json so 0 and 0.0 agree.
    const json identity = {"chat",          backend_id,          model_id, request.template_id, request.rendered_prompt,
                           request.temperature, request.max_tokens, few_shot};
    return {sha256_hex(identity.dump(-1, ' ', false, json::error_handler_t::replace))};
}

CacheKey CacheKey::for_embedding(const std::string& backend_id, const std::string& model_id, const std::string& text) {
    const json identity = {"embedding", backend_id, model_id, text};
    return {sha256_hex(identity.dump(-1, ' ', false, json::error_handler_t::replace))};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
    return *dir_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::optional<json> ResponseCache::fetch(const CacheKey& key) const {
    if (!dir_) {
        std::lock_guard lock(mutex_);
        auto it = memory_.find(key.digest);
        if (it == memory_.end()) return std::nullopt;
        return std::optional<json>(std::in_place, it->second);
    }
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    try {
        return std::optional<json>(std::in_place, json::parse(in));
    } catch (const json::exception&) {
        // A record that fails to parse is treated as a miss and rewritten.
        return std::nullopt;
    }
}

void ResponseCache::store(const CacheKey& key, const json& record) {
    if (!dir_) {
        std::lock_guard lock(mutex_);
        memory_[key.digest] = record;
        return;
    }
    const auto target = path_for(key);
    std::filesystem::create_directories(target.parent_path());
    const auto tmp = target.string() + temp_suffix();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GatewayError("cache: cannot write " + tmp);
        out << record.dump(-1, ' ', false, json::error_handler_t::replace);
        if (!out) throw GatewayError("cache: write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw GatewayError("cache: cannot publish " + target.string());
    }
}

}  // namespace discourse::gateway
