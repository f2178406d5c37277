#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "discourse/gateway/backend.hpp"

namespace discourse::gateway {

/// Content address of a cached backend response.
struct CacheKey {
    std::string digest;

    static CacheKey for_chat(const std::string& backend_id, const std::string& model_id, const ChatRequest& request);
    static CacheKey for_embedding(const std::string& backend_id, const std::string& model_id, const std::string& text);

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

/// Content-addressed store of JSON records. With a directory the records are
/// files `<dir>/<digest[0:2]>/<digest>.json`, written via temp file + rename
/// so concurrent writers never expose a torn record. Without one it is an
/// in-memory map.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<nlohmann::json> fetch(const CacheKey& key) const;
    void store(const CacheKey& key, const nlohmann::json& record);

    bool persistent() const { return dir_.has_value(); }

private:
    std::filesystem::path path_for(const CacheKey& key) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::map<std::string, nlohmann::json> memory_;
};

}  // namespace discourse::gateway
