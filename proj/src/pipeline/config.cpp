#include <cstdlib>
#include <fstream>
#include <sstream>

#include "discourse/pipeline.hpp"
#include "discourse/text.hpp"

namespace discourse::pipeline {

namespace {

std::string interpolate(const std::string& key, const std::string& value, const EnvLookup& env) {
    std::string out;
    std::size_t i = 0;
    while (i < value.size()) {
        if (value.compare(i, 2, "${") == 0) {
            const auto close = value.find('}', i + 2);
            if (close == std::string::npos) throw ConfigError(key + ": unterminated ${ in value");
            const auto name = value.substr(i + 2, close - i - 2);
            if (name.empty()) throw ConfigError(key + ": empty ${} reference");
            const auto found = env(name);
            if (!found) throw ConfigError(key + ": environment variable " + name + " is not set");
            out += *found;
            i = close + 1;
        } else {
            out += value[i++];
        }
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError(key + ": integer out of range '" + v + "'");
    }
}

std::filesystem::path to_path(const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p(v);
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& raw,
                   const std::filesystem::path& base, const EnvLookup& env) {
    const auto v = text::trim(interpolate(key, raw, env));
    auto opt_path = [&] { return v.empty() ? std::nullopt : std::optional<std::filesystem::path>(to_path(v, base)); };
    if (key == "articles") c.articles = to_path(v, base);
    else if (key == "bias_map") c.bias_map = to_path(v, base);
    else if (key == "events") c.events = opt_path();
    else if (key == "candidates") c.candidates = opt_path();
    else if (key == "output_dir") c.output_dir = to_path(v, base);
    else if (key == "cache_dir") c.cache_dir = opt_path();
    else if (key == "backend") c.backend = v;
    else if (key == "chat_url") c.chat_url = v;
    else if (key == "chat_model") c.chat_model = v;
    else if (key == "embedding_url") c.embedding_url = v;
    else if (key == "embedding_model") c.embedding_model = v;
    else if (key == "api_key_env") c.api_key_env = v;
    else if (key == "mock_embedding_dim") c.mock_embedding_dim = to_unsigned(key, v);
    else if (key == "max_in_flight") c.max_in_flight = to_unsigned(key, v);
    else if (key == "requests_per_minute") c.requests_per_minute = to_double(key, v);
    else if (key == "membership_threshold") c.membership_threshold = to_double(key, v);
    else if (key == "unseen_threshold") c.unseen_threshold = to_double(key, v);
    else if (key == "unseen_window_days") c.unseen_window_days = static_cast<int>(to_unsigned(key, v));
    else if (key == "own_points") c.own_points = to_unsigned(key, v);
    else if (key == "opposing_points") c.opposing_points = to_unsigned(key, v);
    else if (key == "topk") c.topk = to_unsigned(key, v);
    else if (key == "negatives") c.negatives = to_unsigned(key, v);
    else if (key == "evidence_limit") c.evidence_limit = to_unsigned(key, v);
    else if (key == "eval_methods") {
        c.eval_methods.clear();
        std::stringstream ss(v);
        for (std::string item; std::getline(ss, item, ',');)
            if (auto t = text::trim(item); !t.empty()) c.eval_methods.push_back(t);
    } else if (key == "seed") c.seed = to_unsigned(key, v);
    else if (key == "radius_scale") c.radius_scale = to_double(key, v);
    else if (key == "canvas_width") c.canvas_width = to_double(key, v);
    else if (key == "canvas_height") c.canvas_height = to_double(key, v);
    else if (key == "event") c.event = v.empty() ? std::nullopt : std::optional<std::string>(v);
    else if (key == "issue") c.issue = v.empty() ? std::nullopt : std::optional<std::string>(v);
    else throw ConfigError(key + ": unknown setting");
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const EnvLookup& env) {
    PipelineConfig config;
    std::istringstream in(text);
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
        const auto key = text::trim(std::string_view(trimmed).substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": missing key");
        apply_setting(config, key, trimmed.substr(eq + 1), base_dir, env);
    }
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path(), env);
}

void PipelineConfig::validate() const {
    auto unit = [](const char* name, double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + ": must lie in [0, 1]");
    };
    auto positive = [](const char* name, std::size_t v) {
        if (v == 0) throw ConfigError(std::string(name) + ": must be positive");
    };
    if (articles.empty()) throw ConfigError("articles: not set");
    if (bias_map.empty()) throw ConfigError("bias_map: not set");
    if (backend != "live" && backend != "mock") throw ConfigError("backend: must be live or mock");
    if (backend == "live") {
        if (chat_url.empty()) throw ConfigError("chat_url: required for the live backend");
        if (chat_model.empty()) throw ConfigError("chat_model: required for the live backend");
        if (embedding_url.empty()) throw ConfigError("embedding_url: required for the live backend");
        if (embedding_model.empty()) throw ConfigError("embedding_model: required for the live backend");
    }
    unit("membership_threshold", membership_threshold);
    unit("unseen_threshold", unseen_threshold);
    positive("own_points", own_points);
    positive("opposing_points", opposing_points);
    positive("topk", topk);
    positive("negatives", negatives);
    positive("max_in_flight", max_in_flight);
    positive("mock_embedding_dim", mock_embedding_dim);
    if (unseen_window_days < 0) throw ConfigError("unseen_window_days: must be non-negative");
    if (!(radius_scale > 0.0)) throw ConfigError("radius_scale: must be positive");
    if (!(canvas_width > 0.0) || !(canvas_height > 0.0)) throw ConfigError("canvas_width: canvas must be positive");
    if (requests_per_minute < 0.0) throw ConfigError("requests_per_minute: must be non-negative");
    static const std::vector<std::string> known = {"direct", "topk", "topk+metadata", "trp", "partisan",
                                                   "partisan+metadata"};
    for (const auto& m : eval_methods)
        if (std::find(known.begin(), known.end(), m) == known.end())
            throw ConfigError("eval_methods: unknown method '" + m + "'");
}

std::string describe(const PipelineConfig& c) {
    auto opt = [](const auto& o) { return o ? std::string(*o) : std::string(); };
    std::string out;
    auto put = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    put("articles", c.articles.string());
    put("bias_map", c.bias_map.string());
    put("events", c.events ? c.events->string() : "");
    put("candidates", c.candidates ? c.candidates->string() : "");
    put("output_dir", c.output_dir.string());
    put("cache_dir", c.cache_dir ? c.cache_dir->string() : "");
    put("backend", c.backend);
    put("chat_url", c.chat_url);
    put("chat_model", c.chat_model);
    put("embedding_url", c.embedding_url);
    put("embedding_model", c.embedding_model);
    put("api_key_env", c.api_key_env);
    put("mock_embedding_dim", std::to_string(c.mock_embedding_dim));
    put("max_in_flight", std::to_string(c.max_in_flight));
    put("requests_per_minute", num(c.requests_per_minute));
    put("membership_threshold", num(c.membership_threshold));
    put("unseen_threshold", num(c.unseen_threshold));
    put("unseen_window_days", std::to_string(c.unseen_window_days));
    put("own_points", std::to_string(c.own_points));
    put("opposing_points", std::to_string(c.opposing_points));
    put("topk", std::to_string(c.topk));
    put("negatives", std::to_string(c.negatives));
    put("evidence_limit", std::to_string(c.evidence_limit));
    put("eval_methods", text::join(c.eval_methods, ","));
    put("seed", std::to_string(c.seed));
    put("radius_scale", num(c.radius_scale));
    put("canvas_width", num(c.canvas_width));
    put("canvas_height", num(c.canvas_height));
    put("event", opt(c.event));
    put("issue", opt(c.issue));
    return out;
}

}  // namespace discourse::pipeline
