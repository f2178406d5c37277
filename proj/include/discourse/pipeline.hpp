#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/gateway/backend.hpp"

namespace discourse::pipeline {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A stage's input artifact is absent; the message names the file.
class MissingPrerequisite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::filesystem::path articles;
    std::filesystem::path bias_map;
    std::optional<std::filesystem::path> events;
    std::optional<std::filesystem::path> candidates;
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> cache_dir;

    std::string backend = "mock";  // live | mock
    std::string chat_url;
    std::string chat_model;
    std::string embedding_url;
    std::string embedding_model;
    std::string api_key_env = "DISCOURSE_API_KEY";
    std::size_t mock_embedding_dim = 256;
    std::size_t max_in_flight = 4;
    double requests_per_minute = 0.0;

    double membership_threshold = 0.85;
    double unseen_threshold = 0.86;
    int unseen_window_days = 7;
    std::size_t own_points = 5;       // K
    std::size_t opposing_points = 3;  // M
    std::size_t topk = 3;
    std::size_t negatives = 3;
    std::size_t evidence_limit = 10;
    std::vector<std::string> eval_methods = {"direct", "topk", "topk+metadata", "trp", "partisan",
                                             "partisan+metadata"};
    std::uint64_t seed = 0;

    double radius_scale = 4.0;
    double canvas_width = 800.0;
    double canvas_height = 600.0;

    std::optional<std::string> event;  // restrict to one event id
    std::optional<std::string> issue;  // restrict to one issue

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// The process environment.
std::optional<std::string> process_env(const std::string& name);

/// Applies one `key = value` setting. `${NAME}` in the value is replaced
/// from `env`; relative paths resolve against `base_dir`.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir, const EnvLookup& env = process_env);

/// `key = value` lines; `#` starts a comment; blank lines ignored.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const EnvLookup& env = process_env);

PipelineConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

/// The settings as `key = value` lines, in a fixed order.
std::string describe(const PipelineConfig& config);

enum class Stage { ingest, extract, cluster, perspectives, evaluate, snapshot, export_finetune };

inline constexpr Stage kStageOrder[] = {Stage::ingest,   Stage::extract,  Stage::cluster,        Stage::perspectives,
                                        Stage::evaluate, Stage::snapshot, Stage::export_finetune};

std::string to_string(Stage stage);
std::optional<Stage> parse_stage(const std::string& text);

/// Stages a command expands to; "all" is every stage in order.
std::vector<Stage> expand_command(const std::string& command);

struct StageOutcome {
    Stage stage = Stage::ingest;
    std::string event;  // empty for corpus-wide stages
    bool ran = false;   // false: inputs unchanged, previous artifacts kept
    std::map<std::string, std::string> artifacts;  // file name -> sha256
    std::size_t diagnostics = 0;

    nlohmann::json to_json() const;
};

struct Backends {
    std::shared_ptr<gateway::ChatBackend> chat;
    std::shared_ptr<gateway::EmbeddingBackend> embedding;
};

/// Offline rule-based chat and lexical embeddings, or HTTP endpoints.
Backends make_backends(const PipelineConfig& config);

/// Runs stages over the configured events, skipping any whose recorded
/// input checksums still match. Summaries go to `summary_out`, one JSON
/// object per line.
class Runner {
public:
    Runner(PipelineConfig config, Backends backends);
    ~Runner();

    std::vector<StageOutcome> run(const std::vector<Stage>& stages, std::ostream* summary_out = nullptr);
    StageOutcome run_stage(Stage stage, const std::string& event_id);

    /// Event ids selected by the --event / --issue filters, sorted.
    std::vector<std::string> selected_events();

private:
    struct State;
    std::unique_ptr<State> state_;
};

}  // namespace discourse::pipeline
