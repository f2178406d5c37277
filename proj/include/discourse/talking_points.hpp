#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/corpus.hpp"
#include "discourse/diagnostics.hpp"
#include "discourse/embedding.hpp"
#include "discourse/ideology.hpp"

namespace discourse {

namespace gateway {
class ModelGateway;
}

/// The 15 generic media frames of the Boydstun taxonomy.
enum class MediaFrame {
    economic,
    capacity_and_resources,
    morality,
    fairness_and_equality,
    legality,
    policy_prescription,
    crime_and_punishment,
    security_and_defense,
    health_and_safety,
    quality_of_life,
    cultural_identity,
    public_opinion,
    political,
    external_regulation,
    other,
};

inline constexpr std::size_t kMediaFrameCount = 15;
extern const std::array<MediaFrame, kMediaFrameCount> kMediaFrames;

/// Canonical display name, e.g. "Legality, Constitutionality, Jurisprudence".
std::string to_string(MediaFrame frame);

/// Case-insensitive match against canonical names, then an alias table, then
/// a small edit-distance tolerance. nullopt when nothing matches.
std::optional<MediaFrame> parse_media_frame(std::string_view text);

/// All canonical frame names joined by "; ", as listed in the extraction prompt.
std::string media_frame_menu();

enum class Sentiment { positive, negative };

std::string to_string(Sentiment sentiment);
std::optional<Sentiment> parse_sentiment(std::string_view text);

struct Activity {
    std::string description;
    std::string actor;
    std::string target;
    Sentiment sentiment = Sentiment::negative;
    MediaFrame frame = MediaFrame::other;

    friend bool operator==(const Activity&, const Activity&) = default;
};

struct TalkingPoint {
    std::string id;  // "<article_id>#<k>"
    std::string article_id;
    std::string summary;
    std::vector<std::string> entities;
    std::vector<Activity> activities;
    Ideology ideology = Ideology::left;
    std::optional<EmbeddingVector> embedding;

    friend bool operator==(const TalkingPoint&, const TalkingPoint&) = default;
};

inline constexpr std::size_t kMaxPointsPerArticle = 4;

std::string talking_point_id(const std::string& article_id, std::size_t index);

/// Every broken invariant of the point, empty when valid. When `article` is
/// given the point's ideology must match its bias.
std::vector<std::string> validate(const TalkingPoint& point, const Article* article = nullptr);

/// Appends every activity actor/target missing from `entities`.
void close_entities(TalkingPoint& point);

struct ParseOutcome {
    /// nullopt when no JSON value could be recovered at all.
    std::optional<std::vector<TalkingPoint>> points;
    Diagnostics diagnostics;
    bool repaired = false;
};

/// Strict-then-lenient parse of an extraction reply. Accepts
/// {"talking_points": [...]}, a bare array, or a single point object; coerces
/// field types where the meaning is clear and itemizes everything dropped.
/// Keeps at most kMaxPointsPerArticle points. Never throws.
ParseOutcome parse_talking_point_response(std::string_view raw, const std::string& article_id, Ideology bias);

struct ExtractionResult {
    std::vector<TalkingPoint> points;
    Diagnostics diagnostics;
    bool skipped = false;  // the article produced no parseable reply
};

/// Extracts up to four points from one article. A reply that cannot be parsed
/// gets one repair round trip; if that fails too the article is skipped.
ExtractionResult extract_talking_points(const Article& article, gateway::ModelGateway& gateway);

struct BatchExtraction {
    std::vector<TalkingPoint> points;  // ordered by article id, then index
    Diagnostics diagnostics;
    std::size_t articles_skipped = 0;
};

/// Runs extraction over many articles concurrently through the gateway.
BatchExtraction extract_all(const std::vector<const Article*>& articles, gateway::ModelGateway& gateway);

void to_json(nlohmann::json& j, const Activity& a);
void from_json(const nlohmann::json& j, Activity& a);
void to_json(nlohmann::json& j, const TalkingPoint& p);
void from_json(const nlohmann::json& j, TalkingPoint& p);

void write_talking_points(const std::filesystem::path& path, const std::vector<TalkingPoint>& points);
std::vector<TalkingPoint> read_talking_points(const std::filesystem::path& path);

}  // namespace discourse
