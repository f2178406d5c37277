#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/corpus.hpp"
#include "discourse/diagnostics.hpp"
#include "discourse/ptp.hpp"
#include "discourse/talking_points.hpp"

namespace discourse {

namespace gateway {
class ModelGateway;
}

inline constexpr std::size_t kMaxViewpointBullets = 3;

struct Viewpoint {
    int ptp_id = 0;
    Ideology ideology = Ideology::left;
    std::string title;
    std::vector<std::string> bullets;
    std::vector<std::string> supporting_point_ids;

    /// Title followed by "- bullet" lines.
    std::string text() const;
};

struct DigestEntry {
    std::string target;
    std::string actor;
    MediaFrame frame = MediaFrame::other;
    std::size_t count = 0;

    friend bool operator==(const DigestEntry&, const DigestEntry&) = default;
};

struct MetadataDigest {
    int ptp_id = 0;
    Ideology ideology = Ideology::left;
    std::vector<DigestEntry> positive_targets;
    std::vector<DigestEntry> negative_targets;

    /// Compact one-line-per-target rendering used in prompts.
    std::string text() const;
};

struct PartisanPerspective {
    int ptp_id = 0;
    std::optional<Viewpoint> left;
    std::optional<Viewpoint> right;
    std::optional<MetadataDigest> left_digest;
    std::optional<MetadataDigest> right_digest;

    bool left_partition_empty = false;
    bool right_partition_empty = false;

    bool one_sided() const { return left_partition_empty || right_partition_empty; }
    /// "two_sided", "left_only" or "right_only".
    std::string sidedness() const;
    const std::optional<Viewpoint>& viewpoint(Ideology side) const { return side == Ideology::left ? left : right; }
    const std::optional<MetadataDigest>& digest(Ideology side) const {
        return side == Ideology::left ? left_digest : right_digest;
    }
};

struct PerspectiveOptions {
    std::size_t own_points = 5;       // K
    std::size_t opposing_points = 3;  // M
};

/// Members of one side of a PTP ranked by similarity to the label (ties by
/// point id), truncated to `k`.
std::vector<const TalkingPoint*> top_partition_points(const PTPCluster& ptp, Ideology side, const PointIndex& points,
                                                      std::size_t k);

std::string conditioned_summary(const Article& article, Ideology ideology, const std::string& ptp_title,
                                gateway::ModelGateway& gateway);

/// One prompt line per point: summary followed by its activities.
std::string describe_point(const TalkingPoint& point);

/// Contrastive viewpoint of one side of a PTP. nullopt when that side has no
/// members or the reply stays unusable after one repair (with a diagnostic).
std::optional<Viewpoint> generate_viewpoint(const PTPCluster& ptp, Ideology side, const PointIndex& points,
                                            const EventCorpus& corpus, gateway::ModelGateway& gateway,
                                            Diagnostics& diagnostics, const PerspectiveOptions& options = {});

/// Top targets per sentiment over the more label-similar half of one side's
/// points, each with its most common actor and that actor's most common frame
/// on the target. Throws std::invalid_argument for an empty side.
MetadataDigest aggregate_metadata(const PTPCluster& ptp, Ideology side, const PointIndex& points);

struct PerspectiveRun {
    std::vector<PartisanPerspective> perspectives;  // ordered by ptp_id
    Diagnostics diagnostics;
};

/// Viewpoints and digests for every PTP; per-PTP requests run concurrently.
PerspectiveRun build_perspectives(const std::vector<PTPCluster>& ptps, const PointIndex& points,
                                  const EventCorpus& corpus, gateway::ModelGateway& gateway,
                                  const PerspectiveOptions& options = {});

struct FinetunePair {
    std::string article_id;
    std::string prompt_text;
    std::string chosen;
    std::string rejected;
    int ptp_id = 0;
    double similarity = 0.0;
};

/// For each two-sided PTP and side: the side's member articles ranked by
/// similarity to that side's viewpoint text, the top quarter (rounded up)
/// kept, each paired with its own side's viewpoint as preferred and the other
/// side's as rejected.
std::vector<FinetunePair> export_finetune_pairs(const std::vector<PTPCluster>& ptps,
                                                const std::vector<PartisanPerspective>& perspectives,
                                                const PointIndex& points, const EventCorpus& corpus,
                                                gateway::ModelGateway& gateway);

void write_finetune_pairs(const std::filesystem::path& path, const std::vector<FinetunePair>& pairs);

void to_json(nlohmann::json& j, const Viewpoint& v);
void from_json(const nlohmann::json& j, Viewpoint& v);
void to_json(nlohmann::json& j, const DigestEntry& e);
void from_json(const nlohmann::json& j, DigestEntry& e);
void to_json(nlohmann::json& j, const MetadataDigest& d);
void from_json(const nlohmann::json& j, MetadataDigest& d);
void to_json(nlohmann::json& j, const PartisanPerspective& p);
void from_json(const nlohmann::json& j, PartisanPerspective& p);
void to_json(nlohmann::json& j, const FinetunePair& p);

}  // namespace discourse
