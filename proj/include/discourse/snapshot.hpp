#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/diagnostics.hpp"
#include "discourse/perspectives.hpp"
#include "discourse/ptp.hpp"

namespace discourse {

namespace gateway {
class ModelGateway;
}

inline constexpr std::array<const char*, 5> kAgreementQuestions = {
    "Do both summaries have at least one common aspect of discussion?",
    "Are the summaries discussing about similar entities?",
    "Are the entities in common viewed in the same manner? For example, is the entity viewed positively or "
    "negatively in both the summaries?",
    "Do both the summaries talk about the event from the same perspective?",
    "If the summaries are viewing the event from different angles, do the summaries have atleast some agreement "
    "with each other?",
};

struct AgreementScore {
    int ptp_id = 0;
    std::array<int, 5> answers{};  // each 0 or 1
    int total = 0;                 // sum of answers
};

/// Scores 0 for a question whose answer is missing or unparseable, with a
/// diagnostic.
AgreementScore agreement_score(const Viewpoint& left, const Viewpoint& right, gateway::ModelGateway& gw,
                               Diagnostics& diagnostics);

/// Scores every two-sided perspective, fanning all questions out at once.
/// Result is ordered by ptp id.
std::vector<AgreementScore> score_agreements(const std::vector<PartisanPerspective>& perspectives,
                                             gateway::ModelGateway& gw, Diagnostics& diagnostics);

enum class SnapshotCategory { agreement, disagreement, agenda_setting, partisan_battle, left_only, right_only };

std::string to_string(SnapshotCategory category);
std::optional<SnapshotCategory> parse_snapshot_category(const std::string& text);

inline constexpr double kAgendaSettingBias = 0.6;
inline constexpr double kPartisanBattleBias = 0.25;
inline constexpr int kDisagreementMaxTotal = 3;

struct SnapshotOptions {
    double radius_scale = 4.0;  // radius = radius_scale * sqrt(frequency)
    double width = 800.0;
    double height = 600.0;
    double margin = 60.0;
    double y_extent = 1.4;  // y domain is [-y_extent, y_extent]
};

struct SnapshotEntry {
    int ptp_id = 0;
    std::string title;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
    double x = 0.0;  // (R - L) / (R + L); negative = left-dominant
    double y = 0.0;  // (total - 3.5) / 2.5; 0 for one-sided
    double radius = 0.0;
    std::optional<int> total;
    SnapshotCategory category = SnapshotCategory::agreement;

    std::size_t frequency() const { return left_count + right_count; }
};

/// One entry per PTP, ordered by id. Throws std::invalid_argument when a
/// two-sided PTP has no score or a PTP has no members.
std::vector<SnapshotEntry> build_snapshot(const std::vector<PTPCluster>& ptps,
                                          const std::vector<AgreementScore>& scores,
                                          const SnapshotOptions& options = {});

/// Canvas position of a data point.
std::pair<double, double> canvas_point(double x, double y, const SnapshotOptions& options);

/// Throws std::invalid_argument for no entries.
std::string render_svg(const std::vector<SnapshotEntry>& entries, const SnapshotOptions& options = {});

nlohmann::json snapshot_json(const std::vector<SnapshotEntry>& entries, const SnapshotOptions& options = {});

/// Writes `<stem>.svg` and `<stem>.json` into `dir`.
void write_snapshot(const std::filesystem::path& dir, const std::vector<SnapshotEntry>& entries,
                    const SnapshotOptions& options = {}, const std::string& stem = "snapshot");

void to_json(nlohmann::json& j, const AgreementScore& s);
void from_json(const nlohmann::json& j, AgreementScore& s);
void to_json(nlohmann::json& j, const SnapshotEntry& e);

}  // namespace discourse
