#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/diagnostics.hpp"
#include "discourse/embedding.hpp"
#include "discourse/ideology.hpp"

namespace discourse {

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Date = std::chrono::sys_days;

/// Parses the leading YYYY-MM-DD of an ISO-8601 date or timestamp.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

struct Article {
    std::string id;
    std::string event_id;
    std::string title;
    std::string body;
    std::string source;
    Ideology bias = Ideology::left;
    Date published_at{};
    std::string issue;  // optional, empty when the record carries none

    /// Title and body joined; what gets embedded and shown to the model.
    std::string full_text() const;
};

struct Event {
    std::string id;
    std::string issue;
    std::string title;
    std::string description;
    std::vector<std::string> article_ids;
    std::optional<EmbeddingVector> centroid;
};

struct IssueStats {
    std::size_t articles = 0;
    std::size_t events = 0;
    friend bool operator==(const IssueStats&, const IssueStats&) = default;
};

/// Events plus their articles. Immutable after loading apart from centroid
/// attachment, so it can be shared freely between readers.
class EventCorpus {
public:
    EventCorpus() = default;
    EventCorpus(std::vector<Event> events, std::map<std::string, Article> articles);

    const std::vector<Event>& events() const { return events_; }
    const std::map<std::string, Article>& articles() const { return articles_; }
    const std::map<std::string, IssueStats>& stats() const { return stats_; }

    const Article& article(const std::string& id) const;
    const Article* find_article(const std::string& id) const;
    const Event* find_event(const std::string& id) const;

    /// Sets each event's centroid to the normalized mean of its member
    /// article embeddings. Throws CorpusError if a member has no embedding.
    void attach_centroids(const std::map<std::string, EmbeddingVector>& article_embeddings);

    /// Per-issue counts recomputed from event membership.
    std::map<std::string, IssueStats> recompute_stats() const;

    nlohmann::json stats_json() const;

private:
    std::vector<Event> events_;
    std::map<std::string, Article> articles_;
    std::map<std::string, IssueStats> stats_;
};

/// Maps canonical article field names onto the column names of a given
/// upstream dump (e.g. {"body", "content"}).
struct FieldMapping {
    std::map<std::string, std::string> columns;
    std::string column(const std::string& canonical) const;
};

struct LoadOptions {
    FieldMapping fields;
    /// Throw on the first malformed record instead of skipping it.
    bool strict = false;
    /// Optional JSON Lines file with {id, issue, title, description} per event.
    std::optional<std::filesystem::path> events_path;
};

struct LoadReport {
    std::size_t lines_read = 0;
    std::size_t articles_loaded = 0;
    std::size_t dropped_unknown_outlet = 0;
    std::map<std::string, std::size_t> unknown_outlets;
    Diagnostics malformed;

    nlohmann::json to_json() const;
};

struct LoadResult {
    EventCorpus corpus;
    LoadReport report;
};

using BiasMap = std::map<std::string, Ideology>;

/// CSV with header `source,bias`; double-quoted fields may contain commas.
BiasMap load_bias_map(const std::filesystem::path& path);

/// Reads JSON Lines articles. Records from outlets missing in the bias map are
/// dropped and counted; malformed records become diagnostics (with their line
/// number) unless options.strict is set.
std::vector<Article> load_articles(const std::filesystem::path& path, const BiasMap& bias_map,
                                   const LoadOptions& options, LoadReport& report);

LoadResult load_corpus(const std::filesystem::path& articles_path, const std::filesystem::path& bias_map_path,
                       const LoadOptions& options = {});

struct Candidate {
    Article article;
    std::optional<EmbeddingVector> embedding;
};

struct UnseenArticle {
    Article article;
    double similarity = 0.0;
};

/// [earliest, latest] publication date among the event's articles.
std::pair<Date, Date> event_date_span(const EventCorpus& corpus, const Event& event);

/// Candidates published within `window_days` of the event's date span, not
/// already part of the event, and at least `threshold` cosine-similar to the
/// event centroid. Sorted by similarity descending, then article id.
std::vector<UnseenArticle> select_unseen_articles(const EventCorpus& corpus, const std::vector<Candidate>& pool,
                                                  const Event& event, int window_days = 7,
                                                  double threshold = 0.86);

void to_json(nlohmann::json& j, const Article& a);

}  // namespace discourse
