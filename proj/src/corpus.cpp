#include "discourse/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "discourse/text.hpp"

namespace discourse {

namespace {

using nlohmann::json;
namespace chr = std::chrono;

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot read " + path.string());
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(text::trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw CorpusError("unterminated quote");
    fields.push_back(text::trim(cur));
    return fields;
}

std::optional<std::string> string_field(const json& record, const std::string& column) {
    auto it = record.find(column);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    return std::nullopt;
}

struct EventMeta {
    std::string issue;
    std::string title;
    std::string description;
};

std::map<std::string, EventMeta> load_event_meta(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::map<std::string, EventMeta> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        EventMeta meta;
        meta.issue = record.value("issue", "");
        meta.title = record.value("title", "");
        meta.description = record.value("description", "");
        out[record.at("id").get<std::string>()] = std::move(meta);
    }
    return out;
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view text) {
    const auto t = text::trim(text);
    if (t.size() < 10 || t[4] != '-' || t[7] != '-') return std::nullopt;
    if (t.size() > 10 && t[10] != 'T' && t[10] != ' ') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (t[i] < '0' || t[i] > '9') return std::nullopt;
    }
    y = std::stoi(t.substr(0, 4));
    m = static_cast<unsigned>(std::stoi(t.substr(5, 2)));
    d = static_cast<unsigned>(std::stoi(t.substr(8, 2)));
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_iso_date(Date date) {
    const chr::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string Article::full_text() const { return title.empty() ? body : title + "\n\n" + body; }

EventCorpus::EventCorpus(std::vector<Event> events, std::map<std::string, Article> articles)
    : events_(std::move(events)), articles_(std::move(articles)) {
    std::set<std::string> seen;
    for (const auto& e : events_) {
        if (e.article_ids.empty()) throw CorpusError("event " + e.id + " has no articles");
        for (const auto& id : e.article_ids) {
            if (!articles_.count(id)) throw CorpusError("event " + e.id + " references unknown article " + id);
            if (!seen.insert(id).second) throw CorpusError("article " + id + " belongs to more than one event");
        }
    }
    if (seen.size() != articles_.size()) throw CorpusError("some articles belong to no event");
    stats_ = recompute_stats();
}

const Article& EventCorpus::article(const std::string& id) const {
    auto it = articles_.find(id);
    if (it == articles_.end()) throw CorpusError("unknown article " + id);
    return it->second;
}

const Article* EventCorpus::find_article(const std::string& id) const {
    auto it = articles_.find(id);
    return it == articles_.end() ? nullptr : &it->second;
}

const Event* EventCorpus::find_event(const std::string& id) const {
    auto it = std::find_if(events_.begin(), events_.end(), [&](const Event& e) { return e.id == id; });
    return it == events_.end() ? nullptr : &*it;
}

void EventCorpus::attach_centroids(const std::map<std::string, EmbeddingVector>& article_embeddings) {
    for (auto& event : events_) {
        std::vector<EmbeddingVector> members;
        members.reserve(event.article_ids.size());
        for (const auto& id : event.article_ids) {
            auto it = article_embeddings.find(id);
            if (it == article_embeddings.end()) throw CorpusError("no embedding for article " + id);
            members.push_back(it->second);
        }
        event.centroid = mean_direction(members);
    }
}

std::map<std::string, IssueStats> EventCorpus::recompute_stats() const {
    std::map<std::string, IssueStats> stats;
    for (const auto& e : events_) {
        auto& s = stats[e.issue];
        s.events += 1;
        s.articles += e.article_ids.size();
    }
    return stats;
}

json EventCorpus::stats_json() const {
    json issues = json::object();
    std::size_t articles = 0;
    std::size_t events = 0;
    for (const auto& [issue, s] : stats_) {
        issues[issue] = {{"articles", s.articles}, {"events", s.events}};
        articles += s.articles;
        events += s.events;
    }
    return {{"issues", issues}, {"total", {{"articles", articles}, {"events", events}}}};
}

std::string FieldMapping::column(const std::string& canonical) const {
    auto it = columns.find(canonical);
    return it == columns.end() ? canonical : it->second;
}

json LoadReport::to_json() const {
    return {{"lines_read", lines_read},
            {"articles_loaded", articles_loaded},
            {"dropped_unknown_outlet", dropped_unknown_outlet},
            {"unknown_outlets", unknown_outlets},
            {"malformed", malformed}};
}

BiasMap load_bias_map(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    BiasMap out;
    std::string line;
    std::size_t lineno = 0;
    std::size_t source_col = 0;
    std::size_t bias_col = 1;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const CorpusError& e) {
            throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!header_seen) {
            header_seen = true;
            auto s = std::find(fields.begin(), fields.end(), "source");
            auto b = std::find(fields.begin(), fields.end(), "bias");
            if (s == fields.end() || b == fields.end()) {
                throw CorpusError(path.string() + ": header must name `source` and `bias` columns");
            }
            source_col = static_cast<std::size_t>(s - fields.begin());
            bias_col = static_cast<std::size_t>(b - fields.begin());
            continue;
        }
        if (fields.size() <= std::max(source_col, bias_col)) {
            throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": too few columns");
        }
        auto bias = parse_ideology(fields[bias_col]);
        if (!bias) {
            throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": unknown bias '" + fields[bias_col] + "'");
        }
        out[fields[source_col]] = *bias;
    }
    return out;
}

std::vector<Article> load_articles(const std::filesystem::path& path, const BiasMap& bias_map,
                                   const LoadOptions& options, LoadReport& report) {
    auto in = open_or_throw(path);
    std::vector<Article> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    const auto& f = options.fields;

    auto malformed = [&](const std::string& why) {
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        if (options.strict) throw CorpusError(where + ": " + why);
        report.malformed.push_back({where, why});
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        ++report.lines_read;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception&) {
            malformed("not valid JSON");
            continue;
        }
        if (!record.is_object()) {
            malformed("record is not a JSON object");
            continue;
        }
        Article a;
        std::string missing;
        auto take = [&](const char* canonical, std::string& into, bool required) {
            auto v = string_field(record, f.column(canonical));
            if (v) into = *v;
            if (required && text::trim(into).empty() && missing.empty()) missing = canonical;
        };
        std::string date;
        take("id", a.id, true);
        take("event_id", a.event_id, true);
        take("title", a.title, false);
        take("body", a.body, true);
        take("source", a.source, true);
        take("published_at", date, true);
        take("issue", a.issue, false);
        if (!missing.empty()) {
            malformed("missing or empty field `" + missing + "`");
            continue;
        }
        auto parsed = parse_iso_date(date);
        if (!parsed) {
            malformed("unparseable published_at '" + date + "'");
            continue;
        }
        a.published_at = *parsed;
        auto bias = bias_map.find(a.source);
        if (bias == bias_map.end()) {
            ++report.dropped_unknown_outlet;
            ++report.unknown_outlets[a.source];
            continue;
        }
        a.bias = bias->second;
        if (!ids.insert(a.id).second) {
            throw CorpusError(path.filename().string() + ":" + std::to_string(lineno) + ": duplicate article id " + a.id);
        }
        out.push_back(std::move(a));
    }
    report.articles_loaded += out.size();
    return out;
}

LoadResult load_corpus(const std::filesystem::path& articles_path, const std::filesystem::path& bias_map_path,
                       const LoadOptions& options) {
    const auto bias_map = load_bias_map(bias_map_path);
    LoadResult result;
    auto articles = load_articles(articles_path, bias_map, options, result.report);

    std::map<std::string, EventMeta> meta;
    if (options.events_path) meta = load_event_meta(*options.events_path);

    std::map<std::string, Event> by_id;
    std::map<std::string, Article> article_map;
    for (auto& a : articles) {
        auto& e = by_id[a.event_id];
        if (e.id.empty()) {
            e.id = a.event_id;
            auto m = meta.find(a.event_id);
            if (m != meta.end()) {
                e.issue = m->second.issue;
                e.title = m->second.title;
                e.description = m->second.description;
            }
        }
        if (e.issue.empty()) e.issue = a.issue;
        e.article_ids.push_back(a.id);
        article_map.emplace(a.id, std::move(a));
    }
    std::vector<Event> events;
    events.reserve(by_id.size());
    for (auto& [id, e] : by_id) events.push_back(std::move(e));
    result.corpus = EventCorpus(std::move(events), std::move(article_map));
    return result;
}

std::pair<Date, Date> event_date_span(const EventCorpus& corpus, const Event& event) {
    if (event.article_ids.empty()) throw CorpusError("event " + event.id + " has no articles");
    Date lo = Date::max();
    Date hi = Date::min();
    for (const auto& id : event.article_ids) {
        const auto d = corpus.article(id).published_at;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

std::vector<UnseenArticle> select_unseen_articles(const EventCorpus& corpus, const std::vector<Candidate>& pool,
                                                  const Event& event, int window_days, double threshold) {
    if (!event.centroid) throw CorpusError("event " + event.id + " has no centroid");
    for (const auto& c : pool) {
        if (!c.embedding) throw CorpusError("candidate " + c.article.id + " has no embedding");
    }
    const auto [lo, hi] = event_date_span(corpus, event);
    const Date from = lo - chr::days{window_days};
    const Date to = hi + chr::days{window_days};
    const std::set<std::string> members(event.article_ids.begin(), event.article_ids.end());

    std::vector<UnseenArticle> out;
    for (const auto& c : pool) {
        if (members.count(c.article.id)) continue;
        if (c.article.published_at < from || c.article.published_at > to) continue;
        const double sim = cosine_similarity(*c.embedding, *event.centroid);
        if (sim >= threshold) out.push_back({c.article, sim});
    }
    std::sort(out.begin(), out.end(), [](const UnseenArticle& a, const UnseenArticle& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.article.id < b.article.id;
    });
    return out;
}

void to_json(nlohmann::json& j, const Article& a) {
    j = json{{"id", a.id},         {"event_id", a.event_id}, {"title", a.title},
             {"body", a.body},     {"source", a.source},     {"bias", a.bias},
             {"published_at", format_iso_date(a.published_at)}};
    if (!a.issue.empty()) j["issue"] = a.issue;
}

}  // namespace discourse
