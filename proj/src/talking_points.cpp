#include "discourse/talking_points.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "discourse/gateway/gateway.hpp"
#include "discourse/lenient.hpp"
#include "discourse/text.hpp"

namespace discourse {

namespace {

using nlohmann::json;

struct FrameName {
    MediaFrame frame;
    const char* name;
};

constexpr FrameName kFrameNames[] = {
    {MediaFrame::economic, "Economic"},
    {MediaFrame::capacity_and_resources, "Capacity and Resources"},
    {MediaFrame::morality, "Morality"},
    {MediaFrame::fairness_and_equality, "Fairness and Equality"},
    {MediaFrame::legality, "Legality, Constitutionality, Jurisprudence"},
    {MediaFrame::policy_prescription, "Policy Prescription and Evaluation"},
    {MediaFrame::crime_and_punishment, "Crime and Punishment"},
    {MediaFrame::security_and_defense, "Security and Defense"},
    {MediaFrame::health_and_safety, "Health and Safety"},
    {MediaFrame::quality_of_life, "Quality of Life"},
    {MediaFrame::cultural_identity, "Cultural Identity"},
    {MediaFrame::public_opinion, "Public Opinion"},
    {MediaFrame::political, "Political"},
    {MediaFrame::external_regulation, "External Regulation and Reputation"},
    {MediaFrame::other, "Other"},
};

// Keys are in normalized form (see normalize_frame_text).
const std::map<std::string, MediaFrame>& frame_aliases() {
    static const std::map<std::string, MediaFrame> aliases = {
        {"economics", MediaFrame::economic},
        {"economy", MediaFrame::economic},
        {"financial", MediaFrame::economic},
        {"capacity", MediaFrame::capacity_and_resources},
        {"resources", MediaFrame::capacity_and_resources},
        {"capacity resources", MediaFrame::capacity_and_resources},
        {"moral", MediaFrame::morality},
        {"ethics", MediaFrame::morality},
        {"fairness", MediaFrame::fairness_and_equality},
        {"equality", MediaFrame::fairness_and_equality},
        {"fairness equality", MediaFrame::fairness_and_equality},
        {"legality", MediaFrame::legality},
        {"legal", MediaFrame::legality},
        {"law", MediaFrame::legality},
        {"constitutionality", MediaFrame::legality},
        {"jurisprudence", MediaFrame::legality},
        {"legality constitutionality and jurisprudence", MediaFrame::legality},
        {"policy", MediaFrame::policy_prescription},
        {"policy prescription", MediaFrame::policy_prescription},
        {"policy evaluation", MediaFrame::policy_prescription},
        {"policy prescription evaluation", MediaFrame::policy_prescription},
        {"crime", MediaFrame::crime_and_punishment},
        {"punishment", MediaFrame::crime_and_punishment},
        {"crime punishment", MediaFrame::crime_and_punishment},
        {"security", MediaFrame::security_and_defense},
        {"defense", MediaFrame::security_and_defense},
        {"defence", MediaFrame::security_and_defense},
        {"security defense", MediaFrame::security_and_defense},
        {"security and defence", MediaFrame::security_and_defense},
        {"health", MediaFrame::health_and_safety},
        {"safety", MediaFrame::health_and_safety},
        {"public health", MediaFrame::health_and_safety},
        {"health safety", MediaFrame::health_and_safety},
        {"quality life", MediaFrame::quality_of_life},
        {"culture", MediaFrame::cultural_identity},
        {"cultural", MediaFrame::cultural_identity},
        {"identity", MediaFrame::cultural_identity},
        {"opinion", MediaFrame::public_opinion},
        {"public sentiment", MediaFrame::public_opinion},
        {"politics", MediaFrame::political},
        {"politic", MediaFrame::political},
        {"external regulation", MediaFrame::external_regulation},
        {"reputation", MediaFrame::external_regulation},
        {"external reputation", MediaFrame::external_regulation},
        {"external regulation reputation", MediaFrame::external_regulation},
        {"international", MediaFrame::external_regulation},
        {"none", MediaFrame::other},
        {"misc", MediaFrame::other},
    };
    return aliases;
}

// Lowercase words only; "&" reads as "and".
std::string normalize_frame_text(std::string_view s) {
    std::string spaced;
    for (char c : s) spaced += c == '&' ? std::string(" and ") : std::string(1, c);
    return text::join(text::tokenize(spaced), " ");
}

std::optional<std::string> as_text(const json& v) {
    if (v.is_string()) {
        auto s = text::trim(v.get<std::string>());
        if (s.empty()) return std::nullopt;
        return s;
    }
    if (v.is_number()) return v.dump();
    return std::nullopt;
}

std::string describe(const json& v) {
    auto s = lenient::safe_dump(v);
    return s.size() > 80 ? s.substr(0, 77) + "..." : s;
}

std::optional<Activity> coerce_activity(const json& v, const std::string& where, Diagnostics& diags) {
    if (!v.is_object()) {
        diags.push_back({where, "activity is not an object: " + describe(v)});
        return std::nullopt;
    }
    Activity a;
    auto field = [&](const char* name) -> std::optional<std::string> {
        auto it = v.find(name);
        if (it == v.end()) return std::nullopt;
        return as_text(*it);
    };
    auto actor = field("actor");
    auto target = field("target");
    if (!actor || !target) {
        diags.push_back({where, std::string("activity dropped: missing ") + (!actor ? "actor" : "target")});
        return std::nullopt;
    }
    a.actor = *actor;
    a.target = *target;
    a.description = field("description").value_or("");

    std::optional<Sentiment> sentiment;
    if (auto it = v.find("sentiment"); it != v.end()) {
        if (it->is_number()) {
            const double x = it->get<double>();
            if (x > 0) sentiment = Sentiment::positive;
            if (x < 0) sentiment = Sentiment::negative;
        } else if (it->is_string()) {
            sentiment = parse_sentiment(it->get<std::string>());
        }
    }
    if (!sentiment) {
        diags.push_back({where, "activity dropped: sentiment is not positive or negative"});
        return std::nullopt;
    }
    a.sentiment = *sentiment;

    auto frame_text = field("frame");
    if (!frame_text) {
        diags.push_back({where, "activity frame missing, using Other"});
        a.frame = MediaFrame::other;
    } else if (auto f = parse_media_frame(*frame_text)) {
        a.frame = *f;
    } else {
        diags.push_back({where, "unknown frame \"" + *frame_text + "\", using Other"});
        a.frame = MediaFrame::other;
    }
    return a;
}

std::vector<std::string> coerce_entities(const json& v) {
    std::vector<std::string> out;
    auto add = [&](std::string s) {
        s = text::trim(s);
        if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    };
    if (v.is_array()) {
        for (const auto& e : v)
            if (auto s = as_text(e)) add(*s);
    } else if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t start = 0;
        while (start <= s.size()) {
            auto comma = s.find(',', start);
            if (comma == std::string::npos) comma = s.size();
            add(s.substr(start, comma - start));
            start = comma + 1;
        }
    }
    return out;
}

const json* find_point_list(const json& root) {
    if (root.is_array()) return &root;
    if (!root.is_object()) return nullptr;
    for (const char* key : {"talking_points", "talkingPoints", "points", "key_talking_points"}) {
        auto it = root.find(key);
        if (it != root.end() && it->is_array()) return &*it;
    }
    return nullptr;
}

}  // namespace

const std::array<MediaFrame, kMediaFrameCount> kMediaFrames = [] {
    std::array<MediaFrame, kMediaFrameCount> out{};
    for (std::size_t i = 0; i < kMediaFrameCount; ++i) out[i] = kFrameNames[i].frame;
    return out;
}();

std::string to_string(MediaFrame frame) {
    for (const auto& f : kFrameNames)
        if (f.frame == frame) return f.name;
    return "Other";
}

std::optional<MediaFrame> parse_media_frame(std::string_view raw) {
    const auto key = normalize_frame_text(raw);
    if (key.empty()) return std::nullopt;
    for (const auto& f : kFrameNames)
        if (normalize_frame_text(f.name) == key) return f.frame;
    const auto& aliases = frame_aliases();
    if (auto it = aliases.find(key); it != aliases.end()) return it->second;

    // Typos: the unique frame whose name or alias is within a small edit distance.
    const std::size_t allowed = key.size() < 5 ? 1 : 2;
    std::size_t best_distance = allowed + 1;
    std::set<MediaFrame> nearest;
    auto consider = [&](const std::string& candidate, MediaFrame frame) {
        const auto d = text::levenshtein(key, candidate);
        if (d < best_distance) {
            best_distance = d;
            nearest = {frame};
        } else if (d == best_distance) {
            nearest.insert(frame);
        }
    };
    for (const auto& f : kFrameNames) consider(normalize_frame_text(f.name), f.frame);
    for (const auto& [alias, frame] : aliases) consider(alias, frame);
    if (best_distance > allowed || nearest.size() != 1) return std::nullopt;
    return *nearest.begin();
}

std::string media_frame_menu() {
    std::vector<std::string> names;
    for (const auto& f : kFrameNames) names.emplace_back(f.name);
    return text::join(names, "; ");
}

std::string to_string(Sentiment sentiment) {
    return sentiment == Sentiment::positive ? "positive" : "negative";
}

std::optional<Sentiment> parse_sentiment(std::string_view raw) {
    const auto s = text::to_lower(text::trim(raw));
    if (s == "positive" || s == "pos" || s == "+" || s == "+1" || s == "1") return Sentiment::positive;
    if (s == "negative" || s == "neg" || s == "-" || s == "-1") return Sentiment::negative;
    return std::nullopt;
}

std::string talking_point_id(const std::string& article_id, std::size_t index) {
    return article_id + "#" + std::to_string(index);
}

std::vector<std::string> validate(const TalkingPoint& point, const Article* article) {
    std::vector<std::string> problems;
    if (point.id.empty()) problems.push_back("id is empty");
    if (point.article_id.empty()) problems.push_back("article_id is empty");
    if (text::trim(point.summary).empty()) problems.push_back("summary is empty");
    for (std::size_t i = 0; i < point.activities.size(); ++i) {
        const auto& a = point.activities[i];
        const auto tag = "activity " + std::to_string(i);
        if (text::trim(a.actor).empty()) problems.push_back(tag + ": actor is empty");
        if (text::trim(a.target).empty()) problems.push_back(tag + ": target is empty");
        for (const auto* name : {&a.actor, &a.target})
            if (!name->empty() && std::find(point.entities.begin(), point.entities.end(), *name) == point.entities.end())
                problems.push_back(tag + ": entity \"" + *name + "\" missing from entities");
    }
    if (point.embedding && !point.embedding->is_unit()) problems.push_back("embedding is not unit-normalized");
    if (article) {
        if (article->id != point.article_id) problems.push_back("article_id does not match the article");
        if (article->bias != point.ideology) problems.push_back("ideology differs from the article's bias");
    }
    return problems;
}

void close_entities(TalkingPoint& point) {
    for (const auto& a : point.activities)
        for (const auto* name : {&a.actor, &a.target})
            if (std::find(point.entities.begin(), point.entities.end(), *name) == point.entities.end())
                point.entities.push_back(*name);
}

ParseOutcome parse_talking_point_response(std::string_view raw, const std::string& article_id, Ideology bias) {
    ParseOutcome out;
    const std::string where = "article " + article_id;
    auto parsed = lenient::parse_json(raw);
    if (!parsed.value) {
        out.diagnostics.push_back({where, "no JSON found in reply"});
        return out;
    }
    out.repaired = parsed.repaired;
    if (parsed.repaired) out.diagnostics.push_back({where, "reply needed JSON repair"});

    const json& root = *parsed.value;
    std::vector<json> items;
    if (const json* list = find_point_list(root)) {
        items.assign(list->begin(), list->end());
    } else if (root.is_object() && root.contains("summary")) {
        items.push_back(root);
    } else {
        out.diagnostics.push_back({where, "reply has no talking point list"});
        return out;
    }

    std::vector<TalkingPoint> points;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto item_where = where + " point " + std::to_string(i);
        const json& item = items[i];
        if (!item.is_object()) {
            out.diagnostics.push_back({item_where, "point dropped: not an object: " + describe(item)});
            continue;
        }
        auto summary = item.contains("summary") ? as_text(item["summary"]) : std::nullopt;
        if (!summary) {
            out.diagnostics.push_back({item_where, "point dropped: missing summary"});
            continue;
        }
        TalkingPoint p;
        p.article_id = article_id;
        p.ideology = bias;
        p.summary = *summary;
        if (auto it = item.find("entities"); it != item.end()) p.entities = coerce_entities(*it);
        if (auto it = item.find("activities"); it != item.end()) {
            if (it->is_object()) {
                if (auto a = coerce_activity(*it, item_where, out.diagnostics)) p.activities.push_back(*a);
            } else if (it->is_array()) {
                for (const auto& a : *it)
                    if (auto act = coerce_activity(a, item_where, out.diagnostics)) p.activities.push_back(*act);
            } else if (!it->is_null()) {
                out.diagnostics.push_back({item_where, "activities ignored: not a list"});
            }
        }
        close_entities(p);
        points.push_back(std::move(p));
    }
    if (points.size() > kMaxPointsPerArticle) {
        out.diagnostics.push_back({where, "reply had " + std::to_string(points.size()) +
                                              " valid points, keeping the first " +
                                              std::to_string(kMaxPointsPerArticle)});
        points.resize(kMaxPointsPerArticle);
    }
    for (std::size_t k = 0; k < points.size(); ++k) points[k].id = talking_point_id(article_id, k);
    out.points = std::move(points);
    return out;
}

namespace {

gateway::ChatRequest extraction_request(const Article& article, const gateway::ModelGateway& gw) {
    return gateway::make_request("extract_talking_points",
                                 {{"frames", media_frame_menu()}, {"title", article.title}, {"body", article.body}},
                                 gw.prompts());
}

gateway::ChatRequest repair_request(const std::string& malformed, const gateway::ModelGateway& gw) {
    return gateway::make_request("repair_json", {{"malformed", malformed}}, gw.prompts());
}

// Folds a parse outcome into the result; false when nothing was recoverable.
bool absorb(ParseOutcome parsed, ExtractionResult& result) {
    append(result.diagnostics, parsed.diagnostics);
    if (!parsed.points) return false;
    result.points = std::move(*parsed.points);
    return true;
}

}  // namespace

ExtractionResult extract_talking_points(const Article& article, gateway::ModelGateway& gw) {
    ExtractionResult result;
    const std::string where = "article " + article.id;
    try {
        const auto raw = gw.complete(extraction_request(article, gw));
        if (absorb(parse_talking_point_response(raw, article.id, article.bias), result)) return result;
        const auto fixed = gw.complete(repair_request(raw.empty() ? std::string("(empty reply)") : raw, gw));
        if (absorb(parse_talking_point_response(fixed, article.id, article.bias), result)) return result;
        result.diagnostics.push_back({where, "skipped: reply unparseable after repair"});
    } catch (const gateway::AuthenticationError&) {
        throw;
    } catch (const gateway::GatewayError& e) {
        result.diagnostics.push_back({where, std::string("skipped: backend failure: ") + e.what()});
    }
    result.skipped = true;
    result.points.clear();
    return result;
}

BatchExtraction extract_all(const std::vector<const Article*>& input, gateway::ModelGateway& gw) {
    std::vector<const Article*> articles = input;
    std::sort(articles.begin(), articles.end(), [](const Article* a, const Article* b) { return a->id < b->id; });

    std::vector<gateway::ChatRequest> requests;
    requests.reserve(articles.size());
    for (const auto* a : articles) requests.push_back(extraction_request(*a, gw));
    const auto first = gw.complete_all(requests);

    std::vector<ExtractionResult> results(articles.size());
    std::vector<std::size_t> needs_repair;
    std::vector<gateway::ChatRequest> repairs;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        const auto& a = *articles[i];
        if (!first[i].ok()) {
            results[i].diagnostics.push_back({"article " + a.id, "skipped: backend failure: " + first[i].error});
            results[i].skipped = true;
            continue;
        }
        if (!absorb(parse_talking_point_response(*first[i].text, a.id, a.bias), results[i])) {
            needs_repair.push_back(i);
            const auto& raw = *first[i].text;
            repairs.push_back(repair_request(raw.empty() ? std::string("(empty reply)") : raw, gw));
        }
    }
    const auto second = gw.complete_all(repairs);
    for (std::size_t r = 0; r < needs_repair.size(); ++r) {
        const auto i = needs_repair[r];
        const auto& a = *articles[i];
        const std::string where = "article " + a.id;
        if (!second[r].ok()) {
            results[i].diagnostics.push_back({where, "skipped: repair failed: " + second[r].error});
            results[i].skipped = true;
        } else if (!absorb(parse_talking_point_response(*second[r].text, a.id, a.bias), results[i])) {
            results[i].diagnostics.push_back({where, "skipped: reply unparseable after repair"});
            results[i].skipped = true;
        }
    }

    BatchExtraction batch;
    for (auto& r : results) {
        if (r.skipped) ++batch.articles_skipped;
        append(batch.diagnostics, r.diagnostics);
        for (auto& p : r.points) batch.points.push_back(std::move(p));
    }
    return batch;
}

void to_json(json& j, const Activity& a) {
    j = json{{"description", a.description},
             {"actor", a.actor},
             {"target", a.target},
             {"sentiment", to_string(a.sentiment)},
             {"frame", to_string(a.frame)}};
}

void from_json(const json& j, Activity& a) {
    a.description = j.value("description", "");
    a.actor = j.at("actor").get<std::string>();
    a.target = j.at("target").get<std::string>();
    auto s = parse_sentiment(j.at("sentiment").get<std::string>());
    if (!s) throw std::invalid_argument("bad sentiment in activity");
    a.sentiment = *s;
    a.frame = parse_media_frame(j.at("frame").get<std::string>()).value_or(MediaFrame::other);
}

void to_json(json& j, const TalkingPoint& p) {
    j = json{{"id", p.id},
             {"article_id", p.article_id},
             {"summary", p.summary},
             {"entities", p.entities},
             {"activities", p.activities},
             {"ideology", p.ideology}};
    if (p.embedding) j["embedding"] = *p.embedding;
}

void from_json(const json& j, TalkingPoint& p) {
    p.id = j.at("id").get<std::string>();
    p.article_id = j.at("article_id").get<std::string>();
    p.summary = j.at("summary").get<std::string>();
    p.entities = j.value("entities", std::vector<std::string>{});
    p.activities = j.value("activities", std::vector<Activity>{});
    p.ideology = j.at("ideology").get<Ideology>();
    if (j.contains("embedding")) p.embedding = j["embedding"].get<EmbeddingVector>();
    else p.embedding.reset();
}

void write_talking_points(const std::filesystem::path& path, const std::vector<TalkingPoint>& points) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& p : points) out << lenient::safe_dump(json(p)) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TalkingPoint> read_talking_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<TalkingPoint> points;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            points.push_back(json::parse(line).get<TalkingPoint>());
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return points;
}

}  // namespace discourse
