#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/gateway/mock.hpp"
#include "discourse/hashing.hpp"
#include "discourse/lenient.hpp"
#include "discourse/text.hpp"

namespace discourse::gateway {
namespace {

using nlohmann::json;

const std::string& var(const ChatRequest& request, const std::string& name) {
    static const std::string empty;
    auto it = request.variables.find(name);
    return it == request.variables.end() ? empty : it->second;
}

std::set<std::string> word_set(const std::string& s) {
    auto words = text::content_words(s);
    return {words.begin(), words.end()};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t common = 0;
    for (const auto& w : a) common += b.count(w);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t common = 0;
    for (const auto& w : a) common += b.count(w);
    return common;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find('\n', start);
        if (end == std::string::npos) end = s.size();
        auto line = text::trim(std::string_view(s).substr(start, end - start));
        if (!line.empty()) out.push_back(line);
        start = end + 1;
    }
    return out;
}

std::string strip_bullet(std::string line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == ' ')) ++i;
    line = line.substr(i);
    // "[id] text" prefixes used in rendered point lists
    if (!line.empty() && line.front() == '[') {
        auto close = line.find(']');
        if (close != std::string::npos) line = text::trim(line.substr(close + 1));
    }
    return line;
}

// Capitalized words that do not start a sentence, merged into runs.
std::vector<std::string> capitalized_runs(const std::string& sentence) {
    std::vector<std::string> runs;
    std::string current;
    std::size_t i = 0;
    bool first_word = true;
    auto flush = [&] {
        if (!current.empty()) runs.push_back(current);
        current.clear();
    };
    while (i < sentence.size()) {
        while (i < sentence.size() && !std::isalnum(static_cast<unsigned char>(sentence[i]))) {
            if (sentence[i] != ' ') flush();
            ++i;
        }
        std::size_t j = i;
        while (j < sentence.size() && (std::isalnum(static_cast<unsigned char>(sentence[j])) || sentence[j] == '-'))
            ++j;
        if (j == i) break;
        std::string word = sentence.substr(i, j - i);
        const bool cap = std::isupper(static_cast<unsigned char>(word[0]));
        if (cap && !(first_word && text::is_stopword(text::to_lower(word)))) {
            if (!current.empty()) current += ' ';
            current += word;
        } else {
            flush();
        }
        first_word = false;
        i = j;
    }
    flush();
    return runs;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& frame_cues() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> cues = {
        {"Economic", {"cost", "costs", "jobs", "economy", "economic", "tax", "taxes", "price", "prices", "spending", "budget", "market", "wages"}},
        {"Health and Safety", {"health", "virus", "vaccine", "vaccines", "hospital", "disease", "safety", "masks", "pandemic"}},
        {"Legality, Constitutionality, Jurisprudence", {"court", "judge", "lawsuit", "legal", "constitution", "constitutional", "ruling", "law"}},
        {"Crime and Punishment", {"crime", "arrest", "arrested", "charged", "prosecutors", "riot", "police", "prison"}},
        {"Security and Defense", {"border", "security", "military", "defense", "threat", "terror"}},
        {"Policy Prescription and Evaluation", {"policy", "plan", "bill", "proposal", "regulation", "regulations", "executive", "order", "reform"}},
        {"Public Opinion", {"poll", "polls", "voters", "public", "protest", "protesters", "survey"}},
        {"Morality", {"moral", "immoral", "values", "faith", "religious"}},
        {"Fairness and Equality", {"fair", "unfair", "equality", "inequality", "justice", "rights"}},
        {"Capacity and Resources", {"resources", "capacity", "shortage", "supply", "funding"}},
        {"Quality of Life", {"families", "communities", "lives", "living", "homes"}},
        {"Cultural Identity", {"culture", "identity", "heritage", "tradition"}},
        {"External Regulation and Reputation", {"international", "allies", "foreign", "global", "treaty", "paris"}},
        {"Political", {"senator", "congress", "democrats", "republicans", "election", "president", "administration", "party", "lawmakers"}},
    };
    return cues;
}

std::string guess_frame(const std::string& sentence) {
    const auto words = word_set(sentence);
    std::string best = "Other";
    std::size_t best_hits = 0;
    for (const auto& [frame, cues] : frame_cues()) {
        std::size_t hits = 0;
        for (const auto& c : cues) hits += words.count(c);
        if (hits > best_hits) {
            best = frame;
            best_hits = hits;
        }
    }
    return best;
}

const std::set<std::string>& negative_cues() {
    static const std::set<std::string> cues = {
        "criticized", "criticize", "blamed", "blame", "attacked", "condemned", "opposed", "rejected", "warned",
        "accused", "slammed", "failed", "threatens", "threatened", "harm", "harms", "hurt", "hurts", "against",
        "denounced", "undermined", "undermines", "destroy", "destroys", "sued", "killed", "crisis", "chaos"};
    return cues;
}

std::string guess_sentiment(const std::string& sentence) {
    for (const auto& w : text::tokenize(sentence))
        if (negative_cues().count(w)) return "negative";
    return "positive";
}

std::string extract_points(const ChatRequest& request) {
    json points = json::array();
    for (const auto& sentence : text::split_sentences(var(request, "body"))) {
        if (points.size() == 4) break;
        auto runs = capitalized_runs(sentence);
        if (runs.empty()) continue;
        const std::string actor = runs.front();
        const std::string target = runs.size() > 1 ? runs[1] : std::string("the public");
        json entities = json::array();
        for (const auto& r : runs) entities.push_back(r);
        json activity = {{"description", sentence},
                         {"actor", actor},
                         {"target", target},
                         {"sentiment", guess_sentiment(sentence)},
                         {"frame", guess_frame(sentence)}};
        points.push_back({{"summary", sentence}, {"entities", entities}, {"activities", json::array({activity})}});
    }
    return json{{"talking_points", points}}.dump();
}

std::string title_case(const std::string& word) {
    std::string out = word;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string label_points(const ChatRequest& request) {
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> summaries;
    for (const auto& line : lines_of(var(request, "points"))) {
        const auto summary = strip_bullet(line);
        summaries.push_back(summary);
        for (const auto& w : word_set(summary)) ++counts[w];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> top, keywords;
    for (std::size_t i = 0; i < ranked.size() && keywords.size() < 8; ++i) {
        if (top.size() < 3) top.push_back(title_case(ranked[i].first));
        keywords.push_back(ranked[i].first);
    }
    const std::string aspect = top.empty() ? "General Coverage" : text::join(top, " ");
    const std::string description =
        keywords.empty() ? "Talking points without a shared theme." : "Coverage of " + text::join(keywords, ", ");
    return json{{"aspect", aspect}, {"description", description}}.dump();
}

std::string same_aspect(const ChatRequest& request) {
    const auto a = word_set(var(request, "aspect_a"));
    const auto b = word_set(var(request, "aspect_b"));
    return jaccard(a, b) >= 0.5 ? "yes" : "no";
}

std::string coherent(const ChatRequest& request) {
    const auto label = word_set(var(request, "aspect") + " " + var(request, "description"));
    for (const auto& line : lines_of(var(request, "points")))
        if (overlap(label, word_set(line)) == 0) return "no";
    return "yes";
}

std::string summarize(const ChatRequest& request) {
    const auto sentences = text::split_sentences(var(request, "body"));
    std::vector<std::string> kept(sentences.begin(), sentences.begin() + std::min<std::size_t>(3, sentences.size()));
    return text::join(kept, " ");
}

std::string viewpoint(const ChatRequest& request) {
    json bullets = json::array();
    for (const auto& line : lines_of(var(request, "own_points"))) {
        if (bullets.size() == 3) break;
        // Point lines look like "- summary | actor -> target (sentiment, frame)".
        auto summary = strip_bullet(line);
        if (auto bar = summary.find(" | "); bar != std::string::npos) summary = summary.substr(0, bar);
        if (summary.empty()) continue;
        bullets.push_back(summary);
    }
    if (bullets.empty()) bullets.push_back("Coverage of " + var(request, "aspect") + ".");
    return json{{"title", "Outlets on " + var(request, "aspect")}, {"bullets", bullets}}.dump();
}

std::string pick_summary(const ChatRequest& request) {
    const auto article = word_set(var(request, "article"));
    const auto s1 = overlap(article, word_set(var(request, "summary1")));
    const auto s2 = overlap(article, word_set(var(request, "summary2")));
    if (s1 != s2) return s1 > s2 ? "summary1" : "summary2";
    return (fnv1a64(var(request, "article")) & 1) ? "summary2" : "summary1";
}

std::string pick_direct(const ChatRequest& request) {
    return (fnv1a64(var(request, "article")) & 1) ? "right" : "left";
}

std::string pick_topic(const ChatRequest& request) {
    const auto point = word_set(var(request, "point"));
    int best = 1;
    std::size_t best_overlap = 0;
    int index = 0;
    for (const auto& line : lines_of(var(request, "options"))) {
        ++index;
        const auto o = overlap(point, word_set(line));
        if (o > best_overlap) {
            best = index;
            best_overlap = o;
        }
    }
    return std::to_string(best);
}

std::string evidence(const ChatRequest& request) {
    const auto summary = word_set(var(request, "summary"));
    std::string best;
    std::size_t best_overlap = 0;
    for (const auto& s : text::split_sentences(var(request, "article"))) {
        const auto o = overlap(summary, word_set(s));
        if (o > best_overlap) {
            best = s;
            best_overlap = o;
        }
    }
    json answers = json::array();
    for (int q = 1; q <= 4; ++q) {
        json ev = json::array();
        if (!best.empty()) ev.push_back(best);
        answers.push_back({{"question", q}, {"answer", best.empty() ? "no" : "yes"}, {"evidence", ev}});
    }
    return json{{"answers", answers}}.dump();
}

std::string agree(const ChatRequest& request) {
    // Titles repeat the theme on both sides; only the bullets carry stance.
    auto body = [](const std::string& s) {
        const auto nl = s.find('\n');
        return word_set(nl == std::string::npos ? s : s.substr(nl + 1));
    };
    const double j = jaccard(body(var(request, "summary_a")), body(var(request, "summary_b")));
    const double bar = 0.1 * static_cast<double>(fnv1a64(var(request, "question")) % 5 + 1);
    return j >= bar ? "1" : "0";
}

std::string repair(const ChatRequest& request) {
    auto parsed = lenient::parse_json(var(request, "malformed"));
    return parsed.value ? lenient::safe_dump(*parsed.value) : std::string("{}");
}

}  // namespace

std::string RuleBasedChatBackend::complete(const ChatRequest& request) {
    using Handler = std::string (*)(const ChatRequest&);
    static const std::map<std::string, Handler> handlers = {
        {"extract_talking_points", extract_points},
        {"repair_json", repair},
        {"label_cluster", label_points},
        {"merge_labels", same_aspect},
        {"coherence_check", coherent},
        {"conditioned_summary", summarize},
        {"generate_viewpoint", viewpoint},
        {"classify_ideology", pick_summary},
        {"classify_partisan", pick_summary},
        {"classify_direct", pick_direct},
        {"topic_choice", pick_topic},
        {"extract_evidence", evidence},
        {"agreement_question", agree},
    };
    auto it = handlers.find(request.template_id);
    if (it == handlers.end()) throw GatewayError("rule-based backend has no handler for " + request.template_id);
    return it->second(request);
}

}  // namespace discourse::gateway
