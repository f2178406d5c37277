#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "discourse/corpus.hpp"
#include "discourse/evaluation.hpp"
#include "discourse/gateway/gateway.hpp"
#include "discourse/gateway/http_backends.hpp"
#include "discourse/gateway/mock.hpp"
#include "discourse/hashing.hpp"
#include "discourse/lenient.hpp"
#include "discourse/perspectives.hpp"
#include "discourse/pipeline.hpp"
#include "discourse/ptp.hpp"
#include "discourse/snapshot.hpp"
#include "discourse/talking_points.hpp"

namespace discourse::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCorpusReport = "corpus_report.json";
constexpr const char* kTalkingPoints = "talking_points.jsonl";
constexpr const char* kPtps = "ptps.json";
constexpr const char* kPerspectives = "perspectives.json";
constexpr const char* kEvalReport = "eval_report.json";
constexpr const char* kAgreement = "agreement_scores.json";
constexpr const char* kSnapshotSvg = "snapshot.svg";
constexpr const char* kSnapshotJson = "snapshot.json";
constexpr const char* kFinetune = "finetune_pairs.jsonl";
constexpr const char* kManifest = "manifest.json";

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out || !(out << content)) throw std::runtime_error("cannot write " + tmp);
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_text(path, lenient::safe_dump(j, 2) + "\n"); }

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

void require(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path))
        throw MissingPrerequisite("missing prerequisite " + path.filename().string() + " (" + path.string() + ")" +
                                  (producer.empty() ? std::string() : ", produced by the `" + producer + "` stage"));
}

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::ingest: return "ingest";
        case Stage::extract: return "extract";
        case Stage::cluster: return "cluster";
        case Stage::perspectives: return "perspectives";
        case Stage::evaluate: return "evaluate";
        case Stage::snapshot: return "snapshot";
        case Stage::export_finetune: return "export-finetune";
    }
    return "unknown";
}

std::optional<Stage> parse_stage(const std::string& text) {
    for (auto s : kStageOrder)
        if (to_string(s) == text) return s;
    return std::nullopt;
}

std::vector<Stage> expand_command(const std::string& command) {
    if (command == "all") return {std::begin(kStageOrder), std::end(kStageOrder)};
    if (auto s = parse_stage(command)) return {*s};
    throw ConfigError("command: unknown stage '" + command + "'");
}

json StageOutcome::to_json() const {
    return json{{"stage", to_string(stage)},
                {"event", event},
                {"status", ran ? "ran" : "up-to-date"},
                {"artifacts", artifacts},
                {"diagnostics", diagnostics}};
}

Backends make_backends(const PipelineConfig& config) {
    if (config.backend == "mock")
        return {std::make_shared<gateway::RuleBasedChatBackend>(),
                std::make_shared<gateway::LexicalEmbeddingBackend>(config.mock_embedding_dim)};
    return {std::make_shared<gateway::HttpChatBackend>(
                gateway::HttpEndpoint{config.chat_url, config.chat_model, config.api_key_env}),
            std::make_shared<gateway::HttpEmbeddingBackend>(
                gateway::HttpEndpoint{config.embedding_url, config.embedding_model, config.api_key_env})};
}

struct Runner::State {
    PipelineConfig config;
    Backends backends;
    gateway::ModelGateway gw;
    std::optional<LoadResult> corpus;
    json manifest = json::object();

    State(PipelineConfig c, Backends b)
        : config(std::move(c)),
          backends(std::move(b)),
          gw(backends.chat, backends.embedding, gateway_options(config)) {
        const auto path = config.output_dir / kManifest;
        if (fs::exists(path)) {
            try {
                manifest = read_json(path);
            } catch (const std::exception&) {
                manifest = json::object();
            }
        }
    }

    static gateway::GatewayOptions gateway_options(const PipelineConfig& c) {
        gateway::GatewayOptions o;
        o.max_in_flight = c.max_in_flight;
        o.requests_per_minute = c.requests_per_minute;
        o.cache_dir = c.cache_dir;
        return o;
    }

    const EventCorpus& load_corpus_once() {
        if (!corpus) {
            require(config.articles, "");
            require(config.bias_map, "");
            if (config.events) require(*config.events, "");
            LoadOptions options;
            options.events_path = config.events;
            corpus = discourse::load_corpus(config.articles, config.bias_map, options);
        }
        return corpus->corpus;
    }

    fs::path event_dir(const std::string& event) const { return config.output_dir / event; }

    std::string backend_identity() const {
        return backends.chat->id() + "/" + backends.chat->model() + ";" + backends.embedding->id() + "/" +
               backends.embedding->model();
    }

    std::string settings_for(Stage stage) const {
        const auto& c = config;
        switch (stage) {
            case Stage::ingest: return "";
            case Stage::extract: return backend_identity();
            case Stage::cluster: return backend_identity() + ";threshold=" + num(c.membership_threshold);
            case Stage::perspectives:
                return backend_identity() + ";K=" + std::to_string(c.own_points) +
                       ";M=" + std::to_string(c.opposing_points);
            case Stage::evaluate: {
                std::string s = backend_identity() + ";seed=" + std::to_string(c.seed) +
                                ";topk=" + std::to_string(c.topk) + ";negatives=" + std::to_string(c.negatives) +
                                ";evidence=" + std::to_string(c.evidence_limit) +
                                ";unseen=" + num(c.unseen_threshold) + "/" + std::to_string(c.unseen_window_days) +
                                ";methods=";
                for (const auto& m : c.eval_methods) s += m + ",";
                return s;
            }
            case Stage::snapshot:
                return backend_identity() + ";c=" + num(c.radius_scale) + ";canvas=" + num(c.canvas_width) + "x" +
                       num(c.canvas_height);
            case Stage::export_finetune: return backend_identity();
        }
        return "";
    }

    std::vector<fs::path> inputs_for(Stage stage, const std::string& event) const {
        const auto dir = event_dir(event);
        std::vector<fs::path> in = {config.articles, config.bias_map};
        if (config.events) in.push_back(*config.events);
        switch (stage) {
            case Stage::ingest:
            case Stage::extract: break;
            case Stage::cluster: in.push_back(dir / kTalkingPoints); break;
            case Stage::perspectives:
            case Stage::snapshot:
            case Stage::export_finetune:
                in.push_back(dir / kTalkingPoints);
                in.push_back(dir / kPtps);
                if (stage != Stage::perspectives) in.push_back(dir / kPerspectives);
                break;
            case Stage::evaluate:
                in.push_back(dir / kTalkingPoints);
                in.push_back(dir / kPtps);
                in.push_back(dir / kPerspectives);
                if (config.candidates) in.push_back(*config.candidates);
                break;
        }
        return in;
    }

    static std::string producer_of(const fs::path& p) {
        const auto name = p.filename().string();
        if (name == kTalkingPoints) return "extract";
        if (name == kPtps) return "cluster";
        if (name == kPerspectives) return "perspectives";
        return "";
    }

    std::string fingerprint(Stage stage, const std::string& event) const {
        json j = {{"stage", to_string(stage)}, {"event", event}, {"settings", settings_for(stage)}};
        json inputs = json::array();
        for (const auto& p : inputs_for(stage, event)) {
            require(p, producer_of(p));
            inputs.push_back({p.filename().string(), sha256_file(p.string())});
        }
        j["inputs"] = inputs;
        return sha256_hex(j.dump());
    }

    static std::string manifest_key(Stage stage, const std::string& event) {
        return to_string(stage) + (event.empty() ? "" : "/" + event);
    }

    bool up_to_date(const std::string& key, const std::string& print, StageOutcome& outcome) const {
        auto it = manifest.find(key);
        if (it == manifest.end() || it->value("fingerprint", "") != print) return false;
        const auto& outputs = (*it)["outputs"];
        for (auto o = outputs.begin(); o != outputs.end(); ++o) {
            const auto path = config.output_dir / o.key();
            if (!fs::exists(path) || sha256_file(path.string()) != o.value().get<std::string>()) return false;
        }
        for (auto o = outputs.begin(); o != outputs.end(); ++o)
            outcome.artifacts[o.key()] = o.value().get<std::string>();
        outcome.diagnostics = it->value("diagnostics", std::size_t{0});
        return true;
    }

    void record(const std::string& key, const std::string& print, const StageOutcome& outcome) {
        manifest[key] = {{"fingerprint", print}, {"outputs", outcome.artifacts}, {"diagnostics", outcome.diagnostics}};
        write_json(config.output_dir / kManifest, manifest);
    }

    // Stage bodies. Each returns its diagnostics and fills artifact names
    // relative to output_dir.

    Diagnostics ingest(std::vector<std::string>& produced) {
        const auto& corpus_ = load_corpus_once();
        json events = json::array();
        for (const auto& e : corpus_.events())
            events.push_back({{"id", e.id}, {"issue", e.issue}, {"title", e.title}, {"articles", e.article_ids.size()}});
        write_json(config.output_dir / kCorpusReport,
                   {{"report", corpus->report.to_json()}, {"stats", corpus_.stats_json()}, {"events", events}});
        produced.push_back(kCorpusReport);
        return corpus->report.malformed;
    }

    std::vector<const Article*> event_articles(const std::string& event) {
        const auto& c = load_corpus_once();
        const auto* e = c.find_event(event);
        if (!e) throw ConfigError("event: unknown event id '" + event + "'");
        std::vector<const Article*> out;
        for (const auto& id : e->article_ids) out.push_back(&c.article(id));
        std::sort(out.begin(), out.end(), [](const Article* a, const Article* b) { return a->id < b->id; });
        return out;
    }

    Diagnostics extract(const std::string& event, std::vector<std::string>& produced) {
        auto batch = extract_all(event_articles(event), gw);
        if (!batch.points.empty()) {
            std::vector<std::string> texts;
            for (const auto& p : batch.points) texts.push_back(p.summary);
            const auto vecs = gw.embed(texts);
            for (std::size_t i = 0; i < vecs.size(); ++i) batch.points[i].embedding = vecs[i];
        }
        write_talking_points(event_dir(event) / kTalkingPoints, batch.points);
        produced.push_back(event + "/" + kTalkingPoints);
        if (batch.articles_skipped > 0)
            batch.diagnostics.push_back(
                {"event " + event, std::to_string(batch.articles_skipped) + " articles produced no talking points"});
        return batch.diagnostics;
    }

    Diagnostics cluster(const std::string& event, const std::string& print, std::vector<std::string>& produced) {
        const auto points = read_talking_points(event_dir(event) / kTalkingPoints);
        PtpOptions options;
        options.membership_threshold = config.membership_threshold;
        options.checkpoint_dir = event_dir(event) / "checkpoints" / print.substr(0, 16);
        const auto run = identify_ptps(points, event_articles(event).size(), gw, options);
        json iterations = json::array();
        for (const auto& it : run.iterations) iterations.push_back(it);
        write_json(event_dir(event) / kPtps, {{"event", event},
                                               {"membership_threshold", options.membership_threshold},
                                               {"ptps", run.clusters},
                                               {"assignment", run.assignment},
                                               {"total_points", run.total_points},
                                               {"coverage", run.total_points ? run.coverage() : 0.0},
                                               {"halt_reason", run.halt_reason},
                                               {"iterations", iterations},
                                               {"diagnostics", run.diagnostics}});
        produced.push_back(event + "/" + kPtps);
        return run.diagnostics;
    }

    struct Loaded {
        std::vector<TalkingPoint> points;
        PointIndex index;
        std::vector<PTPCluster> ptps;
        std::map<std::string, int> assignment;
        std::vector<PartisanPerspective> perspectives;
    };

    Loaded load(const std::string& event, bool with_perspectives) {
        Loaded l;
        l.points = read_talking_points(event_dir(event) / kTalkingPoints);
        l.index = index_points(l.points);
        const auto ptps = read_json(event_dir(event) / kPtps);
        l.ptps = ptps.at("ptps").get<std::vector<PTPCluster>>();
        l.assignment = ptps.at("assignment").get<std::map<std::string, int>>();
        if (with_perspectives)
            l.perspectives =
                read_json(event_dir(event) / kPerspectives).at("perspectives").get<std::vector<PartisanPerspective>>();
        return l;
    }

    Diagnostics perspectives(const std::string& event, std::vector<std::string>& produced) {
        auto l = load(event, false);
        PerspectiveOptions options;
        options.own_points = config.own_points;
        options.opposing_points = config.opposing_points;
        auto run = build_perspectives(l.ptps, l.index, load_corpus_once(), gw, options);
        write_json(event_dir(event) / kPerspectives,
                   {{"event", event}, {"perspectives", run.perspectives}, {"diagnostics", run.diagnostics}});
        produced.push_back(event + "/" + kPerspectives);
        return run.diagnostics;
    }

    std::vector<Article> unseen_articles(const std::string& event, Diagnostics& diags) {
        if (!config.candidates) {
            diags.push_back({"event " + event, "no candidates file configured; ideology methods skipped"});
            return {};
        }
        LoadReport report;
        auto pool = load_articles(*config.candidates, load_bias_map(config.bias_map), LoadOptions{}, report);
        append(diags, report.malformed);
        if (pool.empty()) return {};
        const auto members = event_articles(event);
        std::vector<std::string> texts;
        for (const auto* a : members) texts.push_back(a->full_text());
        const auto member_vecs = gw.embed(texts);
        Event e = *load_corpus_once().find_event(event);
        e.centroid = mean_direction(member_vecs);
        texts.clear();
        for (const auto& a : pool) texts.push_back(a.full_text());
        const auto pool_vecs = gw.embed(texts);
        std::vector<Candidate> candidates;
        for (std::size_t i = 0; i < pool.size(); ++i) candidates.push_back({pool[i], pool_vecs[i]});
        std::vector<Article> out;
        for (auto& u : select_unseen_articles(load_corpus_once(), candidates, e, config.unseen_window_days,
                                              config.unseen_threshold))
            out.push_back(std::move(u.article));
        std::sort(out.begin(), out.end(), [](const Article& a, const Article& b) { return a.id < b.id; });
        return out;
    }

    Diagnostics evaluate(const std::string& event, std::vector<std::string>& produced) {
        Diagnostics diags;
        auto l = load(event, true);
        const auto& corpus_ = load_corpus_once();
        const auto* ev = corpus_.find_event(event);
        auto unseen = unseen_articles(event, diags);
        std::vector<const Article*> unseen_ptrs;
        for (auto& a : unseen) {
            // Unseen articles inherit the event's issue when they carry none.
            if (a.issue.empty()) a.issue = ev->issue;
            unseen_ptrs.push_back(&a);
        }

        std::optional<ViewpointIndex> vindex;
        json methods = json::object();
        for (const auto& m : config.eval_methods) {
            std::vector<ClassificationRecord> records;
            if (m == method::kDirect) {
                records = classify_direct_all(unseen_ptrs, gw, diags);
            } else if (m == method::kTopK || m == method::kTopKMetadata) {
                if (!unseen_ptrs.empty()) {
                    if (!vindex) vindex = index_viewpoints(l.perspectives, gw);
                    IdeologyOptions o;
                    o.k = config.topk;
                    o.with_metadata = m == method::kTopKMetadata;
                    o.seed = config.seed;
                    records = classify_ideology_all(unseen_ptrs, *vindex, gw, o, diags);
                }
            } else {
                std::map<int, const PartisanPerspective*> by_id;
                for (const auto& p : l.perspectives) by_id[p.ptp_id] = &p;
                std::map<int, std::optional<PartisanTexts>> texts;
                for (const auto& ptp : l.ptps) {
                    if (m == method::kTrp) {
                        texts[ptp.id] = trp_baseline(ptp, l.index);
                    } else {
                        auto it = by_id.find(ptp.id);
                        texts[ptp.id] = it == by_id.end()
                                            ? std::nullopt
                                            : perspective_texts(*it->second, m == method::kPartisanMetadata);
                    }
                }
                PartisanOptions o;
                o.seed = config.seed;
                o.method = m;
                records = classify_partisan_all(l.ptps, texts, l.index, corpus_, gw, o, diags);
                for (auto& r : records)
                    if (r.issue.empty()) r.issue = ev->issue;
            }
            json entry = {{"records", records}};
            try {
                entry["report"] = score_report(records);
            } catch (const std::invalid_argument& e) {
                entry["report"] = nullptr;
                entry["error"] = e.what();
            }
            methods[m] = std::move(entry);
        }

        json topic = nullptr;
        try {
            TopicOptions o;
            o.negatives = config.negatives;
            o.seed = config.seed;
            topic = topic_diversity_task(l.ptps, l.index, gw, o, diags);
        } catch (const std::invalid_argument& e) {
            diags.push_back({"event " + event, std::string("topic diversity skipped: ") + e.what()});
        }

        json evidence = json::array();
        std::array<std::size_t, 4> supported{}, asked{};
        std::size_t used = 0;
        std::vector<const PartisanPerspective*> ordered;
        for (const auto& p : l.perspectives) ordered.push_back(&p);
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto* a, const auto* b) { return a->ptp_id < b->ptp_id; });
        std::map<int, const PTPCluster*> ptp_by_id;
        for (const auto& p : l.ptps) ptp_by_id[p.id] = &p;
        for (const auto* p : ordered) {
            for (Ideology side : kIdeologies) {
                if (used >= config.evidence_limit) break;
                const auto& vp = p->viewpoint(side);
                auto it = ptp_by_id.find(p->ptp_id);
                if (!vp || it == ptp_by_id.end() || it->second->members(side).empty()) continue;
                const auto& article = corpus_.article(l.index.at(it->second->members(side).front())->article_id);
                try {
                    auto r = extract_evidence(article, *vp, gw);
                    for (int q = 0; q < 4; ++q) {
                        ++asked[q];
                        supported[q] += r.answers[q].supported ? 1 : 0;
                    }
                    append(diags, r.diagnostics);
                    evidence.push_back(r);
                } catch (const gateway::GatewayError& e) {
                    diags.push_back({"evidence " + article.id, std::string("backend failed: ") + e.what()});
                }
                ++used;
            }
        }
        json support_rate = json::array();
        for (int q = 0; q < 4; ++q)
            support_rate.push_back(asked[q] ? static_cast<double>(supported[q]) / static_cast<double>(asked[q]) : 0.0);

        write_json(event_dir(event) / kEvalReport,
                   {{"event", event},
                    {"seed", config.seed},
                    {"unseen_articles", unseen.size()},
                    {"methods", methods},
                    {"topic_diversity", topic},
                    {"coverage", l.points.empty() ? json(nullptr) : json(coverage(l.points, l.assignment))},
                    {"evidence", {{"supported_rate", support_rate}, {"reports", evidence}}},
                    {"diagnostics", diags}});
        produced.push_back(event + "/" + kEvalReport);
        return diags;
    }

    Diagnostics snapshot(const std::string& event, std::vector<std::string>& produced) {
        Diagnostics diags;
        auto l = load(event, true);
        const auto scores = score_agreements(l.perspectives, gw, diags);
        std::set<int> scored;
        for (const auto& s : scores) scored.insert(s.ptp_id);
        std::vector<PTPCluster> shown;
        for (const auto& p : l.ptps) {
            const bool two_sided = !p.left_member_ids.empty() && !p.right_member_ids.empty();
            if (two_sided && !scored.count(p.id)) {
                diags.push_back({"ptp " + std::to_string(p.id), "left out of the snapshot: viewpoints missing"});
                continue;
            }
            shown.push_back(p);
        }
        write_json(event_dir(event) / kAgreement, {{"event", event}, {"scores", scores}, {"diagnostics", diags}});
        produced.push_back(event + "/" + kAgreement);
        if (shown.empty()) {
            diags.push_back({"event " + event, "no PTPs to draw; snapshot not written"});
            return diags;
        }
        SnapshotOptions o;
        o.radius_scale = config.radius_scale;
        o.width = config.canvas_width;
        o.height = config.canvas_height;
        write_snapshot(event_dir(event), build_snapshot(shown, scores, o), o);
        produced.push_back(event + "/" + kSnapshotSvg);
        produced.push_back(event + "/" + kSnapshotJson);
        return diags;
    }

    Diagnostics export_finetune(const std::string& event, std::vector<std::string>& produced) {
        auto l = load(event, true);
        const auto pairs = export_finetune_pairs(l.ptps, l.perspectives, l.index, load_corpus_once(), gw);
        write_finetune_pairs(event_dir(event) / kFinetune, pairs);
        produced.push_back(event + "/" + kFinetune);
        return {};
    }
};

Runner::Runner(PipelineConfig config, Backends backends) {
    config.validate();
    state_ = std::make_unique<State>(std::move(config), std::move(backends));
}

Runner::~Runner() = default;

std::vector<std::string> Runner::selected_events() {
    const auto& corpus = state_->load_corpus_once();
    const auto& c = state_->config;
    std::vector<std::string> out;
    for (const auto& e : corpus.events()) {
        if (c.event && e.id != *c.event) continue;
        if (c.issue && e.issue != *c.issue) continue;
        out.push_back(e.id);
    }
    if (c.event && out.empty()) throw ConfigError("event: no event '" + *c.event + "' matches the filters");
    std::sort(out.begin(), out.end());
    return out;
}

StageOutcome Runner::run_stage(Stage stage, const std::string& event) {
    auto& s = *state_;
    StageOutcome outcome;
    outcome.stage = stage;
    outcome.event = event;
    if (stage == Stage::extract) s.load_corpus_once();
    const auto print = s.fingerprint(stage, event);
    const auto key = State::manifest_key(stage, event);
    if (s.up_to_date(key, print, outcome)) return outcome;

    std::vector<std::string> produced;
    Diagnostics diags;
    fs::create_directories(s.event_dir(event));
    switch (stage) {
        case Stage::ingest: diags = s.ingest(produced); break;
        case Stage::extract: diags = s.extract(event, produced); break;
        case Stage::cluster: diags = s.cluster(event, print, produced); break;
        case Stage::perspectives: diags = s.perspectives(event, produced); break;
        case Stage::evaluate: diags = s.evaluate(event, produced); break;
        case Stage::snapshot: diags = s.snapshot(event, produced); break;
        case Stage::export_finetune: diags = s.export_finetune(event, produced); break;
    }
    const auto diag_name = (event.empty() ? std::string() : event + "/") + "diagnostics/" + to_string(stage) + ".json";
    write_json(s.config.output_dir / diag_name, diags);
    produced.push_back(diag_name);
    for (const auto& name : produced) outcome.artifacts[name] = sha256_file((s.config.output_dir / name).string());
    outcome.ran = true;
    outcome.diagnostics = diags.size();
    s.record(key, print, outcome);
    return outcome;
}

std::vector<StageOutcome> Runner::run(const std::vector<Stage>& stages, std::ostream* summary_out) {
    std::vector<StageOutcome> outcomes;
    auto emit = [&](const StageOutcome& o) {
        if (summary_out) *summary_out << o.to_json().dump() << '\n';
        outcomes.push_back(o);
    };
    for (Stage stage : stages) {
        if (stage == Stage::ingest) {
            emit(run_stage(stage, ""));
            continue;
        }
        for (const auto& event : selected_events()) emit(run_stage(stage, event));
    }
    return outcomes;
}

}  // namespace discourse::pipeline
