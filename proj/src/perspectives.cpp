#include "discourse/perspectives.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "discourse/gateway/gateway.hpp"
#include "discourse/lenient.hpp"
#include "discourse/text.hpp"

namespace discourse {

namespace {

using nlohmann::json;

std::vector<const TalkingPoint*> resolve(const std::vector<std::string>& ids, const PointIndex& points) {
    std::vector<const TalkingPoint*> out;
    for (const auto& id : ids) {
        auto it = points.find(id);
        if (it == points.end()) throw std::invalid_argument("unknown talking point " + id);
        out.push_back(it->second);
    }
    return out;
}

std::optional<Viewpoint> parse_viewpoint_reply(const std::string& raw, const std::string& where,
                                               Diagnostics& diagnostics) {
    auto parsed = lenient::parse_json(raw);
    if (!parsed.value || !parsed.value->is_object()) return std::nullopt;
    const auto& obj = *parsed.value;
    Viewpoint v;
    if (auto t = obj.find("title"); t != obj.end() && t->is_string()) v.title = text::trim(t->get<std::string>());
    if (auto b = obj.find("bullets"); b != obj.end()) {
        if (b->is_string()) {
            if (auto s = text::trim(b->get<std::string>()); !s.empty()) v.bullets.push_back(s);
        } else if (b->is_array()) {
            for (const auto& item : *b)
                if (item.is_string())
                    if (auto s = text::trim(item.get<std::string>()); !s.empty()) v.bullets.push_back(s);
        }
    }
    if (v.title.empty() || v.bullets.empty()) return std::nullopt;
    if (v.bullets.size() > kMaxViewpointBullets) {
        diagnostics.push_back({where, "viewpoint had " + std::to_string(v.bullets.size()) + " bullets, keeping " +
                                          std::to_string(kMaxViewpointBullets)});
        v.bullets.resize(kMaxViewpointBullets);
    }
    return v;
}

template <class Key>
const Key& modal(const std::map<Key, std::size_t>& counts) {
    // std::map iterates keys ascending, so strict '>' keeps the smallest key on ties.
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

struct ViewpointJob {
    std::size_t perspective;
    Ideology side;
    std::vector<const TalkingPoint*> own;
    std::vector<const TalkingPoint*> opposing;
    std::vector<std::string> article_ids;  // distinct, in rank order
};

gateway::ChatRequest summary_request(const Article& article, Ideology ideology, const std::string& ptp_title,
                                     const gateway::ModelGateway& gw) {
    return gateway::make_request("conditioned_summary",
                                 {{"ideology", to_string(ideology)},
                                  {"ptp_title", ptp_title},
                                  {"title", article.title},
                                  {"body", article.body}},
                                 gw.prompts());
}

}  // namespace

std::string Viewpoint::text() const {
    std::string out = title;
    for (const auto& b : bullets) out += "\n- " + b;
    return out;
}

std::string MetadataDigest::text() const {
    std::string out;
    auto emit = [&](const char* label, const std::vector<DigestEntry>& entries) {
        for (const auto& e : entries)
            out += std::string(label) + " toward " + e.target + " (by " + e.actor + ", " + to_string(e.frame) +
                   ", " + std::to_string(e.count) + "x)\n";
    };
    emit("positive", positive_targets);
    emit("negative", negative_targets);
    return out;
}

std::string PartisanPerspective::sidedness() const {
    if (left_partition_empty && !right_partition_empty) return "right_only";
    if (right_partition_empty && !left_partition_empty) return "left_only";
    if (left_partition_empty) return "empty";
    return "two_sided";
}

std::vector<const TalkingPoint*> top_partition_points(const PTPCluster& ptp, Ideology side, const PointIndex& points,
                                                      std::size_t k) {
    const auto members = resolve(ptp.members(side), points);
    const auto order = nearest_members(members, ptp.label.embedding, k);
    std::vector<const TalkingPoint*> out;
    for (auto i : order) out.push_back(members[i]);
    return out;
}

std::string conditioned_summary(const Article& article, Ideology ideology, const std::string& ptp_title,
                                gateway::ModelGateway& gw) {
    return text::trim(gw.complete(summary_request(article, ideology, ptp_title, gw)));
}

std::string describe_point(const TalkingPoint& p) {
    std::string line = "- " + p.summary;
    std::vector<std::string> acts;
    for (const auto& a : p.activities)
        acts.push_back(a.actor + " -> " + a.target + " (" + to_string(a.sentiment) + ", " + to_string(a.frame) + ")");
    if (!acts.empty()) line += " | " + text::join(acts, "; ");
    return line;
}

namespace {

std::vector<std::optional<Viewpoint>> run_viewpoint_jobs(const std::vector<ViewpointJob>& jobs,
                                                         const std::vector<const PTPCluster*>& ptps,
                                                         const EventCorpus& corpus, gateway::ModelGateway& gw,
                                                         Diagnostics& diagnostics) {
    // Conditioned summaries for every job first, deduplicated by request.
    std::vector<gateway::ChatRequest> summary_requests;
    std::vector<std::vector<std::size_t>> summary_slots(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j)
        for (const auto& id : jobs[j].article_ids) {
            summary_slots[j].push_back(summary_requests.size());
            summary_requests.push_back(
                summary_request(corpus.article(id), jobs[j].side, ptps[j]->label.aspect, gw));
        }
    const auto summaries = gw.complete_all(summary_requests);

    std::vector<gateway::ChatRequest> requests;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const auto& job = jobs[j];
        std::string own, opposing, summary_text;
        for (const auto* p : job.own) own += describe_point(*p) + "\n";
        for (const auto* p : job.opposing) opposing += describe_point(*p) + "\n";
        if (opposing.empty()) opposing = "(none)\n";
        for (std::size_t s = 0; s < job.article_ids.size(); ++s) {
            const auto& reply = summaries[summary_slots[j][s]];
            if (!reply.ok()) {
                diagnostics.push_back({"article " + job.article_ids[s], "conditioned summary failed: " + reply.error});
                continue;
            }
            summary_text += "- " + text::trim(*reply.text) + "\n";
        }
        if (summary_text.empty()) summary_text = "(none)\n";
        requests.push_back(gateway::make_request("generate_viewpoint",
                                                 {{"aspect", ptps[j]->label.aspect},
                                                  {"description", ptps[j]->label.description},
                                                  {"ideology", to_string(job.side)},
                                                  {"opposing", to_string(opposite(job.side))},
                                                  {"own_points", own},
                                                  {"summaries", summary_text},
                                                  {"opposing_points", opposing}},
                                                 gw.prompts()));
    }
    const auto replies = gw.complete_all(requests);

    std::vector<std::optional<Viewpoint>> out(jobs.size());
    std::vector<std::size_t> retry;
    std::vector<gateway::ChatRequest> repairs;
    auto where_of = [&](std::size_t j) {
        return "ptp " + std::to_string(ptps[j]->id) + " " + to_string(jobs[j].side);
    };
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!replies[j].ok()) {
            diagnostics.push_back({where_of(j), "viewpoint request failed: " + replies[j].error});
            continue;
        }
        out[j] = parse_viewpoint_reply(*replies[j].text, where_of(j), diagnostics);
        if (!out[j]) {
            retry.push_back(j);
            const auto& raw = *replies[j].text;
            repairs.push_back(gateway::make_request(
                "repair_json", {{"malformed", raw.empty() ? std::string("(empty reply)") : raw}}, gw.prompts()));
        }
    }
    const auto repaired = gw.complete_all(repairs);
    for (std::size_t r = 0; r < retry.size(); ++r) {
        const auto j = retry[r];
        if (repaired[r].ok()) out[j] = parse_viewpoint_reply(*repaired[r].text, where_of(j), diagnostics);
        if (!out[j]) diagnostics.push_back({where_of(j), "viewpoint omitted: reply unusable after repair"});
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!out[j]) continue;
        out[j]->ptp_id = ptps[j]->id;
        out[j]->ideology = jobs[j].side;
        for (const auto* p : jobs[j].own) out[j]->supporting_point_ids.push_back(p->id);
    }
    return out;
}

ViewpointJob make_job(std::size_t perspective, const PTPCluster& ptp, Ideology side, const PointIndex& points,
                      const PerspectiveOptions& options) {
    ViewpointJob job{perspective, side, top_partition_points(ptp, side, points, options.own_points),
                     top_partition_points(ptp, opposite(side), points, options.opposing_points), {}};
    std::set<std::string> seen;
    for (const auto* p : job.own)
        if (seen.insert(p->article_id).second) job.article_ids.push_back(p->article_id);
    return job;
}

}  // namespace

std::optional<Viewpoint> generate_viewpoint(const PTPCluster& ptp, Ideology side, const PointIndex& points,
                                            const EventCorpus& corpus, gateway::ModelGateway& gw,
                                            Diagnostics& diagnostics, const PerspectiveOptions& options) {
    if (ptp.members(side).empty()) {
        diagnostics.push_back({"ptp " + std::to_string(ptp.id), to_string(side) + " partition empty, one-sided"});
        return std::nullopt;
    }
    return run_viewpoint_jobs({make_job(0, ptp, side, points, options)}, {&ptp}, corpus, gw, diagnostics).front();
}

MetadataDigest aggregate_metadata(const PTPCluster& ptp, Ideology side, const PointIndex& points) {
    const auto& ids = ptp.members(side);
    if (ids.empty()) throw std::invalid_argument("aggregate_metadata: empty partition");
    const std::size_t half = std::max<std::size_t>(1, (ids.size() + 1) / 2);
    const auto selected = top_partition_points(ptp, side, points, half);

    std::map<std::pair<std::string, Sentiment>, std::size_t> target_counts;
    std::map<std::tuple<std::string, Sentiment, std::string>, std::size_t> actor_counts;
    std::map<std::tuple<std::string, Sentiment, std::string>, std::map<std::string, std::size_t>> frame_counts;
    for (const auto* p : selected)
        for (const auto& a : p->activities) {
            ++target_counts[{a.target, a.sentiment}];
            ++actor_counts[{a.target, a.sentiment, a.actor}];
            ++frame_counts[{a.target, a.sentiment, a.actor}][to_string(a.frame)];
        }

    MetadataDigest digest;
    digest.ptp_id = ptp.id;
    digest.ideology = side;
    for (Sentiment s : {Sentiment::positive, Sentiment::negative}) {
        std::vector<std::pair<std::string, std::size_t>> targets;
        for (const auto& [key, count] : target_counts)
            if (key.second == s) targets.emplace_back(key.first, count);
        std::stable_sort(targets.begin(), targets.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (targets.size() > 3) targets.resize(3);
        auto& out = s == Sentiment::positive ? digest.positive_targets : digest.negative_targets;
        for (const auto& [target, count] : targets) {
            std::map<std::string, std::size_t> actors;
            for (const auto& [key, c] : actor_counts)
                if (std::get<0>(key) == target && std::get<1>(key) == s) actors[std::get<2>(key)] = c;
            const auto& actor = modal(actors);
            const auto& frame = modal(frame_counts.at({target, s, actor}));
            out.push_back({target, actor, parse_media_frame(frame).value_or(MediaFrame::other), count});
        }
    }
    return digest;
}

PerspectiveRun build_perspectives(const std::vector<PTPCluster>& input, const PointIndex& points,
                                  const EventCorpus& corpus, gateway::ModelGateway& gw,
                                  const PerspectiveOptions& options) {
    std::vector<const PTPCluster*> ptps;
    for (const auto& p : input) ptps.push_back(&p);
    std::sort(ptps.begin(), ptps.end(), [](const PTPCluster* a, const PTPCluster* b) { return a->id < b->id; });

    PerspectiveRun run;
    std::vector<ViewpointJob> jobs;
    std::vector<const PTPCluster*> job_ptps;
    for (std::size_t i = 0; i < ptps.size(); ++i) {
        const auto& ptp = *ptps[i];
        PartisanPerspective pp;
        pp.ptp_id = ptp.id;
        for (Ideology side : kIdeologies) {
            if (ptp.members(side).empty()) {
                (side == Ideology::left ? pp.left_partition_empty : pp.right_partition_empty) = true;
                continue;
            }
            (side == Ideology::left ? pp.left_digest : pp.right_digest) = aggregate_metadata(ptp, side, points);
            jobs.push_back(make_job(i, ptp, side, points, options));
            job_ptps.push_back(&ptp);
        }
        if (pp.one_sided())
            run.diagnostics.push_back({"ptp " + std::to_string(ptp.id), "one-sided: " + pp.sidedness()});
        run.perspectives.push_back(std::move(pp));
    }
    auto viewpoints = run_viewpoint_jobs(jobs, job_ptps, corpus, gw, run.diagnostics);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& pp = run.perspectives[jobs[j].perspective];
        (jobs[j].side == Ideology::left ? pp.left : pp.right) = std::move(viewpoints[j]);
    }
    return run;
}

std::vector<FinetunePair> export_finetune_pairs(const std::vector<PTPCluster>& ptps,
                                                const std::vector<PartisanPerspective>& perspectives,
                                                const PointIndex& points, const EventCorpus& corpus,
                                                gateway::ModelGateway& gw) {
    std::map<int, const PartisanPerspective*> by_id;
    for (const auto& p : perspectives) by_id[p.ptp_id] = &p;
    std::vector<const PTPCluster*> ordered;
    for (const auto& p : ptps) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [](const PTPCluster* a, const PTPCluster* b) { return a->id < b->id; });

    std::vector<FinetunePair> pairs;
    for (const auto* ptp : ordered) {
        auto it = by_id.find(ptp->id);
        if (it == by_id.end() || !it->second->left || !it->second->right) continue;
        const auto& pp = *it->second;
        for (Ideology side : kIdeologies) {
            std::vector<std::string> article_ids;
            std::set<std::string> seen;
            for (const auto* p : resolve(ptp->members(side), points))
                if (seen.insert(p->article_id).second) article_ids.push_back(p->article_id);
            if (article_ids.empty()) continue;

            const auto& chosen = *pp.viewpoint(side);
            const auto& rejected = *pp.viewpoint(opposite(side));
            std::vector<std::string> texts = {chosen.text()};
            for (const auto& id : article_ids) texts.push_back(corpus.article(id).full_text());
            const auto vecs = gw.embed(texts);
            std::vector<double> scores;
            for (std::size_t a = 0; a < article_ids.size(); ++a) scores.push_back(cosine_similarity(vecs[a + 1], vecs[0]));
            const auto order = rank_descending(scores, article_ids);
            const std::size_t keep = (article_ids.size() + 3) / 4;
            for (std::size_t r = 0; r < keep; ++r) {
                const auto& id = article_ids[order[r]];
                FinetunePair pair;
                pair.article_id = id;
                pair.prompt_text = gw.prompts().render("finetune_prompt", {{"article", corpus.article(id).full_text()}});
                pair.chosen = chosen.text();
                pair.rejected = rejected.text();
                pair.ptp_id = ptp->id;
                pair.similarity = scores[order[r]];
                pairs.push_back(std::move(pair));
            }
        }
    }
    return pairs;
}

void write_finetune_pairs(const std::filesystem::path& path, const std::vector<FinetunePair>& pairs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& p : pairs) out << lenient::safe_dump(json(p)) << '\n';
}

void to_json(json& j, const Viewpoint& v) {
    j = json{{"ptp_id", v.ptp_id},
             {"ideology", v.ideology},
             {"title", v.title},
             {"bullets", v.bullets},
             {"supporting_point_ids", v.supporting_point_ids}};
}

void from_json(const json& j, Viewpoint& v) {
    v.ptp_id = j.at("ptp_id").get<int>();
    v.ideology = j.at("ideology").get<Ideology>();
    v.title = j.at("title").get<std::string>();
    v.bullets = j.at("bullets").get<std::vector<std::string>>();
    v.supporting_point_ids = j.value("supporting_point_ids", std::vector<std::string>{});
}

void to_json(json& j, const DigestEntry& e) {
    j = json{{"target", e.target}, {"actor", e.actor}, {"frame", to_string(e.frame)}, {"count", e.count}};
}

void from_json(const json& j, DigestEntry& e) {
    e.target = j.at("target").get<std::string>();
    e.actor = j.at("actor").get<std::string>();
    e.frame = parse_media_frame(j.at("frame").get<std::string>()).value_or(MediaFrame::other);
    e.count = j.at("count").get<std::size_t>();
}

void to_json(json& j, const MetadataDigest& d) {
    j = json{{"ptp_id", d.ptp_id},
             {"ideology", d.ideology},
             {"positive_targets", d.positive_targets},
             {"negative_targets", d.negative_targets}};
}

void from_json(const json& j, MetadataDigest& d) {
    d.ptp_id = j.at("ptp_id").get<int>();
    d.ideology = j.at("ideology").get<Ideology>();
    d.positive_targets = j.at("positive_targets").get<std::vector<DigestEntry>>();
    d.negative_targets = j.at("negative_targets").get<std::vector<DigestEntry>>();
}

void to_json(json& j, const PartisanPerspective& p) {
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    j = json{{"ptp_id", p.ptp_id},
             {"sidedness", p.sidedness()},
             {"left", opt(p.left)},
             {"right", opt(p.right)},
             {"left_digest", opt(p.left_digest)},
             {"right_digest", opt(p.right_digest)}};
}

void from_json(const json& j, PartisanPerspective& p) {
    p.ptp_id = j.at("ptp_id").get<int>();
    const auto sided = j.value("sidedness", "two_sided");
    p.left_partition_empty = sided == "right_only" || sided == "empty";
    p.right_partition_empty = sided == "left_only" || sided == "empty";
    auto read = [&](const char* key, auto& out) {
        using T = typename std::decay_t<decltype(out)>::value_type;
        if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
        else out.reset();
    };
    read("left", p.left);
    read("right", p.right);
    read("left_digest", p.left_digest);
    read("right_digest", p.right_digest);
}

void to_json(json& j, const FinetunePair& p) {
    j = json{{"article_id", p.article_id}, {"prompt_text", p.prompt_text}, {"chosen", p.chosen}, {"rejected", p.rejected}};
}

}  // namespace discourse
