#include "discourse/ptp.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "discourse/clustering/grid_search.hpp"
#include "discourse/gateway/gateway.hpp"
#include "discourse/hashing.hpp"
#include "discourse/lenient.hpp"
#include "discourse/text.hpp"

namespace discourse {

namespace {

using nlohmann::json;

std::optional<std::pair<std::string, std::string>> parse_label_reply(const std::string& raw) {
    auto parsed = lenient::parse_json(raw);
    if (!parsed.value) return std::nullopt;
    const json* obj = &*parsed.value;
    if (obj->is_array() && !obj->empty()) obj = &obj->front();
    if (obj->is_object() && obj->contains("label") && (*obj)["label"].is_object()) obj = &(*obj)["label"];
    if (!obj->is_object()) return std::nullopt;
    auto aspect = obj->find("aspect");
    if (aspect == obj->end() || !aspect->is_string()) return std::nullopt;
    const auto a = text::trim(aspect->get<std::string>());
    if (a.empty()) return std::nullopt;
    std::string d;
    if (auto desc = obj->find("description"); desc != obj->end() && desc->is_string())
        d = text::trim(desc->get<std::string>());
    return std::make_pair(a, d);
}

std::string bullet_list(const std::vector<const TalkingPoint*>& members, const std::vector<std::size_t>& order) {
    std::string out;
    for (auto i : order) out += "- " + members[i]->summary + "\n";
    return out;
}

const EmbeddingVector& embedding_of(const TalkingPoint& p) {
    if (!p.embedding) throw std::invalid_argument("talking point " + p.id + " has no embedding");
    return *p.embedding;
}

std::vector<std::string> union_members(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    std::set<std::string> seen(a.begin(), a.end());
    for (const auto& id : b)
        if (seen.insert(id).second) out.push_back(id);
    return out;
}

std::string input_digest(const std::vector<TalkingPoint>& points, std::size_t n_articles, const PtpOptions& o) {
    json j = json::array();
    for (const auto& p : points) j.push_back({p.id, p.embedding ? p.embedding->values() : std::vector<double>{}});
    const json options = {o.membership_threshold, o.label_exemplars, o.merge_neighbors, o.merge_iterations,
                          o.coherence_exemplars,  o.pool_fraction,   o.max_iterations};
    return sha256_hex(json{j, n_articles, options}.dump());
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t iteration) {
    return dir / ("ptp_iteration_" + std::to_string(iteration) + ".json");
}

}  // namespace

std::string PTPLabel::text() const { return description.empty() ? aspect : aspect + ": " + description; }

PointIndex index_points(const std::vector<TalkingPoint>& points) {
    PointIndex index;
    for (const auto& p : points)
        if (!index.emplace(p.id, &p).second) throw std::invalid_argument("duplicate talking point id " + p.id);
    return index;
}

std::vector<std::size_t> nearest_members(const std::vector<const TalkingPoint*>& members,
                                         const EmbeddingVector& target, std::size_t k) {
    std::vector<double> scores;
    std::vector<std::string> ids;
    for (const auto* m : members) {
        scores.push_back(cosine_similarity(embedding_of(*m), target));
        ids.push_back(m->id);
    }
    auto order = rank_descending(scores, ids);
    if (order.size() > k) order.resize(k);
    return order;
}

std::vector<std::optional<PTPLabel>> label_clusters(const std::vector<std::vector<const TalkingPoint*>>& clusters,
                                                    gateway::ModelGateway& gw, Diagnostics& diagnostics,
                                                    std::size_t exemplars) {
    const std::size_t n = clusters.size();
    std::vector<gateway::ChatRequest> requests;
    for (const auto& members : clusters) {
        if (members.empty()) throw std::invalid_argument("cannot label an empty cluster");
        std::vector<EmbeddingVector> vecs;
        for (const auto* m : members) vecs.push_back(embedding_of(*m));
        const auto centroid = mean_direction(vecs);
        const auto order = nearest_members(members, centroid, exemplars);
        requests.push_back(gateway::make_request("label_cluster", {{"points", bullet_list(members, order)}}, gw.prompts()));
    }
    const auto replies = gw.complete_all(requests);

    std::vector<std::optional<std::pair<std::string, std::string>>> parsed(n);
    std::vector<std::size_t> retry;
    std::vector<gateway::ChatRequest> repairs;
    for (std::size_t i = 0; i < n; ++i) {
        if (!replies[i].ok()) {
            diagnostics.push_back({"cluster " + std::to_string(i), "label request failed: " + replies[i].error});
            continue;
        }
        parsed[i] = parse_label_reply(*replies[i].text);
        if (!parsed[i]) {
            retry.push_back(i);
            const auto& raw = *replies[i].text;
            repairs.push_back(gateway::make_request(
                "repair_json", {{"malformed", raw.empty() ? std::string("(empty reply)") : raw}}, gw.prompts()));
        }
    }
    const auto repaired = gw.complete_all(repairs);
    for (std::size_t r = 0; r < retry.size(); ++r) {
        const auto i = retry[r];
        if (repaired[r].ok()) parsed[i] = parse_label_reply(*repaired[r].text);
        if (!parsed[i]) diagnostics.push_back({"cluster " + std::to_string(i), "discarded: label unparseable after repair"});
    }

    std::vector<std::optional<PTPLabel>> labels(n);
    std::vector<std::string> texts;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < n; ++i)
        if (parsed[i]) {
            PTPLabel label;
            label.aspect = parsed[i]->first;
            label.description = parsed[i]->second;
            texts.push_back(label.text());
            which.push_back(i);
            labels[i] = std::move(label);
        }
    if (!texts.empty()) {
        const auto vecs = gw.embed(texts);
        for (std::size_t t = 0; t < which.size(); ++t) labels[which[t]]->embedding = vecs[t];
    }
    return labels;
}

std::optional<PTPLabel> label_cluster(const std::vector<const TalkingPoint*>& members, const EmbeddingVector& centroid,
                                      gateway::ModelGateway& gw, Diagnostics& diagnostics, std::size_t exemplars) {
    if (members.empty()) throw std::invalid_argument("cannot label an empty cluster");
    const auto order = nearest_members(members, centroid, exemplars);
    const auto request =
        gateway::make_request("label_cluster", {{"points", bullet_list(members, order)}}, gw.prompts());
    std::optional<std::pair<std::string, std::string>> parsed;
    try {
        const auto raw = gw.complete(request);
        parsed = parse_label_reply(raw);
        if (!parsed)
            parsed = parse_label_reply(gw.complete(gateway::make_request(
                "repair_json", {{"malformed", raw.empty() ? std::string("(empty reply)") : raw}}, gw.prompts())));
    } catch (const gateway::GatewayError& e) {
        diagnostics.push_back({"cluster", std::string("label request failed: ") + e.what()});
        return std::nullopt;
    }
    if (!parsed) {
        diagnostics.push_back({"cluster", "discarded: label unparseable after repair"});
        return std::nullopt;
    }
    PTPLabel label{parsed->first, parsed->second, {}};
    label.embedding = gw.embed_one(label.text());
    return label;
}

std::vector<LabeledCluster> merge_redundant_labels(std::vector<LabeledCluster> clusters, gateway::ModelGateway& gw,
                                                   Diagnostics& diagnostics, const PtpOptions& options,
                                                   std::vector<MergeStep>* trace) {
    for (std::size_t iteration = 1; iteration <= options.merge_iterations; ++iteration) {
        const std::size_t n = clusters.size();
        if (n < 2) break;

        struct Pair {
            std::size_t a, b;
            double similarity;
        };
        std::set<std::pair<std::size_t, std::size_t>> seen;
        std::vector<Pair> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> scores;
            std::vector<std::size_t> keys;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                scores.push_back(cosine_similarity(clusters[i].label.embedding, clusters[j].label.embedding));
                keys.push_back(j);
            }
            auto order = rank_descending(scores, keys);
            for (std::size_t r = 0; r < std::min(options.merge_neighbors, order.size()); ++r) {
                const std::size_t j = keys[order[r]];
                const auto key = std::minmax(i, j);
                if (seen.insert(key).second) pairs.push_back({key.first, key.second, scores[order[r]]});
            }
        }
        std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
            if (x.similarity != y.similarity) return x.similarity > y.similarity;
            if (x.a != y.a) return x.a < y.a;
            return x.b < y.b;
        });

        std::vector<gateway::ChatRequest> requests;
        for (const auto& p : pairs)
            requests.push_back(gateway::make_request("merge_labels",
                                                     {{"aspect_a", clusters[p.a].label.aspect},
                                                      {"description_a", clusters[p.a].label.description},
                                                      {"aspect_b", clusters[p.b].label.aspect},
                                                      {"description_b", clusters[p.b].label.description}},
                                                     gw.prompts()));
        const auto replies = gw.complete_all(requests);

        std::vector<bool> touched(n, false), absorbed(n, false);
        std::size_t merges = 0;
        for (std::size_t r = 0; r < pairs.size(); ++r) {
            const auto& p = pairs[r];
            if (touched[p.a] || touched[p.b]) continue;
            const auto where = "labels \"" + clusters[p.a].label.aspect + "\" / \"" + clusters[p.b].label.aspect + "\"";
            if (!replies[r].ok()) {
                diagnostics.push_back({where, "merge query failed, pair skipped: " + replies[r].error});
                continue;
            }
            const auto same = lenient::parse_yes_no(*replies[r].text);
            if (!same) {
                diagnostics.push_back({where, "merge reply unparseable, pair skipped"});
                continue;
            }
            if (!*same) continue;

            const auto& A = clusters[p.a];
            const auto& B = clusters[p.b];
            bool a_wins;
            if (A.member_ids.size() != B.member_ids.size()) a_wins = A.member_ids.size() > B.member_ids.size();
            else if (A.label.aspect != B.label.aspect) a_wins = A.label.aspect < B.label.aspect;
            else a_wins = true;  // p.a < p.b
            const std::size_t win = a_wins ? p.a : p.b;
            const std::size_t lose = a_wins ? p.b : p.a;
            if (trace) trace->push_back({iteration, clusters[win].label.aspect, clusters[lose].label.aspect, p.similarity});
            clusters[win].member_ids = union_members(clusters[win].member_ids, clusters[lose].member_ids);
            absorbed[lose] = true;
            touched[p.a] = touched[p.b] = true;
            ++merges;
        }

        std::vector<LabeledCluster> next;
        for (std::size_t i = 0; i < n; ++i)
            if (!absorbed[i]) next.push_back(std::move(clusters[i]));
        clusters = std::move(next);
        if (merges == 0) break;
    }
    return clusters;
}

PruneResult prune_incoherent_clusters(std::vector<LabeledCluster> clusters, const PointIndex& points,
                                      gateway::ModelGateway& gw, Diagnostics& diagnostics, const PtpOptions& options) {
    std::vector<gateway::ChatRequest> requests;
    for (const auto& c : clusters) {
        std::vector<const TalkingPoint*> members;
        for (const auto& id : c.member_ids) {
            auto it = points.find(id);
            if (it == points.end()) throw std::invalid_argument("unknown talking point " + id);
            members.push_back(it->second);
        }
        const auto order = nearest_members(members, c.label.embedding, options.coherence_exemplars);
        requests.push_back(gateway::make_request(
            "coherence_check",
            {{"aspect", c.label.aspect}, {"description", c.label.description}, {"points", bullet_list(members, order)}},
            gw.prompts()));
    }
    const auto replies = gw.complete_all(requests);

    PruneResult result;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto where = "label \"" + clusters[i].label.aspect + "\"";
        std::optional<bool> coherent;
        if (!replies[i].ok()) {
            diagnostics.push_back({where, "coherence check failed, cluster kept: " + replies[i].error});
        } else if (!(coherent = lenient::parse_yes_no(*replies[i].text))) {
            diagnostics.push_back({where, "coherence reply unparseable, cluster kept"});
        }
        if (coherent.value_or(true)) {
            result.kept.push_back(std::move(clusters[i]));
        } else {
            diagnostics.push_back({where, "cluster removed as incoherent"});
            result.returned_to_pool.insert(result.returned_to_pool.end(), clusters[i].member_ids.begin(),
                                           clusters[i].member_ids.end());
        }
    }
    return result;
}

std::vector<std::optional<std::size_t>> assign_membership(const std::vector<const TalkingPoint*>& points,
                                                          const std::vector<PTPLabel>& labels, double threshold) {
    std::vector<std::optional<std::size_t>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& e = embedding_of(*points[i]);
        std::optional<std::size_t> best;
        double best_sim = 0.0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            const double s = cosine_similarity(e, labels[l].embedding);
            if (!best || s > best_sim) {
                best = l;
                best_sim = s;
            }
        }
        if (best && best_sim >= threshold) out[i] = best;
    }
    return out;
}

double PtpRun::coverage() const {
    return total_points == 0 ? 0.0 : static_cast<double>(assignment.size()) / static_cast<double>(total_points);
}

PtpRun identify_ptps(const std::vector<TalkingPoint>& points, std::size_t n_articles, gateway::ModelGateway& gw,
                     const PtpOptions& options) {
    const auto index = index_points(points);
    for (const auto& p : points) embedding_of(p);

    PtpRun run;
    run.total_points = points.size();
    std::vector<const TalkingPoint*> pool;
    for (const auto& p : points) pool.push_back(&p);
    const double stop_at = options.pool_fraction * static_cast<double>(n_articles);

    std::string digest;
    if (options.checkpoint_dir) {
        digest = input_digest(points, n_articles, options);
        std::filesystem::create_directories(*options.checkpoint_dir);
        for (std::size_t k = 1; std::filesystem::exists(checkpoint_path(*options.checkpoint_dir, k)); ++k) {
            std::ifstream in(checkpoint_path(*options.checkpoint_dir, k));
            const auto saved = json::parse(in, nullptr, false);
            if (saved.is_discarded() || saved.value("input_digest", "") != digest) break;
            run.clusters = saved.at("clusters").get<std::vector<PTPCluster>>();
            run.iterations.clear();
            for (const auto& it : saved.at("iterations")) {
                PtpIteration step;
                step.iteration = it.at("iteration");
                step.pool_before = it.at("pool_before");
                step.params = {it.at("min_cluster_size"), it.at("min_samples")};
                step.validity = it.at("validity");
                step.candidate_clusters = it.at("candidate_clusters");
                step.labeled = it.at("labeled");
                step.after_merge = it.at("after_merge");
                step.after_prune = it.at("after_prune");
                step.new_ptps = it.at("new_ptps");
                step.assigned = it.at("assigned");
                step.pool_after = it.at("pool_after");
                run.iterations.push_back(step);
            }
            const auto pool_ids = saved.at("pool").get<std::vector<std::string>>();
            pool.clear();
            for (const auto& id : pool_ids) pool.push_back(index.at(id));
        }
        for (const auto& c : run.clusters)
            for (const auto& id : c.member_ids) run.assignment[id] = c.id;
    }

    while (static_cast<double>(pool.size()) > stop_at) {
        if (run.iterations.size() >= options.max_iterations) {
            run.halt_reason = "iteration limit reached";
            break;
        }
        if (pool.size() < 10) {
            run.halt_reason = "pool smaller than the clustering minimum";
            break;
        }
        PtpIteration step;
        step.iteration = run.iterations.size() + 1;
        step.pool_before = pool.size();

        std::vector<EmbeddingVector> vecs;
        for (const auto* p : pool) vecs.push_back(*p->embedding);
        clustering::GridSearchResult grid;
        try {
            grid = clustering::grid_search(vecs);
        } catch (const clustering::NoClusteringFound&) {
            run.halt_reason = "no clustering found";
            break;
        }
        step.params = grid.best;
        step.validity = grid.best_score;
        step.candidate_clusters = grid.assignment.n_clusters;

        std::vector<std::vector<const TalkingPoint*>> candidates(grid.assignment.n_clusters);
        for (std::size_t c = 0; c < grid.assignment.n_clusters; ++c)
            for (auto i : grid.assignment.members[c]) candidates[c].push_back(pool[i]);
        const auto labels = label_clusters(candidates, gw, run.diagnostics, options.label_exemplars);

        std::vector<LabeledCluster> labeled;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (!labels[c]) continue;
            LabeledCluster lc{*labels[c], {}};
            for (const auto* p : candidates[c]) lc.member_ids.push_back(p->id);
            labeled.push_back(std::move(lc));
        }
        step.labeled = labeled.size();
        auto merged = merge_redundant_labels(std::move(labeled), gw, run.diagnostics, options);
        step.after_merge = merged.size();
        auto pruned = prune_incoherent_clusters(std::move(merged), index, gw, run.diagnostics, options);
        step.after_prune = pruned.kept.size();

        std::vector<PTPLabel> kept;
        for (const auto& c : pruned.kept) kept.push_back(c.label);
        const auto membership = assign_membership(pool, kept, options.membership_threshold);

        std::vector<std::vector<const TalkingPoint*>> groups(kept.size());
        std::vector<const TalkingPoint*> remaining;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (membership[i]) groups[*membership[i]].push_back(pool[i]);
            else remaining.push_back(pool[i]);
        }
        for (std::size_t l = 0; l < kept.size(); ++l) {
            if (groups[l].empty()) continue;
            PTPCluster cluster;
            cluster.id = static_cast<int>(run.clusters.size());
            cluster.label = kept[l];
            for (const auto* p : groups[l]) {
                cluster.member_ids.push_back(p->id);
                (p->ideology == Ideology::left ? cluster.left_member_ids : cluster.right_member_ids).push_back(p->id);
                run.assignment[p->id] = cluster.id;
            }
            run.clusters.push_back(std::move(cluster));
            ++step.new_ptps;
        }
        step.assigned = pool.size() - remaining.size();
        step.pool_after = remaining.size();
        run.iterations.push_back(step);
        if (step.assigned == 0) {
            run.halt_reason = "no point reached the membership threshold";
            break;
        }
        pool = std::move(remaining);

        if (options.checkpoint_dir) {
            json saved = {{"input_digest", digest}, {"clusters", run.clusters}, {"iterations", run.iterations}};
            std::vector<std::string> pool_ids;
            for (const auto* p : pool) pool_ids.push_back(p->id);
            saved["pool"] = pool_ids;
            std::ofstream out(checkpoint_path(*options.checkpoint_dir, step.iteration));
            out << saved.dump() << '\n';
        }
    }
    if (run.halt_reason.empty()) run.halt_reason = "pool at or below the stopping size";
    return run;
}

void to_json(json& j, const PTPCluster& c) {
    j = json{{"id", c.id},
             {"aspect", c.label.aspect},
             {"description", c.label.description},
             {"member_ids", c.member_ids},
             {"left_member_ids", c.left_member_ids},
             {"right_member_ids", c.right_member_ids},
             {"label_embedding", c.label.embedding}};
}

void from_json(const json& j, PTPCluster& c) {
    c.id = j.at("id").get<int>();
    c.label.aspect = j.at("aspect").get<std::string>();
    c.label.description = j.value("description", "");
    c.member_ids = j.at("member_ids").get<std::vector<std::string>>();
    c.left_member_ids = j.at("left_member_ids").get<std::vector<std::string>>();
    c.right_member_ids = j.at("right_member_ids").get<std::vector<std::string>>();
    c.label.embedding = j.at("label_embedding").get<EmbeddingVector>();
}

void to_json(json& j, const PtpIteration& it) {
    j = json{{"iteration", it.iteration},
             {"pool_before", it.pool_before},
             {"min_cluster_size", it.params.min_cluster_size},
             {"min_samples", it.params.min_samples},
             {"validity", it.validity},
             {"candidate_clusters", it.candidate_clusters},
             {"labeled", it.labeled},
             {"after_merge", it.after_merge},
             {"after_prune", it.after_prune},
             {"new_ptps", it.new_ptps},
             {"assigned", it.assigned},
             {"pool_after", it.pool_after}};
}

}  // namespace discourse
