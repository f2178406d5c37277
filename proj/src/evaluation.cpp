#include "discourse/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "discourse/hashing.hpp"
#include "discourse/lenient.hpp"
#include "discourse/text.hpp"

namespace discourse {

namespace {

using nlohmann::json;

std::string squash(const std::string& s) {
    std::string out;
    for (unsigned char c : s)
        if (!std::isspace(c) && c != '_' && c != '-' && c != '"' && c != '\'') out += static_cast<char>(std::tolower(c));
    return out;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + needle.size())) ++n;
    return n;
}

/// Partial Fisher-Yates: the first `k` entries become a uniform sample.
template <class T>
void sample_prefix(std::vector<T>& items, std::size_t k, SplitMix64& rng) {
    k = std::min(k, items.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(items.size() - i));
        std::swap(items[i], items[j]);
    }
}

std::string ideology_choice_where(const ClassificationRecord& r) {
    return r.method + " article " + r.article_id;
}

void apply_reply(ClassificationRecord& record, const gateway::Completion& reply, Diagnostics& diagnostics) {
    if (!reply.ok()) {
        diagnostics.push_back({ideology_choice_where(record), "backend failed, abstaining: " + reply.error});
        return;
    }
    record.raw_reply = *reply.text;
    const auto choice = parse_summary_choice(*reply.text);
    if (!choice) {
        diagnostics.push_back({ideology_choice_where(record), "unparseable choice, abstaining"});
        return;
    }
    record.predicted = *choice == 1 ? *record.summary1 : opposite(*record.summary1);
}

std::vector<ClassificationRecord> run_requests(
    std::vector<std::pair<gateway::ChatRequest, ClassificationRecord>> jobs, gateway::ModelGateway& gw,
    Diagnostics& diagnostics) {
    std::vector<gateway::ChatRequest> requests;
    for (const auto& job : jobs) requests.push_back(job.first);
    const auto replies = gw.complete_all(requests);
    std::vector<ClassificationRecord> out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        apply_reply(jobs[i].second, replies[i], diagnostics);
        out.push_back(std::move(jobs[i].second));
    }
    return out;
}

std::vector<std::string> distinct_articles(const std::vector<std::string>& point_ids, const PointIndex& points) {
    std::set<std::string> ids;
    for (const auto& pid : point_ids) {
        auto it = points.find(pid);
        if (it == points.end()) throw std::invalid_argument("unknown talking point " + pid);
        ids.insert(it->second->article_id);
    }
    return {ids.begin(), ids.end()};
}

std::optional<bool> answer_of(const json& value) {
    if (value.is_boolean()) return value.get<bool>();
    if (value.is_number_integer()) {
        const auto v = value.get<long long>();
        if (v == 0 || v == 1) return v == 1;
        return std::nullopt;
    }
    if (value.is_string()) return lenient::parse_yes_no(value.get<std::string>());
    return std::nullopt;
}

ClassMetrics metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.support = tp + fn;
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

}  // namespace

Ideology summary1_side(std::uint64_t seed, const std::string& article_id) {
    return (splitmix64(seed ^ fnv1a64(article_id)) & 1) ? Ideology::right : Ideology::left;
}

std::optional<int> parse_summary_choice(const std::string& reply) {
    const auto s = squash(reply);
    const auto one = count_of(s, "summary1");
    const auto two = count_of(s, "summary2");
    if (one > 0 && two == 0) return 1;
    if (two > 0 && one == 0) return 2;
    if (one > 0 || two > 0) return std::nullopt;
    const auto trimmed = text::trim(reply);
    if (trimmed.size() <= 3) {
        if (auto i = lenient::parse_index(trimmed, 1, 2)) return *i;
    }
    return std::nullopt;
}

ViewpointIndex index_viewpoints(const std::vector<PartisanPerspective>& perspectives, gateway::ModelGateway& gw) {
    std::vector<const PartisanPerspective*> ordered;
    for (const auto& p : perspectives) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(),
              [](const PartisanPerspective* a, const PartisanPerspective* b) { return a->ptp_id < b->ptp_id; });

    ViewpointIndex index;
    std::vector<std::string> texts;
    for (const auto* p : ordered)
        for (Ideology side : kIdeologies)
            if (const auto& v = p->viewpoint(side)) {
                const auto& d = p->digest(side);
                (side == Ideology::left ? index.left : index.right)
                    .push_back({&*v, d ? &*d : nullptr, EmbeddingVector{}});
                texts.push_back(v->text());
            }
    if (texts.empty()) return index;
    const auto vectors = gw.embed(texts);
    std::size_t next = 0;
    // Embeddings were requested in (ptp, left, right) order; replay that order.
    std::size_t li = 0, ri = 0;
    for (const auto* p : ordered)
        for (Ideology side : kIdeologies)
            if (p->viewpoint(side)) {
                auto& entry = side == Ideology::left ? index.left[li++] : index.right[ri++];
                entry.embedding = vectors[next++];
            }
    return index;
}

std::string ideology_summary(const ViewpointIndex& index, Ideology side, const EmbeddingVector& article_embedding,
                             const IdeologyOptions& options) {
    const auto& entries = index.side(side);
    if (entries.empty()) return "(no viewpoints)";
    std::vector<double> scores;
    std::vector<int> keys;
    for (const auto& e : entries) {
        scores.push_back(cosine_similarity(e.embedding, article_embedding));
        keys.push_back(e.viewpoint->ptp_id);
    }
    const auto order = rank_descending(scores, keys);
    std::string out;
    for (std::size_t r = 0; r < std::min(options.k, order.size()); ++r) {
        const auto& e = entries[order[r]];
        if (!out.empty()) out += "\n\n";
        out += e.viewpoint->text();
        if (options.with_metadata && e.digest) out += "\nMetadata:\n" + e.digest->text();
    }
    return out;
}

std::pair<gateway::ChatRequest, ClassificationRecord> ideology_request(const Article& article,
                                                                       const EmbeddingVector& article_embedding,
                                                                       const ViewpointIndex& index,
                                                                       const gateway::ModelGateway& gw,
                                                                       const IdeologyOptions& options) {
    ClassificationRecord record;
    record.article_id = article.id;
    record.true_label = article.bias;
    record.method = options.with_metadata ? method::kTopKMetadata : method::kTopK;
    record.summary1 = summary1_side(options.seed, article.id);
    record.issue = article.issue;
    auto request = gateway::make_request(
        "classify_ideology",
        {{"article", article.full_text()},
         {"summary1", ideology_summary(index, *record.summary1, article_embedding, options)},
         {"summary2", ideology_summary(index, opposite(*record.summary1), article_embedding, options)}},
        gw.prompts());
    return {std::move(request), std::move(record)};
}

ClassificationRecord classify_ideology(const Article& article, const ViewpointIndex& index,
                                       gateway::ModelGateway& gw, const IdeologyOptions& options) {
    Diagnostics ignored;
    return classify_ideology_all({&article}, index, gw, options, ignored).front();
}

std::vector<ClassificationRecord> classify_ideology_all(const std::vector<const Article*>& articles,
                                                        const ViewpointIndex& index, gateway::ModelGateway& gw,
                                                        const IdeologyOptions& options, Diagnostics& diagnostics) {
    if (articles.empty()) return {};
    std::vector<std::string> texts;
    for (const auto* a : articles) texts.push_back(a->full_text());
    const auto vectors = gw.embed(texts);
    std::vector<std::pair<gateway::ChatRequest, ClassificationRecord>> jobs;
    for (std::size_t i = 0; i < articles.size(); ++i)
        jobs.push_back(ideology_request(*articles[i], vectors[i], index, gw, options));
    return run_requests(std::move(jobs), gw, diagnostics);
}

std::vector<ClassificationRecord> classify_direct_all(const std::vector<const Article*>& articles,
                                                      gateway::ModelGateway& gw, Diagnostics& diagnostics) {
    std::vector<gateway::ChatRequest> requests;
    for (const auto* a : articles)
        requests.push_back(gateway::make_request("classify_direct", {{"article", a->full_text()}}, gw.prompts()));
    const auto replies = gw.complete_all(requests);
    std::vector<ClassificationRecord> out;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        ClassificationRecord r;
        r.article_id = articles[i]->id;
        r.true_label = articles[i]->bias;
        r.method = method::kDirect;
        r.issue = articles[i]->issue;
        if (!replies[i].ok()) {
            diagnostics.push_back({ideology_choice_where(r), "backend failed, abstaining: " + replies[i].error});
        } else {
            r.raw_reply = *replies[i].text;
            r.predicted = parse_ideology(text::to_lower(text::trim(r.raw_reply)));
            if (!r.predicted) {
                const auto words = text::tokenize(text::to_lower(r.raw_reply));
                const bool l = std::count(words.begin(), words.end(), "left") > 0;
                const bool rt = std::count(words.begin(), words.end(), "right") > 0;
                if (l != rt) r.predicted = l ? Ideology::left : Ideology::right;
            }
            if (!r.predicted) diagnostics.push_back({ideology_choice_where(r), "unparseable label, abstaining"});
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::optional<PartisanTexts> trp_baseline(const PTPCluster& ptp, const PointIndex& points, std::size_t top) {
    if (ptp.left_member_ids.empty() || ptp.right_member_ids.empty()) return std::nullopt;
    PartisanTexts texts;
    for (Ideology side : kIdeologies) {
        std::vector<std::string> lines;
        for (const auto* p : top_partition_points(ptp, side, points, top)) lines.push_back("- " + p->summary);
        (side == Ideology::left ? texts.left : texts.right) = text::join(lines, "\n");
    }
    texts.degenerate = texts.left == texts.right;
    return texts;
}

std::optional<PartisanTexts> perspective_texts(const PartisanPerspective& perspective, bool with_metadata) {
    if (!perspective.left || !perspective.right) return std::nullopt;
    PartisanTexts texts;
    for (Ideology side : kIdeologies) {
        auto t = perspective.viewpoint(side)->text();
        if (with_metadata && perspective.digest(side)) t += "\nMetadata:\n" + perspective.digest(side)->text();
        (side == Ideology::left ? texts.left : texts.right) = std::move(t);
    }
    texts.degenerate = texts.left == texts.right;
    return texts;
}

std::pair<gateway::ChatRequest, ClassificationRecord> partisan_request(const Article& article, const PTPCluster& ptp,
                                                                       const PartisanTexts& texts,
                                                                       const gateway::ModelGateway& gw,
                                                                       const PartisanOptions& options) {
    ClassificationRecord record;
    record.article_id = article.id;
    record.true_label = article.bias;
    record.method = options.method;
    record.summary1 = summary1_side(options.seed, article.id);
    record.ptp_id = ptp.id;
    record.issue = article.issue;
    auto request = gateway::make_request("classify_partisan",
                                         {{"theme", ptp.label.text()},
                                          {"article", article.full_text()},
                                          {"summary1", texts.side(*record.summary1)},
                                          {"summary2", texts.side(opposite(*record.summary1))}},
                                         gw.prompts());
    return {std::move(request), std::move(record)};
}

ClassificationRecord classify_partisan(const Article& article, const PTPCluster& ptp,
                                       const std::optional<PartisanTexts>& texts, gateway::ModelGateway& gw,
                                       const PartisanOptions& options) {
    if (!texts) {
        ClassificationRecord r;
        r.article_id = article.id;
        r.true_label = article.bias;
        r.method = options.method;
        r.ptp_id = ptp.id;
        r.issue = article.issue;
        r.applicable = false;
        return r;
    }
    Diagnostics ignored;
    std::vector<std::pair<gateway::ChatRequest, ClassificationRecord>> jobs;
    jobs.push_back(partisan_request(article, ptp, *texts, gw, options));
    return run_requests(std::move(jobs), gw, ignored).front();
}

std::vector<ClassificationRecord> classify_partisan_all(
    const std::vector<PTPCluster>& ptps, const std::map<int, std::optional<PartisanTexts>>& texts,
    const PointIndex& points, const EventCorpus& corpus, gateway::ModelGateway& gw, const PartisanOptions& options,
    Diagnostics& diagnostics) {
    std::vector<const PTPCluster*> ordered;
    for (const auto& p : ptps) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [](const PTPCluster* a, const PTPCluster* b) { return a->id < b->id; });

    std::vector<std::pair<gateway::ChatRequest, ClassificationRecord>> jobs;
    std::vector<ClassificationRecord> skipped;
    for (const auto* ptp : ordered) {
        auto it = texts.find(ptp->id);
        const std::optional<PartisanTexts> none;
        const auto& t = it == texts.end() ? none : it->second;
        if (t && t->degenerate)
            diagnostics.push_back({"ptp " + std::to_string(ptp->id), options.method + ": both sides read the same"});
        if (!t)
            diagnostics.push_back({"ptp " + std::to_string(ptp->id), options.method + ": not applicable, one-sided"});
        for (const auto& id : distinct_articles(ptp->member_ids, points)) {
            const auto& article = corpus.article(id);
            if (!t) {
                skipped.push_back(classify_partisan(article, *ptp, std::nullopt, gw, options));
                continue;
            }
            jobs.push_back(partisan_request(article, *ptp, *t, gw, options));
        }
    }
    auto out = run_requests(std::move(jobs), gw, diagnostics);
    out.insert(out.end(), skipped.begin(), skipped.end());
    std::stable_sort(out.begin(), out.end(), [](const ClassificationRecord& a, const ClassificationRecord& b) {
        return std::tie(a.ptp_id, a.article_id) < std::tie(b.ptp_id, b.article_id);
    });
    return out;
}

std::array<std::size_t, 5> quartile_bounds(std::size_t n) {
    return {0, n / 4, n / 2, 3 * n / 4, n};
}

std::vector<TopicTrial> plan_topic_trials(const std::vector<PTPCluster>& ptps, const PointIndex& points,
                                          const TopicOptions& options) {
    if (ptps.size() < options.negatives + 1)
        throw std::invalid_argument("topic diversity needs at least " + std::to_string(options.negatives + 1) +
                                    " PTPs, got " + std::to_string(ptps.size()));
    std::vector<const PTPCluster*> ordered;
    for (const auto& p : ptps) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [](const PTPCluster* a, const PTPCluster* b) { return a->id < b->id; });

    SplitMix64 rng(options.seed);
    std::vector<TopicTrial> trials;
    for (const auto* ptp : ordered) {
        std::vector<const TalkingPoint*> members;
        for (const auto& id : ptp->member_ids) {
            auto it = points.find(id);
            if (it == points.end()) throw std::invalid_argument("unknown talking point " + id);
            members.push_back(it->second);
        }
        const auto ranked = nearest_members(members, ptp->label.embedding, members.size());
        const auto bounds = quartile_bounds(ranked.size());
        for (int q = 0; q < 4; ++q) {
            std::vector<std::size_t> slots;
            for (auto r = bounds[q]; r < bounds[q + 1]; ++r) slots.push_back(r);
            sample_prefix(slots, (slots.size() + 1) / 2, rng);
            slots.resize((slots.size() + 1) / 2);
            std::sort(slots.begin(), slots.end());
            for (auto r : slots) {
                TopicTrial trial;
                trial.point_id = members[ranked[r]]->id;
                trial.ptp_id = ptp->id;
                trial.quartile = q;
                std::vector<int> others;
                for (const auto* o : ordered)
                    if (o->id != ptp->id) others.push_back(o->id);
                sample_prefix(others, options.negatives, rng);
                others.resize(options.negatives);
                trial.option_ptp_ids = others;
                trial.option_ptp_ids.push_back(ptp->id);
                sample_prefix(trial.option_ptp_ids, trial.option_ptp_ids.size(), rng);
                trial.correct_option = static_cast<std::size_t>(
                    std::find(trial.option_ptp_ids.begin(), trial.option_ptp_ids.end(), ptp->id) -
                    trial.option_ptp_ids.begin());
                trials.push_back(std::move(trial));
            }
        }
    }
    return trials;
}

TopicDiversityResult summarize_topic_trials(std::vector<TopicTrial> trials) {
    TopicDiversityResult result;
    std::size_t hits = 0;
    for (const auto& t : trials) {
        ++result.total[t.quartile];
        if (t.correct()) {
            ++result.hits[t.quartile];
            ++hits;
        }
    }
    for (int q = 0; q < 4; ++q)
        result.accuracy[q] = result.total[q] == 0 ? 0.0 : static_cast<double>(result.hits[q]) / result.total[q];
    result.overall = trials.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials.size());
    result.trials = std::move(trials);
    return result;
}

TopicDiversityResult topic_diversity_task(const std::vector<PTPCluster>& ptps, const PointIndex& points,
                                          gateway::ModelGateway& gw, const TopicOptions& options,
                                          Diagnostics& diagnostics) {
    auto trials = plan_topic_trials(ptps, points, options);
    std::map<int, const PTPCluster*> by_id;
    for (const auto& p : ptps) by_id[p.id] = &p;
    std::vector<gateway::ChatRequest> requests;
    for (const auto& t : trials) {
        std::string options_text;
        for (std::size_t i = 0; i < t.option_ptp_ids.size(); ++i)
            options_text += std::to_string(i + 1) + ". " + by_id.at(t.option_ptp_ids[i])->label.text() + "\n";
        requests.push_back(gateway::make_request(
            "topic_choice", {{"point", points.at(t.point_id)->summary}, {"options", options_text}}, gw.prompts()));
    }
    const auto replies = gw.complete_all(requests);
    for (std::size_t i = 0; i < trials.size(); ++i) {
        auto& t = trials[i];
        if (!replies[i].ok()) {
            diagnostics.push_back({"topic point " + t.point_id, "backend failed: " + replies[i].error});
            continue;
        }
        if (auto idx = lenient::parse_index(*replies[i].text, 1, static_cast<int>(t.option_ptp_ids.size())))
            t.chosen = static_cast<std::size_t>(*idx - 1);
        else
            diagnostics.push_back({"topic point " + t.point_id, "unparseable choice, counted wrong"});
    }
    return summarize_topic_trials(std::move(trials));
}

double coverage(const std::vector<TalkingPoint>& points, const std::map<std::string, int>& assignment) {
    if (points.empty()) throw std::invalid_argument("coverage of an empty point set");
    std::size_t assigned = 0;
    for (const auto& p : points) assigned += assignment.count(p.id);
    return static_cast<double>(assigned) / static_cast<double>(points.size());
}

EvidenceReport parse_evidence_reply(const std::string& reply, const std::string& body) {
    EvidenceReport report;
    for (int q = 0; q < 4; ++q) report.answers[q].question = q + 1;
    const auto parsed = lenient::parse_json(reply);
    if (!parsed.value) {
        report.diagnostics.push_back({"evidence", "unparseable reply"});
        return report;
    }
    json list;
    if (parsed.value->is_array()) list = *parsed.value;
    else if (parsed.value->is_object() && parsed.value->contains("answers") && (*parsed.value)["answers"].is_array())
        list = (*parsed.value)["answers"];
    else {
        report.diagnostics.push_back({"evidence", "reply has no answers list"});
        return report;
    }
    std::array<bool, 4> seen{};
    std::size_t position = 0;
    for (const auto& item : list) {
        ++position;
        if (!item.is_object()) {
            report.diagnostics.push_back({"evidence", "answer " + std::to_string(position) + " is not an object"});
            continue;
        }
        std::optional<int> q;
        if (auto it = item.find("question"); it != item.end()) {
            if (it->is_number_integer()) q = it->get<int>();
            else if (it->is_string()) q = lenient::parse_index(it->get<std::string>(), 1, 4);
        }
        if (!q) q = static_cast<int>(position);
        if (*q < 1 || *q > 4) {
            report.diagnostics.push_back({"evidence", "question number out of range"});
            continue;
        }
        auto& a = report.answers[*q - 1];
        if (auto it = item.find("answer"); it != item.end()) a.answer = answer_of(*it);
        if (!a.answer) report.diagnostics.push_back({"evidence", "question " + std::to_string(*q) + ": no yes/no"});
        if (auto it = item.find("evidence"); it != item.end()) {
            auto take = [&](const json& v) {
                if (!v.is_string()) return;
                auto quote = text::trim(v.get<std::string>());
                if (!quote.empty()) a.quotes.push_back(std::move(quote));
            };
            if (it->is_array())
                for (const auto& v : *it) take(v);
            else
                take(*it);
        }
        a.supported = !a.quotes.empty() && std::all_of(a.quotes.begin(), a.quotes.end(), [&](const std::string& s) {
            return body.find(s) != std::string::npos;
        });
        if (!a.quotes.empty() && !a.supported)
            report.diagnostics.push_back({"evidence", "question " + std::to_string(*q) + ": quote not in article"});
        seen[*q - 1] = true;
    }
    for (int q = 0; q < 4; ++q)
        if (!seen[q]) report.diagnostics.push_back({"evidence", "question " + std::to_string(q + 1) + ": not answered"});
    return report;
}

EvidenceReport extract_evidence(const Article& article, const Viewpoint& viewpoint, gateway::ModelGateway& gw) {
    if (article.body.empty() || viewpoint.bullets.empty())
        throw std::invalid_argument("extract_evidence needs a non-empty article and viewpoint");
    const auto reply = gw.complete(gateway::make_request(
        "extract_evidence", {{"summary", viewpoint.text()}, {"article", article.body}}, gw.prompts()));
    auto report = parse_evidence_reply(reply, article.body);
    if (!lenient::parse_json(reply).value) {
        const auto repaired = gw.complete(gateway::make_request(
            "repair_json", {{"malformed", reply.empty() ? std::string("(empty reply)") : reply}}, gw.prompts()));
        auto second = parse_evidence_reply(repaired, article.body);
        append(report.diagnostics, second.diagnostics);
        report.answers = second.answers;
    }
    report.article_id = article.id;
    report.ptp_id = viewpoint.ptp_id;
    report.ideology = viewpoint.ideology;
    return report;
}

EvalReport score_report(const std::vector<ClassificationRecord>& records) {
    EvalReport report;
    std::map<Ideology, std::size_t> tp, fp, fn;
    bool any_prediction = false;
    std::map<std::string, std::vector<ClassificationRecord>> by_issue;
    for (const auto& r : records) {
        if (!r.applicable) {
            ++report.not_applicable;
            continue;
        }
        ++report.records;
        if (!r.issue.empty()) by_issue[r.issue].push_back(r);
        if (!r.predicted) {
            ++report.abstentions;
            ++fn[r.true_label];
            continue;
        }
        any_prediction = true;
        if (*r.predicted == r.true_label) {
            ++tp[r.true_label];
        } else {
            ++fp[*r.predicted];
            ++fn[r.true_label];
        }
    }
    if (!any_prediction) throw std::invalid_argument("score_report: no applicable record has a prediction");
    for (Ideology c : kIdeologies) {
        report.per_class[c] = metrics(tp[c], fp[c], fn[c]);
        report.macro.precision += report.per_class[c].precision / 2.0;
        report.macro.recall += report.per_class[c].recall / 2.0;
        report.macro.f1 += report.per_class[c].f1 / 2.0;
    }
    report.macro.support = report.records;
    if (by_issue.size() > 1 || (by_issue.size() == 1 && by_issue.begin()->second.size() != report.records)) {
        for (const auto& [issue, subset] : by_issue) {
            if (std::none_of(subset.begin(), subset.end(), [](const auto& r) { return r.predicted.has_value(); }))
                continue;
            report.per_issue[issue] = score_report(subset);
        }
    } else if (by_issue.size() == 1) {
        auto copy = report;
        report.per_issue[by_issue.begin()->first] = copy;
    }
    return report;
}

void to_json(json& j, const ClassificationRecord& r) {
    j = json{{"article_id", r.article_id},
             {"true_label", r.true_label},
             {"predicted", r.predicted ? json(*r.predicted) : json("abstain")},
             {"method", r.method},
             {"summary1", r.summary1 ? json(*r.summary1) : json(nullptr)},
             {"ptp_id", r.ptp_id ? json(*r.ptp_id) : json(nullptr)},
             {"issue", r.issue},
             {"applicable", r.applicable},
             {"raw_reply", r.raw_reply}};
}

void from_json(const json& j, ClassificationRecord& r) {
    r.article_id = j.at("article_id").get<std::string>();
    r.true_label = j.at("true_label").get<Ideology>();
    const auto& p = j.at("predicted");
    r.predicted = p.is_string() && p.get<std::string>() == "abstain" ? std::nullopt
                                                                     : std::optional<Ideology>(p.get<Ideology>());
    r.method = j.at("method").get<std::string>();
    r.summary1 = j.contains("summary1") && !j["summary1"].is_null()
                     ? std::optional<Ideology>(j["summary1"].get<Ideology>())
                     : std::nullopt;
    r.ptp_id = j.contains("ptp_id") && !j["ptp_id"].is_null() ? std::optional<int>(j["ptp_id"].get<int>())
                                                               : std::nullopt;
    r.issue = j.value("issue", "");
    r.applicable = j.value("applicable", true);
    r.raw_reply = j.value("raw_reply", "");
}

void to_json(json& j, const ClassMetrics& m) {
    j = json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

void to_json(json& j, const EvalReport& r) {
    j = json{{"per_class", {{"left", r.per_class.at(Ideology::left)}, {"right", r.per_class.at(Ideology::right)}}},
             {"macro", r.macro},
             {"records", r.records},
             {"abstentions", r.abstentions},
             {"not_applicable", r.not_applicable}};
    json issues = json::object();
    for (const auto& [issue, sub] : r.per_issue) issues[issue] = sub;
    j["per_issue"] = issues;
}

void to_json(json& j, const TopicTrial& t) {
    j = json{{"point_id", t.point_id},
             {"ptp_id", t.ptp_id},
             {"quartile", t.quartile + 1},
             {"options", t.option_ptp_ids},
             {"correct_option", t.correct_option},
             {"chosen", t.chosen ? json(*t.chosen) : json(nullptr)}};
}

void to_json(json& j, const TopicDiversityResult& r) {
    j = json{{"accuracy", r.accuracy}, {"total", r.total}, {"hits", r.hits}, {"overall", r.overall},
             {"trials", r.trials}};
}

void to_json(json& j, const EvidenceAnswer& a) {
    j = json{{"question", a.question},
             {"answer", a.answer ? json(*a.answer ? "yes" : "no") : json(nullptr)},
             {"evidence", a.quotes},
             {"supported", a.supported}};
}

void to_json(json& j, const EvidenceReport& r) {
    j = json{{"article_id", r.article_id},
             {"ptp_id", r.ptp_id},
             {"ideology", r.ideology},
             {"answers", r.answers},
             {"diagnostics", r.diagnostics}};
}

}  // namespace discourse
