#include "discourse/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "discourse/gateway/gateway.hpp"
#include "discourse/lenient.hpp"

namespace discourse {

namespace {

using nlohmann::json;

std::vector<gateway::ChatRequest> question_requests(const Viewpoint& left, const Viewpoint& right,
                                                    const gateway::ModelGateway& gw) {
    std::vector<gateway::ChatRequest> out;
    for (const char* q : kAgreementQuestions)
        out.push_back(gateway::make_request(
            "agreement_question", {{"summary_a", left.text()}, {"summary_b", right.text()}, {"question", q}},
            gw.prompts()));
    return out;
}

AgreementScore fold_answers(int ptp_id, const gateway::Completion* replies, Diagnostics& diagnostics) {
    AgreementScore score;
    score.ptp_id = ptp_id;
    for (int q = 0; q < 5; ++q) {
        const auto where = "ptp " + std::to_string(ptp_id) + " question " + std::to_string(q + 1);
        if (!replies[q].ok()) {
            diagnostics.push_back({where, "backend failed, scored 0: " + replies[q].error});
            continue;
        }
        const auto answer = lenient::parse_yes_no(*replies[q].text);
        if (!answer) diagnostics.push_back({where, "unparseable answer, scored 0"});
        score.answers[q] = answer.value_or(false) ? 1 : 0;
        score.total += score.answers[q];
    }
    return score;
}

std::string num(double v, const char* fmt = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string exact(double v) { return num(v, "%.17g"); }

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* colour(SnapshotCategory c) {
    switch (c) {
        case SnapshotCategory::agreement: return "#4c9a5b";
        case SnapshotCategory::disagreement: return "#d1843b";
        case SnapshotCategory::agenda_setting: return "#7d5ba6";
        case SnapshotCategory::partisan_battle: return "#c23b3b";
        case SnapshotCategory::left_only: return "#3b6fc2";
        case SnapshotCategory::right_only: return "#b03060";
    }
    return "#888888";
}

constexpr SnapshotCategory kAllCategories[] = {
    SnapshotCategory::agreement,       SnapshotCategory::disagreement, SnapshotCategory::agenda_setting,
    SnapshotCategory::partisan_battle, SnapshotCategory::left_only,    SnapshotCategory::right_only};

}  // namespace

AgreementScore agreement_score(const Viewpoint& left, const Viewpoint& right, gateway::ModelGateway& gw,
                               Diagnostics& diagnostics) {
    const auto replies = gw.complete_all(question_requests(left, right, gw));
    return fold_answers(left.ptp_id, replies.data(), diagnostics);
}

std::vector<AgreementScore> score_agreements(const std::vector<PartisanPerspective>& perspectives,
                                             gateway::ModelGateway& gw, Diagnostics& diagnostics) {
    std::vector<const PartisanPerspective*> two_sided;
    for (const auto& p : perspectives)
        if (p.left && p.right) two_sided.push_back(&p);
    std::sort(two_sided.begin(), two_sided.end(),
              [](const PartisanPerspective* a, const PartisanPerspective* b) { return a->ptp_id < b->ptp_id; });
    std::vector<gateway::ChatRequest> requests;
    for (const auto* p : two_sided) {
        auto qs = question_requests(*p->left, *p->right, gw);
        requests.insert(requests.end(), qs.begin(), qs.end());
    }
    const auto replies = gw.complete_all(requests);
    std::vector<AgreementScore> out;
    for (std::size_t i = 0; i < two_sided.size(); ++i)
        out.push_back(fold_answers(two_sided[i]->ptp_id, replies.data() + 5 * i, diagnostics));
    return out;
}

std::string to_string(SnapshotCategory category) {
    switch (category) {
        case SnapshotCategory::agreement: return "agreement";
        case SnapshotCategory::disagreement: return "disagreement";
        case SnapshotCategory::agenda_setting: return "agenda-setting";
        case SnapshotCategory::partisan_battle: return "partisan-battle";
        case SnapshotCategory::left_only: return "left-only";
        case SnapshotCategory::right_only: return "right-only";
    }
    return "unknown";
}

std::optional<SnapshotCategory> parse_snapshot_category(const std::string& text) {
    for (auto c : kAllCategories)
        if (to_string(c) == text) return c;
    return std::nullopt;
}

std::vector<SnapshotEntry> build_snapshot(const std::vector<PTPCluster>& ptps,
                                          const std::vector<AgreementScore>& scores,
                                          const SnapshotOptions& options) {
    std::map<int, const AgreementScore*> by_id;
    for (const auto& s : scores) by_id[s.ptp_id] = &s;

    std::vector<SnapshotEntry> entries;
    for (const auto& ptp : ptps) {
        SnapshotEntry e;
        e.ptp_id = ptp.id;
        e.title = ptp.label.aspect;
        e.left_count = ptp.left_member_ids.size();
        e.right_count = ptp.right_member_ids.size();
        if (e.frequency() == 0) throw std::invalid_argument("ptp " + std::to_string(ptp.id) + " has no members");
        e.radius = options.radius_scale * std::sqrt(static_cast<double>(e.frequency()));
        if (e.left_count == 0 || e.right_count == 0) {
            e.x = e.left_count == 0 ? 1.0 : -1.0;
            e.y = 0.0;
            e.category = e.left_count == 0 ? SnapshotCategory::right_only : SnapshotCategory::left_only;
        } else {
            auto it = by_id.find(ptp.id);
            if (it == by_id.end())
                throw std::invalid_argument("no agreement score for two-sided ptp " + std::to_string(ptp.id));
            const double l = static_cast<double>(e.left_count);
            const double r = static_cast<double>(e.right_count);
            e.x = (r - l) / (r + l);
            e.total = it->second->total;
            e.y = (static_cast<double>(*e.total) - 3.5) / 2.5;
        }
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(),
              [](const SnapshotEntry& a, const SnapshotEntry& b) { return a.ptp_id < b.ptp_id; });

    // Top-quartile frequency cut over two-sided PTPs; ties at the cut are in.
    std::vector<std::size_t> freqs;
    for (const auto& e : entries)
        if (e.total) freqs.push_back(e.frequency());
    std::sort(freqs.rbegin(), freqs.rend());
    const std::size_t cut = freqs.empty() ? 0 : freqs[(freqs.size() + 3) / 4 - 1];

    for (auto& e : entries) {
        if (!e.total) continue;
        if (std::abs(e.x) >= kAgendaSettingBias)
            e.category = SnapshotCategory::agenda_setting;
        else if (*e.total <= kDisagreementMaxTotal && std::abs(e.x) < kPartisanBattleBias && e.frequency() >= cut)
            e.category = SnapshotCategory::partisan_battle;
        else
            e.category = *e.total > kDisagreementMaxTotal ? SnapshotCategory::agreement
                                                           : SnapshotCategory::disagreement;
    }
    return entries;
}

std::pair<double, double> canvas_point(double x, double y, const SnapshotOptions& o) {
    const double plot_w = o.width - 2.0 * o.margin;
    const double plot_h = o.height - 2.0 * o.margin;
    return {o.margin + (x + 1.0) / 2.0 * plot_w, o.margin + (o.y_extent - y) / (2.0 * o.y_extent) * plot_h};
}

std::string render_svg(const std::vector<SnapshotEntry>& entries, const SnapshotOptions& o) {
    if (entries.empty()) throw std::invalid_argument("render_svg: no entries");
    const auto [x0, y0] = canvas_point(0.0, 0.0, o);
    const auto [xl, yt] = canvas_point(-1.0, o.y_extent, o);
    const auto [xr, yb] = canvas_point(1.0, -o.y_extent, o);

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(o.width, "%.0f") + "\" height=\"" +
         num(o.height, "%.0f") + "\" viewBox=\"0 0 " + num(o.width, "%.0f") + " " + num(o.height, "%.0f") +
         "\" font-family=\"sans-serif\">\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"" + num(o.width) + "\" height=\"" + num(o.height) + "\" fill=\"#ffffff\"/>\n";
    s += "  <g class=\"axes\" stroke=\"#444444\" stroke-width=\"1\">\n";
    s += "    <line x1=\"" + num(xl) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(xr) + "\" y2=\"" + num(y0) + "\"/>\n";
    s += "    <line x1=\"" + num(x0) + "\" y1=\"" + num(yt) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(yb) + "\"/>\n";
    s += "  </g>\n";
    s += "  <g class=\"axis-labels\" font-size=\"12\" fill=\"#444444\">\n";
    s += "    <text x=\"" + num(xl) + "\" y=\"" + num(y0 - 6) + "\">left-dominant</text>\n";
    s += "    <text x=\"" + num(xr) + "\" y=\"" + num(y0 - 6) + "\" text-anchor=\"end\">right-dominant</text>\n";
    s += "    <text x=\"" + num(x0 + 6) + "\" y=\"" + num(yt + 12) + "\">agreement</text>\n";
    s += "    <text x=\"" + num(x0 + 6) + "\" y=\"" + num(yb - 4) + "\">disagreement</text>\n";
    s += "  </g>\n";
    s += "  <g class=\"ptps\">\n";
    for (const auto& e : entries) {
        const auto [cx, cy] = canvas_point(e.x, e.y, o);
        s += "    <circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(e.radius) + "\" fill=\"" +
             colour(e.category) + "\" fill-opacity=\"0.6\" stroke=\"#222222\" data-ptp=\"" +
             std::to_string(e.ptp_id) + "\" data-x=\"" + exact(e.x) + "\" data-y=\"" + exact(e.y) +
             "\" data-radius=\"" + exact(e.radius) + "\" data-category=\"" + to_string(e.category) + "\">" +
             "<title>" + escape_xml(e.title) + "</title></circle>\n";
        s += "    <text x=\"" + num(cx) + "\" y=\"" + num(cy + 4) +
             "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(e.ptp_id) + "</text>\n";
    }
    s += "  </g>\n";
    s += "  <g class=\"legend\" font-size=\"11\">\n";
    double ly = o.margin / 2.0;
    double lx = o.margin;
    for (auto c : kAllCategories) {
        s += "    <circle cx=\"" + num(lx) + "\" cy=\"" + num(ly) + "\" r=\"5\" fill=\"" + colour(c) + "\"/>\n";
        s += "    <text x=\"" + num(lx + 8) + "\" y=\"" + num(ly + 4) + "\">" + to_string(c) + "</text>\n";
        lx += (o.width - 2.0 * o.margin) / 6.0;
    }
    s += "  </g>\n";
    s += "</svg>\n";
    return s;
}

json snapshot_json(const std::vector<SnapshotEntry>& entries, const SnapshotOptions& o) {
    json list = json::array();
    for (const auto& e : entries) {
        json j = e;
        const auto [cx, cy] = canvas_point(e.x, e.y, o);
        j["cx"] = cx;
        j["cy"] = cy;
        list.push_back(std::move(j));
    }
    return json{{"canvas", {{"width", o.width}, {"height", o.height}, {"margin", o.margin}, {"y_extent", o.y_extent}}},
                {"radius_scale", o.radius_scale},
                {"entries", list}};
}

void write_snapshot(const std::filesystem::path& dir, const std::vector<SnapshotEntry>& entries,
                    const SnapshotOptions& options, const std::string& stem) {
    std::filesystem::create_directories(dir);
    const auto svg = render_svg(entries, options);
    auto write = [](const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out || !(out << content)) throw std::runtime_error("cannot write " + path.string());
    };
    write(dir / (stem + ".svg"), svg);
    write(dir / (stem + ".json"), lenient::safe_dump(snapshot_json(entries, options), 2) + "\n");
}

void to_json(json& j, const AgreementScore& s) {
    j = json{{"ptp_id", s.ptp_id}, {"answers", s.answers}, {"total", s.total}};
}

void from_json(const json& j, AgreementScore& s) {
    s.ptp_id = j.at("ptp_id").get<int>();
    s.answers = j.at("answers").get<std::array<int, 5>>();
    s.total = j.at("total").get<int>();
}

void to_json(json& j, const SnapshotEntry& e) {
    j = json{{"ptp_id", e.ptp_id},
             {"title", e.title},
             {"left_count", e.left_count},
             {"right_count", e.right_count},
             {"frequency", e.frequency()},
             {"x", e.x},
             {"y", e.y},
             {"radius", e.radius},
             {"total", e.total ? json(*e.total) : json(nullptr)},
             {"category", to_string(e.category)}};
}

}  // namespace discourse
