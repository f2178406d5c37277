#include "snapshot_fixture.hpp"

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace discourse::testing {

namespace pt = boost::property_tree;

AgreementScore score_with_total(int ptp_id, int total) {
    AgreementScore s;
    s.ptp_id = ptp_id;
    for (int q = 0; q < total; ++q) s.answers[q] = 1;
    s.total = total;
    return s;
}

PTPCluster ptp_with_counts(int id, std::size_t left, std::size_t right) {
    PTPCluster p;
    p.id = id;
    p.label.aspect = "PTP " + std::to_string(id);
    for (std::size_t i = 0; i < left + right; ++i) {
        const auto pid = "p" + std::to_string(id) + "-" + std::to_string(i) + "#0";
        p.member_ids.push_back(pid);
        (i < left ? p.left_member_ids : p.right_member_ids).push_back(pid);
    }
    return p;
}

SnapshotFigure snapshot_figure() {
    using C = SnapshotCategory;
    struct Row {
        int id;
        std::size_t left, right;
        int total;  // -1 for one-sided
        C category;
    };
    // The six most frequent two-sided PTPs are 2 (40), 4 (30), 5 (26), 6 (24),
    // 7 (23) and 1 (22); only 2 among them is both low-scoring and balanced.
    const Row rows[] = {
        {1, 10, 12, 5, C::agreement},       {2, 20, 20, 3, C::partisan_battle}, {3, 0, 8, -1, C::right_only},
        {4, 15, 15, 5, C::agreement},       {5, 14, 12, 4, C::agreement},       {6, 12, 12, 4, C::agreement},
        {7, 11, 12, 5, C::agreement},       {8, 5, 5, 1, C::disagreement},      {9, 2, 8, 1, C::agenda_setting},
        {10, 6, 4, 3, C::disagreement},     {11, 4, 4, 2, C::disagreement},     {12, 3, 5, 2, C::disagreement},
        {13, 6, 5, 2, C::disagreement},     {14, 7, 3, 2, C::disagreement},     {15, 4, 6, 2, C::disagreement},
        {16, 1, 9, 3, C::agenda_setting},   {17, 8, 8, 3, C::disagreement},     {18, 5, 4, 3, C::disagreement},
        {19, 3, 3, 3, C::disagreement},     {20, 9, 1, 3, C::agenda_setting},   {21, 6, 7, 3, C::disagreement},
        {22, 5, 6, 4, C::agreement},        {23, 7, 6, 4, C::agreement},        {24, 5, 0, -1, C::left_only},
    };
    SnapshotFigure f;
    for (const auto& r : rows) {
        f.ptps.push_back(ptp_with_counts(r.id, r.left, r.right));
        if (r.total >= 0) f.scores.push_back(score_with_total(r.id, r.total));
        f.expected[r.id] = r.category;
    }
    return f;
}

namespace {

void collect(const pt::ptree& node, std::vector<SvgCircle>& out) {
    for (const auto& [name, child] : node) {
        if (name == "circle") {
            const auto attrs = child.get_child_optional("<xmlattr>");
            if (attrs && attrs->get_optional<int>("data-ptp")) {
                SvgCircle c;
                c.ptp_id = attrs->get<int>("data-ptp");
                c.cx = attrs->get<double>("cx");
                c.cy = attrs->get<double>("cy");
                c.r = attrs->get<double>("r");
                c.x = attrs->get<double>("data-x");
                c.y = attrs->get<double>("data-y");
                c.radius = attrs->get<double>("data-radius");
                c.category = attrs->get<std::string>("data-category");
                out.push_back(c);
            }
        }
        if (name != "<xmlattr>") collect(child, out);
    }
}

}  // namespace

std::vector<SvgCircle> parse_svg_circles(const std::string& svg, std::string* root_name) {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    std::size_t roots = 0;
    for (const auto& [name, child] : tree) {
        if (name == "<xmlcomment>") continue;
        ++roots;
        if (root_name) *root_name = name;
    }
    if (roots != 1) throw std::runtime_error("SVG must have exactly one root element");
    std::vector<SvgCircle> out;
    collect(tree, out);
    return out;
}

}  // namespace discourse::testing
