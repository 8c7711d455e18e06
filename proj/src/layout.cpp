#include "atlas/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "atlas/detail/rng.hpp"

namespace atlas::layout {

void validate(const LayoutParams& p) {
    if (p.year_first && p.year_last && *p.year_first >= *p.year_last) {
        throw std::invalid_argument("year range must be non-degenerate");
    }
    if (p.iterations < 1) throw std::invalid_argument("iterations must be at least 1");
    if (!(p.width > 0) || !(p.height > 0)) throw std::invalid_argument("viewport must have positive size");
    if (!(p.base_width > 0) || p.gap < 0 || p.min_hill_height < 0 || !(p.glyph_width > 0)) {
        throw std::invalid_argument("hill and glyph sizes must be positive");
    }
    if (p.tick_step < 1) throw std::invalid_argument("tick_step must be at least 1");
}

LayoutParams resolve(LayoutParams p, const lineage::InheritanceForest& forest) {
    if (!p.year_first || !p.year_last) {
        int lo = 0, hi = 1;
        bool any = false;
        for (const auto& u : forest.graph.units) {
            for (int y : u.member_years) {
                lo = any ? std::min(lo, y) : y;
                hi = any ? std::max(hi, y) : y;
                any = true;
            }
        }
        if (hi <= lo) hi = lo + 1;
        if (!p.year_first) p.year_first = lo;
        if (!p.year_last) p.year_last = std::max(hi, *p.year_first + 1);
    }
    validate(p);
    return p;
}

double vertical_scale(const LayoutParams& p, double year) {
    const double first = p.year_first.value_or(900), last = p.year_last.value_or(1900);
    const double t = (std::clamp(year, first, last) - first) / (last - first);
    return t * p.height;
}

std::vector<Point> Hill::polygon() const {
    return {Point(left, bottom), Point(right(), top), Point(right(), bottom)};
}

namespace {

// Leftmost x >= start where [x, x + w) clears every box (sorted by x0).
double first_clear(double start, double w, double gap, std::vector<Box> blockers) {
    std::sort(blockers.begin(), blockers.end(), [](const Box& a, const Box& b) { return a.x0 < b.x0; });
    double x = start;
    for (const auto& b : blockers) {
        if (b.x0 < x + w && b.x1 > x) x = b.x1 + gap;
    }
    return x;
}

bool y_overlap(const Box& a, const Box& b) { return a.y0 < b.y1 && b.y0 < a.y1; }

}  // namespace

Mountain shape_hills(const lineage::InheritanceForest& forest, lineage::ClusterIndex cluster, const LayoutParams& params) {
    const auto& g = forest.graph;
    Mountain m;
    m.cluster = cluster;
    for (auto u : forest.partition.clusters.at(cluster).units) {
        if (!forest.direct_parent[u]) {
            m.root = u;
            break;
        }
    }

    // Depth-first hierarchy order.
    std::vector<lineage::UnitIndex> order;
    std::vector<lineage::UnitIndex> stack{m.root};
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        order.push_back(u);
        const auto& kids = forest.tree_children[u];
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }

    std::map<lineage::UnitIndex, Hill> hills;
    for (auto u : order) {
        Hill h;
        h.unit = u;
        h.top = vertical_scale(params, g.units[u].start_year);
        h.bottom = vertical_scale(params, g.units[u].end_year);
        h.width = params.base_width;
        hills.emplace(u, h);
    }
    // Bottom-up: an upper hill widens by half of every child hill it overlaps vertically.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        auto& h = hills.at(*it);
        for (auto c : forest.tree_children[*it]) {
            const auto& ch = hills.at(c);
            if (y_overlap(h.box(params.min_hill_height), ch.box(params.min_hill_height))) h.width += ch.width / 2.0;
        }
    }
    // Pre-order packing: start under the parent, move right past any vertical overlap.
    std::vector<Box> placed;
    for (auto u : order) {
        auto& h = hills.at(u);
        const double start = forest.direct_parent[u] ? hills.at(*forest.direct_parent[u]).left : 0.0;
        const auto probe = h.box(params.min_hill_height);
        std::vector<Box> blockers;
        for (const auto& b : placed) {
            if (y_overlap(b, probe)) blockers.push_back(b);
        }
        h.left = first_clear(start, h.width, params.gap, std::move(blockers));
        placed.push_back(h.box(params.min_hill_height));
        m.hills.push_back(h);
    }
    Box box{0, 0, 0, 0};
    bool first = true;
    for (const auto& b : placed) {
        if (first) {
            box = b;
            first = false;
        } else {
            box = {std::min(box.x0, b.x0), std::min(box.y0, b.y0), std::max(box.x1, b.x1), std::max(box.y1, b.y1)};
        }
    }
    m.local_box = box;
    m.width = box.x1 - box.x0;
    return m;
}

void declutter_names(std::vector<NameLabel>& names) {
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& na = names[a];
        const auto& nb = names[b];
        if (na.anchor.y() != nb.anchor.y()) return na.anchor.y() < nb.anchor.y();
        if (na.emphasized != nb.emphasized) return na.emphasized;
        return na.painter_id < nb.painter_id;
    });
    std::vector<Box> shown;
    for (auto i : order) {
        auto& n = names[i];
        n.shown = std::none_of(shown.begin(), shown.end(), [&](const Box& b) { return b.intersects(n.box); });
        if (n.shown) shown.push_back(n.box);
    }
}

std::vector<double> place_mountains(const std::vector<Mountain>& mountains,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& links,
                                    const LayoutParams& params) {
    const auto n = mountains.size();
    if (n == 0) return {};
    Eigen::ArrayXd width(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) width(static_cast<Eigen::Index>(i)) = mountains[i].width;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (params.seed != 0) {
        detail::Rng rng(params.seed);
        for (std::size_t i = n - 1; i > 0; --i) {
            std::swap(order[i], order[static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(i)))]);
        }
    }
    Eigen::ArrayXd x(static_cast<Eigen::Index>(n));
    {
        const double total = width.sum() + params.gap * static_cast<double>(n - 1);
        double cursor = (params.width - total) / 2.0;
        for (auto i : order) {
            x(static_cast<Eigen::Index>(i)) = cursor;
            cursor += width(static_cast<Eigen::Index>(i)) + params.gap;
        }
    }
    std::vector<std::size_t> slot(n);
    for (std::size_t k = 0; k < n; ++k) slot[order[k]] = k;

    constexpr double kSpring = 0.05;
    constexpr double kRepel = 0.5;
    const double max_step = params.width / 10.0;
    auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

    for (int it = 0; it < params.iterations; ++it) {
        Eigen::ArrayXd force = Eigen::ArrayXd::Zero(idx(n));
        for (auto [a, b] : links) {
            if (a == b) continue;
            const double ca = x(idx(a)) + width(idx(a)) / 2.0;
            const double cb = x(idx(b)) + width(idx(b)) / 2.0;
            const double rest = (width(idx(a)) + width(idx(b))) / 2.0 + params.gap;
            const double d = cb - ca;
            if (std::abs(d) <= rest) continue;
            const double f = kSpring * (std::abs(d) - rest) * (d > 0 ? 1.0 : -1.0);
            force(idx(a)) += f;
            force(idx(b)) -= f;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto bi = mountains[i].local_box.shifted(x(idx(i)));
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto bj = mountains[j].local_box.shifted(x(idx(j)));
                if (!bi.intersects(bj)) continue;
                const double overlap = std::min(bi.x1, bj.x1) - std::max(bi.x0, bj.x0);
                const double push = kRepel * (overlap + params.gap) / 2.0;
                const double ci = (bi.x0 + bi.x1) / 2.0, cj = (bj.x0 + bj.x1) / 2.0;
                const bool i_left = ci < cj || (ci == cj && slot[i] < slot[j]);
                force(idx(i)) += i_left ? -push : push;
                force(idx(j)) += i_left ? push : -push;
            }
        }
        x += force.max(-max_step).min(max_step);
    }

    // Left-to-right separation sweep guarantees disjoint boxes.
    std::vector<std::size_t> sweep(n);
    std::iota(sweep.begin(), sweep.end(), 0);
    std::sort(sweep.begin(), sweep.end(), [&](std::size_t a, std::size_t b) {
        const double xa = mountains[a].local_box.x0 + x(idx(a)), xb = mountains[b].local_box.x0 + x(idx(b));
        if (xa != xb) return xa < xb;
        return slot[a] < slot[b];
    });
    std::vector<Box> placed;
    for (auto i : sweep) {
        const auto& lb = mountains[i].local_box;
        const auto probe = lb.shifted(x(idx(i)));
        std::vector<Box> blockers;
        for (const auto& b : placed) {
            if (y_overlap(b, probe)) blockers.push_back(b);
        }
        const double left = first_clear(probe.x0, lb.x1 - lb.x0, params.gap, std::move(blockers));
        x(idx(i)) = left - lb.x0;
        placed.push_back(lb.shifted(x(idx(i))));
    }
    double min_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) min_x = std::min(min_x, x(idx(i)) + mountains[i].local_box.x0);
    if (min_x < 0.0) x -= min_x;
    return {x.begin(), x.end()};
}

namespace {

std::size_t glyph_count(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

// Latest member of `parent` that is a master of `child`; first member if none.
std::size_t master_node(const lineage::UnitGraph& g, lineage::UnitIndex parent, lineage::UnitIndex child) {
    const auto& masters = g.units[child].master_set;
    const auto& members = g.units[parent].members;
    for (std::size_t k = members.size(); k-- > 0;) {
        if (std::binary_search(masters.begin(), masters.end(), members[k])) return k;
    }
    return 0;
}

}  // namespace

MountainLayout compute_layout(const lineage::InheritanceForest& forest, LayoutParams params) {
    params = resolve(std::move(params), forest);
    MountainLayout out;
    out.params = params;
    const auto& g = forest.graph;
    const auto visible = params.lod ? lineage::lod_filter(forest, *params.lod) : forest.cluster_visible;

    for (const auto& t : forest.trees()) {
        if (visible[t.cluster]) out.mountains.push_back(shape_hills(forest, t.cluster, params));
    }
    // unit -> (mountain, hill)
    std::map<lineage::UnitIndex, std::pair<std::size_t, std::size_t>> where;
    std::map<lineage::ClusterIndex, std::size_t> mountain_of;
    for (std::size_t mi = 0; mi < out.mountains.size(); ++mi) {
        mountain_of[out.mountains[mi].cluster] = mi;
        for (std::size_t hi = 0; hi < out.mountains[mi].hills.size(); ++hi) where[out.mountains[mi].hills[hi].unit] = {mi, hi};
    }
    auto shown = [&](lineage::UnitIndex u) { return where.contains(u); };

    std::vector<const lineage::CrossLink*> ladders;
    std::vector<std::pair<std::size_t, std::size_t>> links;
    for (const auto& l : forest.cross_links) {
        if (!shown(l.source) || !mountain_of.contains(l.target_cluster)) continue;
        if (std::any_of(l.chain.begin(), l.chain.end(), [&](auto u) { return !shown(u); })) continue;
        ladders.push_back(&l);
        links.emplace_back(where.at(l.source).first, mountain_of.at(l.target_cluster));
    }

    const auto xs = place_mountains(out.mountains, links, params);
    for (std::size_t mi = 0; mi < out.mountains.size(); ++mi) out.mountains[mi].x = xs[mi];

    auto hill = [&](lineage::UnitIndex u) -> const Hill& {
        auto [mi, hi] = where.at(u);
        return out.mountains[mi].hills[hi];
    };
    auto right = [&](lineage::UnitIndex u) { return out.mountains[where.at(u).first].x + hill(u).right(); };
    auto node = [&](lineage::UnitIndex u, std::size_t k) {
        return Point(right(u), vertical_scale(params, g.units[u].member_years[k]));
    };

    for (const auto& m : out.mountains) {
        for (const auto& h : m.hills) {
            for (std::size_t k = 0; k < g.units[h.unit].members.size(); ++k) {
                out.dots.push_back({g.units[h.unit].members[k], DotKind::painter, h.unit, node(h.unit, k)});
            }
        }
    }

    std::set<std::string> emphasized;
    // Streams: first node of the child, across to the parent's ridge, up to the master node.
    for (const auto& m : out.mountains) {
        for (const auto& h : m.hills) {
            const auto u = h.unit;
            const auto p = forest.direct_parent[u];
            if (!p) continue;
            Edge e;
            e.kind = EdgeKind::stream;
            e.source = u;
            e.target = g.units[*p].id;
            const Point start = node(u, 0);
            e.points.push_back(start);
            const Point across(right(*p), start.y());
            if (across.x() != start.x()) {
                e.points.push_back(across);
                e.solid.push_back(false);
            }
            const auto target = master_node(g, *p, u);
            const auto& masters = g.units[u].master_set;
            const auto& members = g.units[*p].members;
            for (std::size_t k = members.size(); k-- > target + 1;) {
                const auto pt = node(*p, k);
                if (pt.y() >= start.y()) continue;
                e.points.push_back(pt);
                e.solid.push_back(std::binary_search(masters.begin(), masters.end(), members[k]));
            }
            e.points.push_back(node(*p, target));
            e.solid.push_back(true);
            emphasized.insert(members[target]);
            out.edges.push_back(std::move(e));
        }
    }
    // Ladders: one horizontal run to the anchor, then up the chain's master nodes.
    for (const auto* l : ladders) {
        Edge e;
        e.kind = EdgeKind::ladder;
        e.source = l->source;
        const Point start = node(l->source, 0);
        e.points.push_back(start);
        if (l->virtual_node) {
            const auto& v = forest.virtual_nodes[*l->virtual_node];
            const Point anchor(right(v.host_unit), start.y());
            e.target = v.id;
            e.points.push_back(anchor);
            e.solid.push_back(false);
            out.dots.push_back({v.id, DotKind::virtual_node, v.host_unit, anchor});
        } else {
            const auto w = *l->anchor_unit;
            e.target = g.units[w].id;
            e.points.push_back(Point(right(w), start.y()));
            e.solid.push_back(false);
            e.points.push_back(node(w, 0));
            e.solid.push_back(false);
        }
        for (auto it = l->chain.rbegin(); it != l->chain.rend(); ++it) {
            e.points.push_back(node(*it, master_node(g, *it, l->source)));
            e.solid.push_back(true);
        }
        out.edges.push_back(std::move(e));
    }

    for (const auto& d : out.dots) {
        if (d.kind != DotKind::painter) continue;
        const auto& unit = g.units[d.unit];
        const auto k = static_cast<std::size_t>(std::find(unit.members.begin(), unit.members.end(), d.id) - unit.members.begin());
        NameLabel n;
        n.painter_id = d.id;
        n.text = unit.member_names[k];
        n.anchor = d.pos;
        const double len = params.glyph_width * static_cast<double>(std::max<std::size_t>(1, glyph_count(n.text)));
        n.box = {d.pos.x() - params.glyph_width, d.pos.y(), d.pos.x(), d.pos.y() + len};
        n.emphasized = emphasized.contains(d.id);
        out.names.push_back(std::move(n));
    }
    declutter_names(out.names);

    const int first = *params.year_first, last = *params.year_last;
    for (int y = static_cast<int>(std::ceil(static_cast<double>(first) / params.tick_step)) * params.tick_step; y <= last;
         y += params.tick_step) {
        out.ticks.push_back({y, vertical_scale(params, y)});
    }

    for (const auto& m : out.mountains) out.extent_width = std::max(out.extent_width, m.box().x1);
    out.overflow = out.extent_width > params.width;
    return out;
}

namespace {

double r3(double v) {
    const double r = std::round(v * 1000.0) / 1000.0;
    return r == 0.0 ? 0.0 : r;
}

nlohmann::json pt(const Point& p) { return nlohmann::json::array({r3(p.x()), r3(p.y())}); }

nlohmann::json box_json(const Box& b) { return nlohmann::json::array({r3(b.x0), r3(b.y0), r3(b.x1), r3(b.y1)}); }

}  // namespace

nlohmann::json to_json(const MountainLayout& layout, const lineage::InheritanceForest& forest) {
    const auto& g = forest.graph;
    const auto& p = layout.params;
    nlohmann::json params{{"width", r3(p.width)},
                          {"height", r3(p.height)},
                          {"year_first", *p.year_first},
                          {"year_last", *p.year_last},
                          {"base_width", r3(p.base_width)},
                          {"gap", r3(p.gap)},
                          {"min_hill_height", r3(p.min_hill_height)},
                          {"iterations", p.iterations},
                          {"seed", p.seed},
                          {"glyph_width", r3(p.glyph_width)},
                          {"lod", p.lod ? nlohmann::json(*p.lod) : nlohmann::json(nullptr)}};

    nlohmann::json mountains = nlohmann::json::array();
    for (const auto& m : layout.mountains) {
        nlohmann::json hills = nlohmann::json::array();
        for (const auto& h : m.hills) {
            nlohmann::json poly = nlohmann::json::array();
            for (const auto& q : h.polygon()) poly.push_back(pt(q + Point(m.x, 0)));
            const auto& unit = g.units[h.unit];
            hills.push_back({{"unit", unit.id},
                             {"left", r3(m.x + h.left)},
                             {"right", r3(m.x + h.right())},
                             {"width", r3(h.width)},
                             {"height", r3(h.height())},
                             {"peak", pt(h.peak() + Point(m.x, 0))},
                             {"polygon", poly},
                             {"box", box_json(h.box(p.min_hill_height).shifted(m.x))},
                             {"parent", forest.direct_parent[h.unit] ? nlohmann::json(g.units[*forest.direct_parent[h.unit]].id)
                                                                     : nlohmann::json(nullptr)}});
        }
        mountains.push_back({{"cluster", forest.partition.clusters[m.cluster].id},
                             {"root", g.units[m.root].id},
                             {"x", r3(m.x)},
                             {"width", r3(m.width)},
                             {"box", box_json(m.box())},
                             {"hills", hills}});
    }
    nlohmann::json dots = nlohmann::json::array();
    for (const auto& d : layout.dots) {
        dots.push_back({{"id", d.id},
                        {"kind", d.kind == DotKind::painter ? "painter" : "virtual"},
                        {"unit", g.units[d.unit].id},
                        {"pos", pt(d.pos)}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : layout.edges) {
        nlohmann::json points = nlohmann::json::array();
        for (const auto& q : e.points) points.push_back(pt(q));
        nlohmann::json solidity = nlohmann::json::array();
        for (bool s : e.solid) solidity.push_back(s ? "solid" : "dashed");
        edges.push_back({{"kind", e.kind == EdgeKind::stream ? "stream" : "ladder"},
                         {"source", g.units[e.source].id},
                         {"target", e.target},
                         {"points", points},
                         {"segments", solidity}});
    }
    nlohmann::json names = nlohmann::json::array();
    for (const auto& n : layout.names) {
        names.push_back({{"painter", n.painter_id},
                         {"text", n.text},
                         {"anchor", pt(n.anchor)},
                         {"box", box_json(n.box)},
                         {"shown", n.shown},
                         {"emphasized", n.emphasized}});
    }
    nlohmann::json ticks = nlohmann::json::array();
    for (const auto& t : layout.ticks) ticks.push_back({{"year", t.year}, {"y", r3(t.y)}});
    return {{"params", params},
            {"timeline", ticks},
            {"mountains", mountains},
            {"dots", dots},
            {"edges", edges},
            {"names", names},
            {"overflow", layout.overflow},
            {"extent_width", r3(layout.extent_width)}};
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    auto j = nlohmann::json(r3(v));
    return j.dump();
}

}  // namespace

std::string to_svg(const MountainLayout& layout, const lineage::InheritanceForest& forest) {
    const auto& g = forest.graph;
    const double w = std::max(layout.params.width, layout.extent_width);
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(w) + " " + num(layout.params.height) + "\">\n";
    s += "<g class=\"timeline\">\n";
    for (const auto& t : layout.ticks) {
        s += "<text x=\"2\" y=\"" + num(t.y) + "\">" + std::to_string(t.year) + "</text>\n";
    }
    s += "</g>\n";
    for (const auto& m : layout.mountains) {
        s += "<g class=\"mountain\" data-cluster=\"" + forest.partition.clusters[m.cluster].id + "\">\n";
        for (const auto& h : m.hills) {
            std::string pts;
            for (const auto& q : h.polygon()) {
                if (!pts.empty()) pts += ' ';
                pts += num(q.x() + m.x) + "," + num(q.y());
            }
            s += "<polygon class=\"hill\" data-unit=\"" + g.units[h.unit].id + "\" points=\"" + pts + "\"/>\n";
        }
        s += "</g>\n";
    }
    for (const auto& e : layout.edges) {
        s += std::string("<g class=\"") + (e.kind == EdgeKind::stream ? "stream" : "ladder") + "\" data-source=\"" +
             g.units[e.source].id + "\" data-target=\"" + e.target + "\">\n";
        for (std::size_t i = 0; i + 1 < e.points.size(); ++i) {
            s += "<line x1=\"" + num(e.points[i].x()) + "\" y1=\"" + num(e.points[i].y()) + "\" x2=\"" +
                 num(e.points[i + 1].x()) + "\" y2=\"" + num(e.points[i + 1].y()) + "\"" +
                 (e.solid[i] ? "" : " stroke-dasharray=\"4 3\"") + "/>\n";
        }
        s += "</g>\n";
    }
    for (const auto& d : layout.dots) {
        s += std::string("<circle class=\"") + (d.kind == DotKind::painter ? "painter" : "virtual") + "\" data-id=\"" +
             d.id + "\" cx=\"" + num(d.pos.x()) + "\" cy=\"" + num(d.pos.y()) + "\" r=\"3\"/>\n";
    }
    for (const auto& n : layout.names) {
        if (!n.shown) continue;
        s += std::string("<text class=\"name") + (n.emphasized ? " seal" : "") + "\" writing-mode=\"tb\" x=\"" +
             num(n.box.x0 + (n.box.x1 - n.box.x0) / 2.0) + "\" y=\"" + num(n.box.y0) + "\">" + xml_escape(n.text) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace atlas::layout
