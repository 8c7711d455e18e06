#include "atlas/label_stats.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "atlas/importance.hpp"

namespace atlas {

std::optional<LabelViewMode> label_view_mode_from_string(std::string_view s) {
    if (s == "focus") return LabelViewMode::focus;
    if (s == "context") return LabelViewMode::context;
    return std::nullopt;
}

namespace {

// label id -> painter indices carrying it directly / via a descendant.
struct LabelMembership {
    std::map<std::string, std::set<std::size_t>> direct;
    std::map<std::string, std::set<std::size_t>> rolled;
};

template <typename Range>
LabelMembership membership(const corpus::Corpus& corpus, const LabelTaxonomy& taxonomy,
                           const Range& painters) {
    LabelMembership m;
    for (auto i : painters) {
        for (const auto& l : own_labels(corpus.painter(i))) {
            if (!taxonomy.contains(l)) continue;
            m.direct[l].insert(i);
            m.rolled[l].insert(i);
            for (const auto& a : taxonomy.ancestors(l)) m.rolled[a].insert(i);
        }
    }
    return m;
}

int count_in(const std::map<std::string, std::set<std::size_t>>& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? 0 : static_cast<int>(it->second.size());
}

}  // namespace

std::vector<DimensionDistribution> label_distribution(const corpus::Corpus& corpus,
                                                      const LabelTaxonomy& taxonomy,
                                                      std::span<const std::size_t> selection,
                                                      LabelViewMode mode) {
    std::vector<std::size_t> all(corpus.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto sel = membership(corpus, taxonomy, selection);
    const auto tot = membership(corpus, taxonomy, all);

    std::vector<DimensionDistribution> out;
    for (auto d : kDimensions) {
        DimensionDistribution dist{d, {}};
        for (const auto& node : taxonomy.nodes()) {
            if (node.dimension != d) continue;
            LabelCount c;
            c.label_id = node.id;
            c.parent = node.parent;
            c.depth = taxonomy.depth(node.id);
            c.count = count_in(sel.direct, node.id);
            c.rolled_count = count_in(sel.rolled, node.id);
            c.total_count = count_in(tot.direct, node.id);
            c.total_rolled_count = count_in(tot.rolled, node.id);
            if (mode == LabelViewMode::focus && c.rolled_count == 0) continue;
            dist.labels.push_back(std::move(c));
        }
        out.push_back(std::move(dist));
    }
    return out;
}

namespace {

std::vector<CombinationNode> grow(const std::vector<std::vector<std::vector<std::string>>>& labels_by_dim,
                                  const std::vector<std::size_t>& members, std::span<const Dimension> order,
                                  std::size_t level, int min_count) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (auto m : members) {
        for (const auto& l : labels_by_dim[m][static_cast<std::size_t>(order[level])]) groups[l].push_back(m);
    }
    std::vector<CombinationNode> nodes;
    for (auto& [label, group] : groups) {
        const int count = static_cast<int>(group.size());
        if (count < min_count) continue;
        CombinationNode node{label, order[level], count, {}};
        if (level + 1 < order.size()) node.children = grow(labels_by_dim, group, order, level + 1, min_count);
        nodes.push_back(std::move(node));
    }
    std::stable_sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.label_id < b.label_id;
    });
    return nodes;
}

std::size_t leaf_count(const std::vector<CombinationNode>& nodes, std::size_t depth, std::size_t levels) {
    std::size_t n = 0;
    for (const auto& node : nodes) {
        n += (depth + 1 == levels) ? 1 : leaf_count(node.children, depth + 1, levels);
    }
    return n;
}

}  // namespace

CombinationTree label_combinations(const corpus::Corpus& corpus, const LabelTaxonomy& taxonomy,
                                   std::span<const std::size_t> selection,
                                   std::span<const Dimension> order, int min_count,
                                   std::size_t target_combinations) {
    if (order.empty() || order.size() > 3) throw std::invalid_argument("dimension order must name 1 to 3 dimensions");
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (order[i] == order[j]) throw std::invalid_argument("dimension order repeats a dimension");
        }
    }
    min_count = std::max(1, min_count);

    // Per painter, per dimension: the labels it carries directly.
    std::vector<std::vector<std::vector<std::string>>> labels_by_dim(corpus.size());
    std::vector<std::size_t> members;
    for (auto i : selection) {
        auto& dims = labels_by_dim[i];
        dims.assign(3, {});
        for (const auto& l : own_labels(corpus.painter(i))) {
            if (const auto* node = taxonomy.find(l)) dims[static_cast<std::size_t>(node->dimension)].push_back(l);
        }
        members.push_back(i);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());

    CombinationTree tree;
    tree.order.assign(order.begin(), order.end());
    tree.min_count = min_count;
    tree.roots = grow(labels_by_dim, members, order, 0, min_count);

    // Smallest threshold whose full-depth combination count fits the target.
    int t = 1;
    while (true) {
        auto pruned = grow(labels_by_dim, members, order, 0, t);
        if (leaf_count(pruned, 0, order.size()) <= target_combinations) break;
        ++t;
    }
    tree.recommended_min_count = t;
    return tree;
}

nlohmann::json to_json(const std::vector<DimensionDistribution>& d) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& dim : d) {
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& c : dim.labels) {
            labels.push_back({{"label_id", c.label_id},
                              {"parent", c.parent ? nlohmann::json(*c.parent) : nlohmann::json(nullptr)},
                              {"depth", c.depth},
                              {"count", c.count},
                              {"rolled_count", c.rolled_count},
                              {"total_count", c.total_count},
                              {"total_rolled_count", c.total_rolled_count}});
        }
        out.push_back({{"dimension", to_string(dim.dimension)}, {"labels", labels}});
    }
    return out;
}

namespace {

nlohmann::json node_json(const CombinationNode& n) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(node_json(c));
    return {{"label_id", n.label_id}, {"dimension", to_string(n.dimension)}, {"count", n.count}, {"children", children}};
}

}  // namespace

nlohmann::json to_json(const CombinationTree& t) {
    nlohmann::json order = nlohmann::json::array();
    for (auto d : t.order) order.push_back(to_string(d));
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& r : t.roots) roots.push_back(node_json(r));
    return {{"order", order},
            {"min_count", t.min_count},
            {"recommended_min_count", t.recommended_min_count},
            {"roots", roots}};
}

}  // namespace atlas
