#include "atlas/lineage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "atlas/error.hpp"

namespace atlas::lineage {

namespace {

std::string unit_id(std::size_t i) { return "u" + std::to_string(i); }
std::string cluster_id(std::size_t i) { return "c" + std::to_string(i); }
std::string virtual_id(std::size_t i) { return "v" + std::to_string(i); }

void sort_unique(std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<std::pair<UnitIndex, UnitIndex>> UnitGraph::edges() const {
    std::vector<std::pair<UnitIndex, UnitIndex>> out;
    for (UnitIndex u = 0; u < parents.size(); ++u) {
        for (auto p : parents[u]) out.emplace_back(u, p);
    }
    return out;
}

std::optional<UnitIndex> UnitGraph::find(std::string_view id) const {
    for (UnitIndex u = 0; u < units.size(); ++u) {
        if (units[u].id == id) return u;
    }
    return std::nullopt;
}

std::optional<UnitIndex> UnitGraph::unit_of_painter(std::string_view painter_id) const {
    for (UnitIndex u = 0; u < units.size(); ++u) {
        const auto& m = units[u].members;
        if (std::find(m.begin(), m.end(), painter_id) != m.end()) return u;
    }
    return std::nullopt;
}

std::vector<UnitIndex> UnitGraph::topological_order() const {
    using Key = std::pair<int, UnitIndex>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    std::vector<std::size_t> pending(units.size());
    for (UnitIndex u = 0; u < units.size(); ++u) {
        pending[u] = parents[u].size();
        if (pending[u] == 0) ready.emplace(units[u].start_year, u);
    }
    std::vector<UnitIndex> order;
    order.reserve(units.size());
    while (!ready.empty()) {
        auto [_, u] = ready.top();
        ready.pop();
        order.push_back(u);
        for (auto c : children[u]) {
            if (--pending[c] == 0) ready.emplace(units[c].start_year, c);
        }
    }
    if (order.size() != units.size()) throw std::logic_error("unit graph contains a cycle");
    return order;
}

UnitGraph build_logic_units(const corpus::Corpus& corpus) {
    const auto n = corpus.size();
    // Group painters by their exact master set; master-less painters stay alone.
    std::map<std::vector<std::string>, std::vector<std::size_t>> by_masters;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& masters = corpus.masters_of(i);
        if (masters.empty()) {
            groups.push_back({i});
            continue;
        }
        std::vector<std::string> key;
        for (auto m : masters) key.push_back(corpus.painter(m).id);
        std::sort(key.begin(), key.end());
        by_masters[key].push_back(i);
    }
    for (auto& [_, members] : by_masters) groups.push_back(std::move(members));

    auto birth_then_id = [&](std::size_t a, std::size_t b) {
        const int ya = corpus.effective_birth(a), yb = corpus.effective_birth(b);
        return std::tie(ya, corpus.painter(a).id) < std::tie(yb, corpus.painter(b).id);
    };
    for (auto& g : groups) std::sort(g.begin(), g.end(), birth_then_id);
    std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) { return birth_then_id(a.front(), b.front()); });

    UnitGraph graph;
    std::vector<UnitIndex> unit_of(n);
    for (UnitIndex u = 0; u < groups.size(); ++u) {
        LogicUnit unit;
        unit.id = unit_id(u);
        for (auto i : groups[u]) {
            unit_of[i] = u;
            unit.members.push_back(corpus.painter(i).id);
            unit.member_names.push_back(corpus.painter(i).name);
            unit.member_years.push_back(corpus.effective_birth(i));
        }
        for (auto m : corpus.masters_of(groups[u].front())) unit.master_set.push_back(corpus.painter(m).id);
        std::sort(unit.master_set.begin(), unit.master_set.end());
        unit.start_year = unit.member_years.front();
        unit.end_year = unit.member_years.back();
        graph.units.push_back(std::move(unit));
    }
    graph.parents.assign(groups.size(), {});
    graph.children.assign(groups.size(), {});
    for (UnitIndex u = 0; u < groups.size(); ++u) {
        for (auto m : corpus.masters_of(groups[u].front())) graph.parents[u].push_back(unit_of[m]);
        sort_unique(graph.parents[u]);
        for (auto p : graph.parents[u]) graph.children[p].push_back(u);
    }
    for (auto& c : graph.children) sort_unique(c);
    (void)graph.topological_order();  // asserts acyclicity
    return graph;
}

ClusterPartition cluster_units(const UnitGraph& graph, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
    ClusterPartition part;
    constexpr auto kUnassigned = static_cast<ClusterIndex>(-1);
    part.assignment.assign(graph.size(), kUnassigned);

    auto open_cluster = [&](UnitIndex u) {
        const auto k = part.clusters.size();
        part.clusters.push_back({cluster_id(k), {u}, k});
        part.assignment[u] = k;
    };

    for (auto u : graph.topological_order()) {
        const auto& parents = graph.parents[u];
        if (parents.empty()) {
            open_cluster(u);
            continue;
        }
        std::map<ClusterIndex, std::size_t> votes;
        for (auto p : parents) ++votes[part.assignment[p]];
        // std::map iterates by creation index, so the first maximum wins ties.
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        const double p = static_cast<double>(best->second) / static_cast<double>(parents.size());
        if (p > theta) {
            part.clusters[best->first].units.push_back(u);
            part.assignment[u] = best->first;
        } else {
            open_cluster(u);
        }
    }
    return part;
}

std::vector<std::optional<UnitIndex>> build_trees(const UnitGraph& graph, const ClusterPartition& partition) {
    std::vector<std::optional<UnitIndex>> parent(graph.size());
    for (UnitIndex u = 0; u < graph.size(); ++u) {
        const int start = graph.units[u].start_year;
        for (auto p : graph.parents[u]) {
            if (partition.assignment[p] != partition.assignment[u]) continue;
            if (!parent[u]) {
                parent[u] = p;
                continue;
            }
            const auto key = [&](UnitIndex x) {
                return std::make_tuple(std::abs(graph.units[x].start_year - start), graph.units[x].start_year, x);
            };
            if (key(p) < key(*parent[u])) parent[u] = p;
        }
    }
    return parent;
}

namespace {

// Ancestor test restricted to units of one cluster.
class ClusterReach {
public:
    ClusterReach(const UnitGraph& g, const ClusterPartition& p) : g_(g), p_(p) {}

    bool is_ancestor(UnitIndex a, UnitIndex b) const {
        const auto k = p_.assignment[b];
        if (p_.assignment[a] != k || a == b) return false;
        std::vector<UnitIndex> stack{b};
        std::set<UnitIndex> seen{b};
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            for (auto q : g_.parents[cur]) {
                if (p_.assignment[q] != k || !seen.insert(q).second) continue;
                if (q == a) return true;
                stack.push_back(q);
            }
        }
        return false;
    }

private:
    const UnitGraph& g_;
    const ClusterPartition& p_;
};

}  // namespace

InheritanceForest reconstruct_chains(const UnitGraph& graph, const ClusterPartition& partition,
                                     const std::vector<std::optional<UnitIndex>>& direct_parents) {
    InheritanceForest f;
    f.graph = graph;
    f.partition = partition;
    f.direct_parent = direct_parents;
    f.tree_children.assign(graph.size(), {});
    f.ridge_chain.assign(graph.size(), {});
    f.cluster_visible.assign(partition.clusters.size(), true);

    for (UnitIndex u = 0; u < graph.size(); ++u) {
        if (direct_parents[u]) f.tree_children[*direct_parents[u]].push_back(u);
    }
    for (auto& c : f.tree_children) {
        std::sort(c.begin(), c.end(), [&](UnitIndex a, UnitIndex b) {
            return std::tie(graph.units[a].start_year, a) < std::tie(graph.units[b].start_year, b);
        });
    }

    std::vector<std::size_t> rank(graph.size());
    {
        const auto order = graph.topological_order();
        for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    }
    const ClusterReach reach(graph, partition);

    // Parent-set lookup for anchor search.
    std::map<std::pair<ClusterIndex, std::vector<UnitIndex>>, UnitIndex> by_parent_set;
    for (UnitIndex w = 0; w < graph.size(); ++w) {
        by_parent_set.emplace(std::make_pair(partition.assignment[w], graph.parents[w]), w);
    }

    for (UnitIndex u = 0; u < graph.size(); ++u) {
        std::map<ClusterIndex, std::vector<UnitIndex>> groups;
        for (auto p : graph.parents[u]) groups[partition.assignment[p]].push_back(p);
        const auto star = direct_parents[u];

        for (auto& [k, members] : groups) {
            // Most derived first.
            std::sort(members.begin(), members.end(), [&](UnitIndex a, UnitIndex b) {
                return std::tie(rank[b], b) < std::tie(rank[a], a);
            });
            std::vector<bool> used(members.size(), false);
            auto take_next = [&]() -> std::optional<std::size_t> {
                if (star) {
                    for (std::size_t i = 0; i < members.size(); ++i) {
                        if (!used[i] && members[i] == *star) return i;
                    }
                }
                for (std::size_t i = 0; i < members.size(); ++i) {
                    if (!used[i]) return i;
                }
                return std::nullopt;
            };
            while (auto head = take_next()) {
                used[*head] = true;
                std::vector<UnitIndex> chain{members[*head]};
                while (true) {
                    std::optional<std::size_t> next;
                    for (std::size_t i = 0; i < members.size(); ++i) {
                        if (!used[i] && reach.is_ancestor(members[i], chain.back())) {
                            next = i;
                            break;  // members are most-derived first, so this is the nearest
                        }
                    }
                    if (!next) break;
                    used[*next] = true;
                    chain.push_back(members[*next]);
                }
                std::reverse(chain.begin(), chain.end());

                if (star && std::find(chain.begin(), chain.end(), *star) != chain.end()) {
                    f.ridge_chain[u] = std::move(chain);
                    continue;
                }
                CrossLink link;
                link.source = u;
                link.target_cluster = k;
                auto sorted_chain = chain;
                std::sort(sorted_chain.begin(), sorted_chain.end());
                auto it = by_parent_set.find({k, sorted_chain});
                if (it != by_parent_set.end() && it->second != u) {
                    link.anchor_unit = it->second;
                } else {
                    link.virtual_node = f.virtual_nodes.size();
                    f.virtual_nodes.push_back({virtual_id(f.virtual_nodes.size()), chain.back(), u});
                }
                link.chain = std::move(chain);
                f.cross_links.push_back(std::move(link));
            }
        }
    }
    return f;
}

std::vector<InheritanceForest::Tree> InheritanceForest::trees() const {
    std::vector<Tree> out;
    for (const auto& c : partition.clusters) {
        for (auto u : c.units) {
            if (!direct_parent[u]) {
                out.push_back({c.creation_index, u});
                break;
            }
        }
    }
    return out;
}

std::size_t InheritanceForest::painter_count(ClusterIndex c) const {
    std::size_t n = 0;
    for (auto u : partition.clusters.at(c).units) n += graph.units[u].members.size();
    return n;
}

bool InheritanceForest::operator==(const InheritanceForest& o) const {
    return graph == o.graph && partition == o.partition && direct_parent == o.direct_parent &&
           tree_children == o.tree_children && ridge_chain == o.ridge_chain && cross_links == o.cross_links &&
           virtual_nodes == o.virtual_nodes && cluster_visible == o.cluster_visible && theta == o.theta &&
           lod == o.lod;
}

std::vector<bool> lod_filter(const InheritanceForest& forest, std::size_t n_lod) {
    const auto& clusters = forest.partition.clusters;
    std::vector<ClusterIndex> order(clusters.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> sizes(clusters.size());
    for (ClusterIndex c = 0; c < clusters.size(); ++c) sizes[c] = forest.painter_count(c);
    std::stable_sort(order.begin(), order.end(), [&](ClusterIndex a, ClusterIndex b) {
        if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
        return a < b;
    });
    std::vector<bool> visible(clusters.size(), false);
    std::size_t shown = 0;
    for (auto c : order) {
        if (sizes[c] == 0) continue;
        if (shown > n_lod) break;
        visible[c] = true;
        shown += sizes[c];
    }
    return visible;
}

InheritanceForest reconstruct(const corpus::Corpus& corpus, double theta, std::optional<std::size_t> n_lod) {
    auto graph = build_logic_units(corpus);
    auto partition = cluster_units(graph, theta);
    auto parents = build_trees(graph, partition);
    auto forest = reconstruct_chains(graph, partition, parents);
    forest.theta = theta;
    forest.lod = n_lod;
    if (n_lod) forest.cluster_visible = lod_filter(forest, *n_lod);
    return forest;
}

InheritanceForest reassign_parent(const InheritanceForest& forest, std::string_view unit_id_str,
                                  std::optional<std::string_view> new_parent_id) {
    const auto& g = forest.graph;
    auto unit = g.find(unit_id_str);
    if (!unit) throw NotFoundError("unknown unit '" + std::string(unit_id_str) + "'");
    std::optional<UnitIndex> target;
    if (new_parent_id) {
        target = g.find(*new_parent_id);
        if (!target) throw NotFoundError("unknown unit '" + std::string(*new_parent_id) + "'");
        for (std::optional<UnitIndex> cur = target; cur; cur = forest.direct_parent[*cur]) {
            if (*cur == *unit) throw ValidationError("would create cycle");
        }
    }

    std::vector<UnitIndex> subtree{*unit};
    for (std::size_t i = 0; i < subtree.size(); ++i) {
        for (auto c : forest.tree_children[subtree[i]]) subtree.push_back(c);
    }
    const std::set<UnitIndex> moving(subtree.begin(), subtree.end());

    auto partition = forest.partition;
    for (auto& c : partition.clusters) {
        std::erase_if(c.units, [&](UnitIndex u) { return moving.contains(u); });
    }
    ClusterIndex dest;
    if (target) {
        dest = partition.assignment[*target];
    } else {
        dest = partition.clusters.size();
        partition.clusters.push_back({cluster_id(dest), {}, dest});
    }
    for (auto u : subtree) {
        partition.clusters[dest].units.push_back(u);
        partition.assignment[u] = dest;
    }

    auto parents = forest.direct_parent;
    parents[*unit] = target;
    auto out = reconstruct_chains(g, partition, parents);
    out.theta = forest.theta;
    out.lod = forest.lod;
    if (out.lod) out.cluster_visible = lod_filter(out, *out.lod);
    return out;
}

nlohmann::json to_json(const InheritanceForest& f) {
    const auto& g = f.graph;
    auto uid = [&](UnitIndex u) { return g.units[u].id; };
    auto ids = [&](const std::vector<UnitIndex>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (auto u : v) a.push_back(uid(u));
        return a;
    };

    nlohmann::json units = nlohmann::json::array();
    for (UnitIndex u = 0; u < g.size(); ++u) {
        const auto& unit = g.units[u];
        units.push_back({{"id", unit.id},
                         {"members", unit.members},
                         {"member_names", unit.member_names},
                         {"member_years", unit.member_years},
                         {"master_set", unit.master_set},
                         {"start_year", unit.start_year},
                         {"end_year", unit.end_year},
                         {"parents", ids(g.parents[u])},
                         {"cluster", f.partition.clusters[f.partition.assignment[u]].id},
                         {"direct_parent", f.direct_parent[u] ? nlohmann::json(uid(*f.direct_parent[u])) : nlohmann::json(nullptr)},
                         {"children", ids(f.tree_children[u])},
                         {"ridge_chain", ids(f.ridge_chain[u])},
                         {"visible", static_cast<bool>(f.cluster_visible[f.partition.assignment[u]])}});
    }
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : f.partition.clusters) {
        clusters.push_back({{"id", c.id},
                            {"creation_index", c.creation_index},
                            {"units", ids(c.units)},
                            {"painter_count", f.painter_count(c.creation_index)},
                            {"visible", static_cast<bool>(f.cluster_visible[c.creation_index])}});
    }
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : f.trees()) {
        nlohmann::json parent_map = nlohmann::json::object();
        for (auto u : f.partition.clusters[t.cluster].units) {
            parent_map[uid(u)] = f.direct_parent[u] ? nlohmann::json(uid(*f.direct_parent[u])) : nlohmann::json(nullptr);
        }
        trees.push_back({{"cluster", f.partition.clusters[t.cluster].id}, {"root", uid(t.root)}, {"parent_map", parent_map}});
    }
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : f.cross_links) {
        links.push_back({{"source", uid(l.source)},
                         {"chain", ids(l.chain)},
                         {"target_cluster", f.partition.clusters[l.target_cluster].id},
                         {"anchor_unit", l.anchor_unit ? nlohmann::json(uid(*l.anchor_unit)) : nlohmann::json(nullptr)},
                         {"virtual_node", l.virtual_node ? nlohmann::json(f.virtual_nodes[*l.virtual_node].id) : nlohmann::json(nullptr)}});
    }
    nlohmann::json virtuals = nlohmann::json::array();
    for (const auto& v : f.virtual_nodes) {
        virtuals.push_back({{"id", v.id}, {"host_unit", uid(v.host_unit)}, {"source_unit", uid(v.source_unit)}});
    }
    return {{"theta", f.theta},
            {"lod", f.lod ? nlohmann::json(*f.lod) : nlohmann::json(nullptr)},
            {"units", units},
            {"clusters", clusters},
            {"trees", trees},
            {"cross_links", links},
            {"virtual_nodes", virtuals}};
}

InheritanceForest forest_from_json(const nlohmann::json& j) {
    try {
        InheritanceForest f;
        auto& g = f.graph;
        std::map<std::string, UnitIndex> unit_index;
        const auto& units = j.at("units");
        for (const auto& uj : units) {
            LogicUnit u;
            u.id = uj.at("id").get<std::string>();
            u.members = uj.at("members").get<std::vector<std::string>>();
            u.member_names = uj.at("member_names").get<std::vector<std::string>>();
            u.member_years = uj.at("member_years").get<std::vector<int>>();
            u.master_set = uj.at("master_set").get<std::vector<std::string>>();
            u.start_year = uj.at("start_year").get<int>();
            u.end_year = uj.at("end_year").get<int>();
            if (u.members.empty() || u.members.size() != u.member_years.size() ||
                u.members.size() != u.member_names.size()) {
                throw ParseError("forest: unit " + u.id + " has inconsistent member lists");
            }
            unit_index.emplace(u.id, g.units.size());
            g.units.push_back(std::move(u));
        }
        auto resolve = [&](const nlohmann::json& id) -> UnitIndex {
            auto it = unit_index.find(id.get<std::string>());
            if (it == unit_index.end()) throw ParseError("forest: unknown unit " + id.get<std::string>());
            return it->second;
        };
        auto resolve_all = [&](const nlohmann::json& arr) {
            std::vector<UnitIndex> out;
            for (const auto& id : arr) out.push_back(resolve(id));
            return out;
        };

        g.parents.assign(g.size(), {});
        g.children.assign(g.size(), {});
        f.direct_parent.assign(g.size(), std::nullopt);
        f.tree_children.assign(g.size(), {});
        f.ridge_chain.assign(g.size(), {});
        for (UnitIndex u = 0; u < g.size(); ++u) {
            const auto& uj = units[u];
            g.parents[u] = resolve_all(uj.at("parents"));
            sort_unique(g.parents[u]);
            for (auto p : g.parents[u]) g.children[p].push_back(u);
            if (!uj.at("direct_parent").is_null()) f.direct_parent[u] = resolve(uj.at("direct_parent"));
            f.tree_children[u] = resolve_all(uj.at("children"));
            f.ridge_chain[u] = resolve_all(uj.at("ridge_chain"));
        }
        for (auto& c : g.children) sort_unique(c);

        std::map<std::string, ClusterIndex> cluster_index;
        f.partition.assignment.assign(g.size(), 0);
        for (const auto& cj : j.at("clusters")) {
            Cluster c;
            c.id = cj.at("id").get<std::string>();
            c.creation_index = cj.at("creation_index").get<std::size_t>();
            c.units = resolve_all(cj.at("units"));
            if (c.creation_index != f.partition.clusters.size()) throw ParseError("forest: clusters out of creation order");
            for (auto u : c.units) f.partition.assignment[u] = c.creation_index;
            cluster_index.emplace(c.id, c.creation_index);
            f.cluster_visible.push_back(cj.value("visible", true));
            f.partition.clusters.push_back(std::move(c));
        }
        for (const auto& vj : j.at("virtual_nodes")) {
            f.virtual_nodes.push_back({vj.at("id").get<std::string>(), resolve(vj.at("host_unit")), resolve(vj.at("source_unit"))});
        }
        for (const auto& lj : j.at("cross_links")) {
            CrossLink l;
            l.source = resolve(lj.at("source"));
            l.chain = resolve_all(lj.at("chain"));
            l.target_cluster = cluster_index.at(lj.at("target_cluster").get<std::string>());
            if (!lj.at("anchor_unit").is_null()) l.anchor_unit = resolve(lj.at("anchor_unit"));
            if (!lj.at("virtual_node").is_null()) {
                const auto vid = lj.at("virtual_node").get<std::string>();
                for (std::size_t i = 0; i < f.virtual_nodes.size(); ++i) {
                    if (f.virtual_nodes[i].id == vid) l.virtual_node = i;
                }
                if (!l.virtual_node) throw ParseError("forest: unknown virtual node " + vid);
            }
            f.cross_links.push_back(std::move(l));
        }
        f.theta = j.value("theta", kDefaultTheta);
        if (j.contains("lod") && !j.at("lod").is_null()) f.lod = j.at("lod").get<std::size_t>();
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("forest: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ParseError(std::string("forest: ") + e.what());
    }
}

}  // namespace atlas::lineage
