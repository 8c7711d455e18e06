#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "atlas/corpus.hpp"
#include "atlas/error.hpp"
#include "atlas/lineage.hpp"
#include "builders.hpp"
#include "oracles.hpp"

using namespace atlas;
using namespace atlas::lineage;
using testing_support::make_corpus;

namespace {

std::set<std::string> members(const UnitGraph& g, UnitIndex u) {
    return {g.units[u].members.begin(), g.units[u].members.end()};
}

UnitIndex unit_of(const InheritanceForest& f, const std::string& painter) {
    return *f.graph.unit_of_painter(painter);
}

ClusterIndex cluster_of(const InheritanceForest& f, const std::string& painter) {
    return f.partition.assignment[unit_of(f, painter)];
}

std::vector<std::vector<std::set<std::string>>> as_member_sets(const UnitGraph& g, const ClusterPartition& p) {
    std::vector<std::vector<std::set<std::string>>> out;
    for (const auto& c : p.clusters) {
        std::vector<std::set<std::string>> units;
        for (auto u : c.units) units.push_back(members(g, u));
        out.push_back(units);
    }
    return out;
}

// The 60/40 boundary instance: u has three parents in a's cluster and two in b's.
corpus::Corpus boundary_corpus() {
    return make_corpus({{"a1", 900, {}},
                        {"a2", 930, {"a1"}},
                        {"a3", 960, {"a1", "a2"}},
                        {"b1", 905, {}},
                        {"b2", 935, {"b1"}},
                        {"u", 990, {"a1", "a2", "a3", "b1", "b2"}}});
}

}  // namespace

TEST_SUITE("lineage") {

TEST_CASE("painters sharing a master set form one unit") {
    auto c = make_corpus({{"A", 900, {}}, {"B", 901, {}}, {"C", 930, {"A", "B"}}, {"D", 931, {"A", "B"}}, {"E", 932, {"A"}}});
    auto g = build_logic_units(c);
    REQUIRE(g.size() == 4);
    std::set<std::set<std::string>> got;
    for (UnitIndex u = 0; u < g.size(); ++u) got.insert(members(g, u));
    auto want_units = oracle::brute_force_units(c.document());
    CHECK(got == std::set<std::set<std::string>>(want_units.begin(), want_units.end()));
    CHECK(got.contains({"C", "D"}));

    auto cd = *g.unit_of_painter("C"), a = *g.unit_of_painter("A"), b = *g.unit_of_painter("B"),
         e = *g.unit_of_painter("E");
    std::vector<std::pair<UnitIndex, UnitIndex>> want{{cd, a}, {cd, b}, {e, a}};
    std::sort(want.begin(), want.end());
    CHECK(g.edges() == want);
}

TEST_CASE("corpus without relations gives singleton units and no edges") {
    auto g = build_logic_units(make_corpus({{"a", 900, {}}, {"b", 900, {}}, {"c", 900, {}}}));
    CHECK(g.size() == 3);
    CHECK(g.edges().empty());
}

TEST_CASE("two apprentices of one master share a unit") {
    auto g = build_logic_units(make_corpus({{"m", 900, {}}, {"x", 930, {"m"}}, {"y", 935, {"m"}}}));
    REQUIRE(g.size() == 2);
    CHECK(g.units[1].members == std::vector<std::string>{"x", "y"});
    CHECK(g.units[1].start_year == 930);
    CHECK(g.units[1].end_year == 935);
    CHECK(g.edges().size() == 1);
    CHECK(g.units[0].id == "u0");
}

TEST_CASE("unit ids follow start year then first member") {
    auto g = build_logic_units(make_corpus({{"z", 800, {}}, {"a", 900, {}}, {"b", 850, {"z"}}}));
    CHECK(g.units[0].members[0] == "z");
    CHECK(g.units[1].members[0] == "b");
    CHECK(g.units[2].members[0] == "a");
    auto order = g.topological_order();
    CHECK(order == std::vector<UnitIndex>{0, 1, 2});
}

TEST_CASE("single-parent units join and split parents open a cluster") {
    auto c = make_corpus({{"A", 900, {}}, {"B", 905, {}}, {"U", 930, {"A"}}, {"W", 940, {"A", "B"}}});
    auto f = reconstruct(c);
    CHECK(cluster_of(f, "U") == cluster_of(f, "A"));
    CHECK(cluster_of(f, "W") != cluster_of(f, "A"));
    CHECK(cluster_of(f, "W") != cluster_of(f, "B"));
    CHECK(f.partition.clusters.size() == 3);
    CHECK(f.partition.clusters[cluster_of(f, "W")].creation_index == 2);
}

TEST_CASE("a proportion equal to theta opens a new cluster") {
    auto c = boundary_corpus();
    auto f = reconstruct(c, 0.6);
    CHECK(cluster_of(f, "a3") == cluster_of(f, "a1"));
    CHECK(cluster_of(f, "u") != cluster_of(f, "a1"));
    CHECK(cluster_of(f, "u") != cluster_of(f, "b1"));
    auto loose = reconstruct(c, 0.59);
    CHECK(cluster_of(loose, "u") == cluster_of(loose, "a1"));
    CHECK(as_member_sets(f.graph, f.partition) == oracle::recursive_clusters(c.document(), 0.6));
    CHECK(as_member_sets(loose.graph, loose.partition) == oracle::recursive_clusters(c.document(), 0.59));
}

TEST_CASE("theta outside the unit interval is rejected") {
    auto g = build_logic_units(make_corpus({{"a", 900, {}}}));
    CHECK_THROWS_AS(cluster_units(g, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cluster_units(g, 1.01), std::invalid_argument);
    CHECK_THROWS_AS(cluster_units(g, std::nan("")), std::invalid_argument);
    CHECK_NOTHROW(cluster_units(g, 1.0));
}

TEST_CASE("clustering is deterministic") {
    auto c = corpus::generate_fixture(21, 200, {900, 1900});
    auto g = build_logic_units(c);
    CHECK(cluster_units(g, 0.6) == cluster_units(g, 0.6));
    CHECK(reconstruct(c, 0.6, 40) == reconstruct(c, 0.6, 40));
}

TEST_CASE("nearest in-cluster parent by start year becomes the direct parent") {
    auto f = reconstruct(make_corpus({{"r", 900, {}}, {"m", 940, {"r"}}, {"c", 950, {"r", "m"}}}));
    const auto c = unit_of(f, "c");
    CHECK(f.direct_parent[c] == unit_of(f, "m"));
    CHECK_FALSE(f.direct_parent[unit_of(f, "r")].has_value());
    // x reaches y inside the cluster, so both parents sit on one ridge.
    CHECK(f.ridge_chain[c] == std::vector<UnitIndex>{unit_of(f, "r"), unit_of(f, "m")});
    CHECK(f.cross_links.empty());
    CHECK(f.virtual_nodes.empty());
}

TEST_CASE("equal temporal gaps prefer the earlier parent") {
    auto f = reconstruct(make_corpus({{"r", 900, {}}, {"p1", 920, {"r"}}, {"p2", 980, {"r", "p1"}}, {"c", 950, {"p1", "p2"}}}));
    REQUIRE(cluster_of(f, "c") == cluster_of(f, "r"));
    CHECK(f.direct_parent[unit_of(f, "c")] == unit_of(f, "p1"));
    CHECK(oracle::forest_violations(f).empty());
}

TEST_CASE("a parent chain in another cluster without an anchor gets a virtual node") {
    auto f = reconstruct(make_corpus({{"x", 900, {}}, {"x2", 930, {"x"}}, {"z", 905, {}}, {"u", 960, {"x", "x2", "z"}}}));
    const auto u = unit_of(f, "u");
    REQUIRE(cluster_of(f, "u") == cluster_of(f, "x"));
    REQUIRE(f.cross_links.size() == 1);
    const auto& link = f.cross_links[0];
    CHECK(link.source == u);
    CHECK(link.chain == std::vector<UnitIndex>{unit_of(f, "z")});
    CHECK(link.target_cluster == cluster_of(f, "z"));
    CHECK_FALSE(link.anchor_unit.has_value());
    REQUIRE(link.virtual_node.has_value());
    CHECK(f.virtual_nodes.size() == 1);
    CHECK(f.virtual_nodes[0].host_unit == unit_of(f, "z"));
    CHECK(f.virtual_nodes[0].source_unit == u);
    CHECK(f.virtual_nodes[0].id == "v0");
    CHECK(oracle::forest_violations(f).empty());
}

TEST_CASE("an existing unit with that exact parent set becomes the anchor") {
    auto f = reconstruct(make_corpus({{"x", 900, {}}, {"x2", 930, {"x"}}, {"z", 905, {}}, {"w", 935, {"z"}},
                                      {"u", 960, {"x", "x2", "z"}}}));
    REQUIRE(f.cross_links.size() == 1);
    CHECK(f.cross_links[0].anchor_unit == unit_of(f, "w"));
    CHECK_FALSE(f.cross_links[0].virtual_node.has_value());
    CHECK(f.virtual_nodes.empty());
}

TEST_CASE("a single parent is only a tree edge") {
    auto f = reconstruct(make_corpus({{"a", 900, {}}, {"b", 930, {"a"}}}));
    CHECK(f.ridge_chain[unit_of(f, "b")] == std::vector<UnitIndex>{unit_of(f, "a")});
    CHECK(f.cross_links.empty());
    CHECK(f.tree_children[unit_of(f, "a")] == std::vector<UnitIndex>{unit_of(f, "b")});
}

TEST_CASE("single painter gives one tree with one root") {
    auto f = reconstruct(make_corpus({{"solo", 1000, {}}}));
    REQUIRE(f.trees().size() == 1);
    CHECK(f.trees()[0].root == 0);
    CHECK(f.graph.edges().empty());
}

TEST_CASE("shipped fixture reconstructs into a sound forest covering all painters") {
    auto c = corpus::load_corpus(std::filesystem::path(ATLAS_DATA_DIR) / "fixture.json");
    CHECK(corpus::to_json(c.document()) == corpus::to_json(corpus::generate_fixture(7, 50, {900, 1900}).document()));
    auto f = reconstruct(c);
    std::multiset<std::string> covered;
    for (const auto& u : f.graph.units) covered.insert(u.members.begin(), u.members.end());
    CHECK(covered.size() == 50);
    CHECK(std::set<std::string>(covered.begin(), covered.end()).size() == 50);
    CHECK(oracle::forest_violations(f).empty());
}

TEST_CASE("a strict theta never yields fewer clusters") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = corpus::generate_fixture(seed, 150, {900, 1900});
        CHECK(reconstruct(c, 1.0).partition.clusters.size() >= reconstruct(c, 0.6).partition.clusters.size());
    }
}

TEST_CASE("iterative clustering agrees with the recursive oracle on generated corpora") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto c = corpus::generate_fixture(seed, 60, {900, 1900});
        for (double theta : {0.3, 0.5, 0.6, 1.0}) {
            auto g = build_logic_units(c);
            CHECK(as_member_sets(g, cluster_units(g, theta)) == oracle::recursive_clusters(c.document(), theta));
        }
    }
}

TEST_CASE("detaching a mid-tree unit adds exactly one tree") {
    auto c = make_corpus({{"a", 900, {}}, {"b", 930, {"a"}}, {"c", 960, {"b"}}, {"d", 990, {"c"}}});
    auto f = reconstruct(c);
    auto g = reassign_parent(f, f.graph.units[unit_of(f, "b")].id, std::nullopt);
    CHECK(g.trees().size() == f.trees().size() + 1);
    CHECK(cluster_of(g, "c") == cluster_of(g, "b"));
    CHECK(cluster_of(g, "d") == cluster_of(g, "b"));
    CHECK_FALSE(g.direct_parent[unit_of(g, "b")].has_value());
    CHECK(oracle::forest_violations(g).empty());
}

TEST_CASE("moving a unit under its own grandchild is refused") {
    auto f = reconstruct(make_corpus({{"a", 900, {}}, {"b", 930, {"a"}}, {"c", 960, {"b"}}}));
    const auto& ids = f.graph.units;
    CHECK_THROWS_WITH_AS(reassign_parent(f, ids[unit_of(f, "a")].id, ids[unit_of(f, "c")].id),
                         "would create cycle", ValidationError);
    CHECK_THROWS_AS(reassign_parent(f, "u99", std::nullopt), NotFoundError);
    CHECK_THROWS_AS(reassign_parent(f, ids[0].id, std::string_view("u99")), NotFoundError);
}

TEST_CASE("moving a subtree to another tree moves every painter in it") {
    auto c = make_corpus({{"a", 900, {}}, {"b", 930, {"a"}}, {"c", 960, {"b"}}, {"x", 905, {}}, {"y", 935, {"x"}}});
    auto f = reconstruct(c);
    const auto& ids = f.graph.units;
    std::vector<std::string> subtree_painters{"b", "c"};
    auto g = reassign_parent(f, ids[unit_of(f, "b")].id, ids[unit_of(f, "y")].id);
    for (const auto& p : subtree_painters) CHECK(cluster_of(g, p) == cluster_of(f, "x"));
    CHECK(cluster_of(g, "a") == cluster_of(f, "a"));
    CHECK(g.direct_parent[unit_of(g, "b")] == unit_of(g, "y"));
    CHECK(oracle::forest_violations(g).empty());
}

TEST_CASE("reassignment keeps the forest sound on generated corpora") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        auto c = corpus::generate_fixture(seed, 80, {900, 1900});
        auto f = reconstruct(c, 0.6, 30);
        std::size_t done = 0;
        for (UnitIndex u = 1; u < f.graph.size() && done < 5; u += 3) {
            const auto target = (u * 7 + seed) % f.graph.size();
            try {
                f = reassign_parent(f, f.graph.units[u].id, f.graph.units[target].id);
                ++done;
            } catch (const ValidationError&) {
                continue;
            }
            CHECK(oracle::forest_violations(f).empty());
        }
        f = reassign_parent(f, f.graph.units.back().id, std::nullopt);
        CHECK(oracle::forest_violations(f).empty());
    }
}

TEST_CASE("level of detail admits the largest clusters until the budget is spent") {
    auto c = corpus::generate_fixture(7, 200, {900, 1900});
    auto f = reconstruct(c);
    for (std::size_t n : {0u, 5u, 20u, 60u, 500u}) {
        auto vis = lod_filter(f, n);
        std::vector<ClusterIndex> order(f.partition.clusters.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return f.painter_count(a) > f.painter_count(b); });
        std::size_t shown = 0;
        std::vector<bool> want(order.size(), false);
        for (auto k : order) {
            if (shown > n) break;
            want[k] = true;
            shown += f.painter_count(k);
        }
        CHECK(vis == want);
    }
}

TEST_CASE("forest json round trips") {
    auto f = reconstruct(corpus::generate_fixture(3, 120, {900, 1900}), 0.6, 25);
    auto j = to_json(f);
    CHECK(forest_from_json(j) == f);
    CHECK(to_json(forest_from_json(j)) == j);
    CHECK_THROWS_AS(forest_from_json(nlohmann::json{{"units", 3}}), ParseError);
}

}
