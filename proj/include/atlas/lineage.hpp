#pragma once

// Three-stage reconstruction of the inheritance graph into a forest:
// logic units -> clusters -> hierarchy trees with chains and virtual nodes.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlas/corpus.hpp"

namespace atlas::lineage {

using UnitIndex = std::size_t;
using ClusterIndex = std::size_t;

// Painters sharing one exact master set.
struct LogicUnit {
    std::string id;
    std::vector<std::string> members;       // by birth year, then id
    std::vector<std::string> member_names;
    std::vector<int> member_years;          // effective birth years
    std::vector<std::string> master_set;    // sorted painter ids
    int start_year = 0;
    int end_year = 0;

    bool operator==(const LogicUnit&) const = default;
};

struct UnitGraph {
    std::vector<LogicUnit> units;
    std::vector<std::vector<UnitIndex>> parents;   // sorted
    std::vector<std::vector<UnitIndex>> children;  // sorted

    std::size_t size() const noexcept { return units.size(); }
    // Child -> parent pairs, sorted.
    std::vector<std::pair<UnitIndex, UnitIndex>> edges() const;
    std::optional<UnitIndex> find(std::string_view unit_id) const;
    std::optional<UnitIndex> unit_of_painter(std::string_view painter_id) const;
    // Parents before children; ties by start year, then unit id.
    std::vector<UnitIndex> topological_order() const;

    bool operator==(const UnitGraph&) const = default;
};

struct Cluster {
    std::string id;
    std::vector<UnitIndex> units;  // in assignment order
    std::size_t creation_index = 0;

    bool operator==(const Cluster&) const = default;
};

struct ClusterPartition {
    std::vector<Cluster> clusters;           // clusters[k].creation_index == k
    std::vector<ClusterIndex> assignment;    // unit -> cluster

    bool operator==(const ClusterPartition&) const = default;
};

struct CrossLink {
    UnitIndex source = 0;
    std::vector<UnitIndex> chain;            // deepest ancestor first
    ClusterIndex target_cluster = 0;
    std::optional<UnitIndex> anchor_unit;    // existing unit whose parent set equals the chain
    std::optional<std::size_t> virtual_node; // index into virtual_nodes

    bool operator==(const CrossLink&) const = default;
};

// Painter-less anchor terminating a cross link.
struct VirtualNode {
    std::string id;
    UnitIndex host_unit = 0;
    UnitIndex source_unit = 0;

    bool operator==(const VirtualNode&) const = default;
};

struct InheritanceForest {
    UnitGraph graph;
    ClusterPartition partition;
    std::vector<std::optional<UnitIndex>> direct_parent;
    std::vector<std::vector<UnitIndex>> tree_children;  // sorted by start year, then id
    std::vector<std::vector<UnitIndex>> ridge_chain;    // chain holding the direct parent, deepest first
    std::vector<CrossLink> cross_links;
    std::vector<VirtualNode> virtual_nodes;
    std::vector<bool> cluster_visible;
    double theta = 0.6;
    std::optional<std::size_t> lod;

    struct Tree {
        ClusterIndex cluster;
        UnitIndex root;
    };
    // One per non-empty cluster, in creation order.
    std::vector<Tree> trees() const;
    std::size_t painter_count(ClusterIndex c) const;

    bool operator==(const InheritanceForest& o) const;
};

inline constexpr double kDefaultTheta = 0.6;

UnitGraph build_logic_units(const corpus::Corpus& corpus);

// Throws std::invalid_argument for theta outside (0, 1].
ClusterPartition cluster_units(const UnitGraph& graph, double theta = kDefaultTheta);

std::vector<std::optional<UnitIndex>> build_trees(const UnitGraph& graph, const ClusterPartition& partition);

InheritanceForest reconstruct_chains(const UnitGraph& graph, const ClusterPartition& partition,
                                     const std::vector<std::optional<UnitIndex>>& direct_parents);

// Clusters by descending painter count (ties by creation index); a cluster is
// admitted iff the running painter count before it does not exceed n_lod.
std::vector<bool> lod_filter(const InheritanceForest& forest, std::size_t n_lod);

InheritanceForest reconstruct(const corpus::Corpus& corpus, double theta = kDefaultTheta,
                              std::optional<std::size_t> n_lod = std::nullopt);

// Moves `unit` (with its tree subtree) under `new_parent`, or detaches it as a
// new tree when new_parent is nullopt. Throws NotFoundError / ValidationError
// ("would create cycle").
InheritanceForest reassign_parent(const InheritanceForest& forest, std::string_view unit_id,
                                  std::optional<std::string_view> new_parent_id);

nlohmann::json to_json(const InheritanceForest& forest);
InheritanceForest forest_from_json(const nlohmann::json& j);

}  // namespace atlas::lineage
