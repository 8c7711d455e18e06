#pragma once

// Label distribution (foldable doughnut) and label-combination counts
// (nested circle pack) over a painter selection.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlas/corpus.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas {

enum class LabelViewMode { focus, context };

std::optional<LabelViewMode> label_view_mode_from_string(std::string_view s);

struct LabelCount {
    std::string label_id;
    std::optional<std::string> parent;
    int depth = 1;
    int count = 0;               // selected painters carrying the label itself
    int rolled_count = 0;        // selected painters carrying it or any descendant
    int total_count = 0;         // same two over the whole corpus
    int total_rolled_count = 0;
};

struct DimensionDistribution {
    Dimension dimension = Dimension::subject;
    std::vector<LabelCount> labels;  // taxonomy order
};

// Selection holds painter indices. Focus mode drops labels with rolled_count == 0.
std::vector<DimensionDistribution> label_distribution(const corpus::Corpus& corpus,
                                                      const LabelTaxonomy& taxonomy,
                                                      std::span<const std::size_t> selection,
                                                      LabelViewMode mode);

struct CombinationNode {
    std::string label_id;
    Dimension dimension = Dimension::subject;
    int count = 0;  // selected painters carrying every label on the path
    std::vector<CombinationNode> children;
};

struct CombinationTree {
    std::vector<Dimension> order;
    int min_count = 1;
    int recommended_min_count = 1;
    std::vector<CombinationNode> roots;  // count descending, then label id
};

// Throws std::invalid_argument for an empty, over-long or repeating order.
CombinationTree label_combinations(const corpus::Corpus& corpus, const LabelTaxonomy& taxonomy,
                                   std::span<const std::size_t> selection,
                                   std::span<const Dimension> order, int min_count,
                                   std::size_t target_combinations = 24);

nlohmann::json to_json(const std::vector<DimensionDistribution>& d);
nlohmann::json to_json(const CombinationTree& t);

}  // namespace atlas
