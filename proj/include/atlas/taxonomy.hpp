#pragma once

// Three-dimension hierarchical label taxonomy (subject / technique / emotion).

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace atlas {

enum class Dimension { subject = 0, technique = 1, emotion = 2 };

inline constexpr std::array<Dimension, 3> kDimensions{Dimension::subject, Dimension::technique,
                                                      Dimension::emotion};

std::string_view to_string(Dimension d);
std::optional<Dimension> dimension_from_string(std::string_view s);

struct LabelNode {
    std::string id;
    Dimension dimension = Dimension::subject;
    std::optional<std::string> parent;
    std::string name;

    bool operator==(const LabelNode&) const = default;
};

class LabelTaxonomy {
public:
    static constexpr int kMaxDepth = 3;

    LabelTaxonomy() = default;
    // Validates: unique ids, parents exist, same-dimension parents, depth <= 3.
    explicit LabelTaxonomy(std::vector<LabelNode> nodes);

    const std::vector<LabelNode>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool contains(std::string_view id) const { return index_.contains(std::string(id)); }
    const LabelNode* find(std::string_view id) const;
    const LabelNode& require(std::string_view id) const;

    std::vector<std::string> roots(Dimension d) const;
    const std::vector<std::string>& children(std::string_view id) const;
    // 1 for roots.
    int depth(std::string_view id) const;
    // The label itself plus every descendant.
    std::vector<std::string> closure(std::string_view id) const;
    // Strict ancestors, nearest first.
    std::vector<std::string> ancestors(std::string_view id) const;

    bool operator==(const LabelTaxonomy& o) const { return nodes_ == o.nodes_; }

private:
    std::vector<LabelNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::vector<std::string>> children_;
};

// File format: JSON list of {id, dimension, parent, name}.
LabelTaxonomy load_taxonomy(const std::filesystem::path& path);
LabelTaxonomy taxonomy_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabelTaxonomy& t);

// 40-label fixture taxonomy shipped with the engine (also data/taxonomy.json).
const LabelTaxonomy& bundled_taxonomy();
// Label id -> descriptive sentence for the bundled taxonomy.
const std::unordered_map<std::string, std::string>& bundled_descriptions();

}  // namespace atlas
