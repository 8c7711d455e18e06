#pragma once

// Artistic Similarity Table: pairwise label similarity lookup in [0, 1].

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "atlas/embedding.hpp"
#include "atlas/error.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas {

// Raised by lookups for labels the table was not built with.
class StaleTableError : public Error {
public:
    using Error::Error;
};

// Raised by build_ast when the provider fails; lists every failing label.
class AstBuildError : public Error {
public:
    explicit AstBuildError(std::vector<std::string> labels);
    const std::vector<std::string>& failed_labels() const noexcept { return failed_; }

private:
    std::vector<std::string> failed_;
};

class ArtisticSimilarityTable {
public:
    ArtisticSimilarityTable() = default;
    // Clamps into [0,1], symmetrizes and forces a unit diagonal.
    ArtisticSimilarityTable(std::vector<std::string> labels, Eigen::MatrixXd sim);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const Eigen::MatrixXd& matrix() const noexcept { return sim_; }
    std::size_t size() const noexcept { return labels_.size(); }

    std::optional<Eigen::Index> index_of(std::string_view label) const;
    // Throws StaleTableError for unknown labels.
    Eigen::Index require_index(std::string_view label) const;
    double operator()(std::string_view a, std::string_view b) const;

private:
    std::vector<std::string> labels_;
    Eigen::MatrixXd sim_;
    std::unordered_map<std::string, Eigen::Index> index_;
};

using DescriptionMap = std::unordered_map<std::string, std::string>;

// Labels without a description fall back to their display name.
ArtisticSimilarityTable build_ast(const LabelTaxonomy& taxonomy, const EmbeddingProvider& provider,
                                  const DescriptionMap& descriptions);

// {"labels": [...], "matrix": [row-major n*n]}
nlohmann::json to_json(const ArtisticSimilarityTable& t);
ArtisticSimilarityTable ast_from_json(const nlohmann::json& j);
void save_ast(const ArtisticSimilarityTable& t, const std::filesystem::path& path);
ArtisticSimilarityTable load_ast(const std::filesystem::path& path);

// Descriptions file: JSON map label_id -> sentence.
DescriptionMap load_descriptions(const std::filesystem::path& path);

}  // namespace atlas
