#include "atlas/similarity_table.hpp"

#include <algorithm>
#include <fstream>

#include "atlas/kernels.hpp"

namespace atlas {

AstBuildError::AstBuildError(std::vector<std::string> labels)
    : Error([&] {
          std::string msg = "embedding provider failed for labels:";
          for (const auto& l : labels) msg += " " + l;
          return msg;
      }()),
      failed_(std::move(labels)) {}

ArtisticSimilarityTable::ArtisticSimilarityTable(std::vector<std::string> labels, Eigen::MatrixXd sim)
    : labels_(std::move(labels)), sim_(std::move(sim)) {
    const auto n = static_cast<Eigen::Index>(labels_.size());
    if (sim_.rows() != n || sim_.cols() != n) {
        throw ValidationError("similarity matrix shape does not match label count");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!index_.emplace(labels_[static_cast<std::size_t>(i)], i).second) {
            throw ValidationError("duplicate label in similarity table: " + labels_[static_cast<std::size_t>(i)]);
        }
    }
    sim_ = (0.5 * (sim_ + sim_.transpose())).cwiseMax(0.0).cwiseMin(1.0);
    sim_.diagonal().setOnes();
}

std::optional<Eigen::Index> ArtisticSimilarityTable::index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Eigen::Index ArtisticSimilarityTable::require_index(std::string_view label) const {
    if (auto i = index_of(label)) return *i;
    throw StaleTableError("label '" + std::string(label) + "' missing from similarity table (stale table?)");
}

double ArtisticSimilarityTable::operator()(std::string_view a, std::string_view b) const {
    return sim_(require_index(a), require_index(b));
}

ArtisticSimilarityTable build_ast(const LabelTaxonomy& taxonomy, const EmbeddingProvider& provider,
                                  const DescriptionMap& descriptions) {
    const auto n = static_cast<Eigen::Index>(taxonomy.size());
    std::vector<std::string> labels;
    Eigen::MatrixXd vectors(provider.dimensionality(), n);
    std::vector<std::string> failed;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& node = taxonomy.nodes()[static_cast<std::size_t>(i)];
        labels.push_back(node.id);
        auto it = descriptions.find(node.id);
        const std::string& text = (it != descriptions.end() && !it->second.empty()) ? it->second : node.name;
        try {
            Eigen::VectorXd v = provider.embed(text);
            if (v.size() != vectors.rows()) throw EmbeddingError("wrong dimensionality");
            vectors.col(i) = v;
        } catch (const std::exception&) {
            failed.push_back(node.id);
        }
    }
    if (!failed.empty()) throw AstBuildError(std::move(failed));

    Eigen::MatrixXd sim(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            sim(i, j) = sim(j, i) = clamped_cosine(vectors.col(i), vectors.col(j));
        }
    }
    return ArtisticSimilarityTable(std::move(labels), std::move(sim));
}

nlohmann::json to_json(const ArtisticSimilarityTable& t) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(t.matrix().size()));
    for (Eigen::Index i = 0; i < t.matrix().rows(); ++i) {
        for (Eigen::Index j = 0; j < t.matrix().cols(); ++j) flat.push_back(t.matrix()(i, j));
    }
    return {{"labels", t.labels()}, {"matrix", flat}};
}

ArtisticSimilarityTable ast_from_json(const nlohmann::json& j) {
    try {
        auto labels = j.at("labels").get<std::vector<std::string>>();
        auto flat = j.at("matrix").get<std::vector<double>>();
        const auto n = static_cast<Eigen::Index>(labels.size());
        if (static_cast<Eigen::Index>(flat.size()) != n * n) throw ParseError("similarity table: matrix size mismatch");
        Eigen::MatrixXd sim = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), n, n);
        return ArtisticSimilarityTable(std::move(labels), std::move(sim));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("similarity table: ") + e.what());
    }
}

void save_ast(const ArtisticSimilarityTable& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(t).dump() << '\n';
}

ArtisticSimilarityTable load_ast(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open similarity table " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return ast_from_json(j);
}

DescriptionMap load_descriptions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open descriptions file " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        return j.get<DescriptionMap>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace atlas
