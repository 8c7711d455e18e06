#include "atlas/embedding.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::size_t TrigramHashProvider::bucket(std::string_view trigram) const {
    return static_cast<std::size_t>(fnv1a(trigram) % static_cast<std::uint64_t>(dims_));
}

Eigen::VectorXd TrigramHashProvider::embed(std::string_view text) const {
    std::string padded = " ";
    for (unsigned char c : text) padded += static_cast<char>(std::tolower(c));
    padded += ' ';
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dims_);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        v[static_cast<Eigen::Index>(bucket(std::string_view(padded).substr(i, 3)))] += 1.0;
    }
    const double n = v.norm();
    if (n > 0) v /= n;
    return v;
}

PrecomputedEmbeddingProvider::PrecomputedEmbeddingProvider(
    std::string name, int dims, std::unordered_map<std::string, Eigen::VectorXd> vectors)
    : name_(std::move(name)), dims_(dims), vectors_(std::move(vectors)) {}

PrecomputedEmbeddingProvider PrecomputedEmbeddingProvider::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file " + path.string());
    try {
        nlohmann::json j;
        in >> j;
        const int dims = j.at("dimensionality").get<int>();
        std::unordered_map<std::string, Eigen::VectorXd> vectors;
        for (const auto& [text, arr] : j.at("vectors").items()) {
            auto values = arr.get<std::vector<double>>();
            if (static_cast<int>(values.size()) != dims) {
                throw ParseError("embedding for '" + text + "' has wrong dimensionality");
            }
            vectors.emplace(text, Eigen::Map<Eigen::VectorXd>(values.data(), dims));
        }
        return PrecomputedEmbeddingProvider(j.value("name", path.stem().string()), dims, std::move(vectors));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

Eigen::VectorXd PrecomputedEmbeddingProvider::embed(std::string_view text) const {
    auto it = vectors_.find(std::string(text));
    if (it == vectors_.end()) throw EmbeddingError("no precomputed vector for text");
    return it->second;
}

}  // namespace atlas
