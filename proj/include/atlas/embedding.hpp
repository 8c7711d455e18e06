#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Core>

namespace atlas {

// Text -> vector encoder behind the Artistic Similarity Table. Implementations
// must return the same vector for the same text within one instance.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual int dimensionality() const = 0;
    virtual bool deterministic() const = 0;
    // Throws EmbeddingError when the text cannot be encoded.
    virtual Eigen::VectorXd embed(std::string_view text) const = 0;
};

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Default provider: character trigrams of the lower-cased text, padded with
// one space each side, FNV-1a hashed into `dims` count buckets, L2-normalized.
class TrigramHashProvider final : public EmbeddingProvider {
public:
    explicit TrigramHashProvider(int dims = 256) : dims_(dims) {}

    std::string name() const override { return "trigram-hash"; }
    int dimensionality() const override { return dims_; }
    bool deterministic() const override { return true; }
    Eigen::VectorXd embed(std::string_view text) const override;

    // Bucket a trigram lands in; exposed for tests that need orthogonal texts.
    std::size_t bucket(std::string_view trigram) const;

private:
    int dims_;
};

// Adapter for vectors computed offline by an external sentence encoder.
// File format: {"dimensionality": d, "vectors": {"<text>": [..d floats..]}}.
class PrecomputedEmbeddingProvider final : public EmbeddingProvider {
public:
    PrecomputedEmbeddingProvider(std::string name, int dims,
                                 std::unordered_map<std::string, Eigen::VectorXd> vectors);
    static PrecomputedEmbeddingProvider load(const std::filesystem::path& path);

    std::string name() const override { return name_; }
    int dimensionality() const override { return dims_; }
    bool deterministic() const override { return true; }
    Eigen::VectorXd embed(std::string_view text) const override;

private:
    std::string name_;
    int dims_;
    std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

}  // namespace atlas
