#pragma once

// Lineage-propagated label importance: a painter's own labels plus each
// distinct ancestor's labels scaled by 2^-(generational distance).

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/corpus.hpp"

namespace atlas {

struct ImportanceOptions {
    int max_depth = 6;
    std::size_t top_k = 10;
    double threshold = 0.05;
};

// Unnormalized contribution to one label, split by origin.
struct RawLabelMass {
    double own = 0.0;
    double inherited = 0.0;
    double total() const { return own + inherited; }
};

struct WeightedLabel {
    std::string label_id;
    double weight = 0.0;           // normalized, after truncation
    double own_share = 0.0;        // fraction of the raw mass from the painter's own label
    double inherited_share = 0.0;  // fraction from ancestors
};

struct LabelWeights {
    std::string painter_id;
    std::vector<WeightedLabel> entries;  // weight descending, then label id

    bool empty() const noexcept { return entries.empty(); }
    double weight_of(std::string_view label) const;
};

// Minimal generational distance to every ancestor within max_depth, by painter index.
std::map<std::size_t, int> ancestor_distances(const corpus::Corpus& corpus, std::size_t painter,
                                              int max_depth);

// Distinct label ids the painter carries, in first-seen order.
std::vector<std::string> own_labels(const corpus::Painter& p);

std::map<std::string, RawLabelMass> raw_importance(const corpus::Corpus& corpus, std::size_t painter,
                                                   int max_depth = 6);

// Normalize, keep the top_k ranks with weight >= threshold, renormalize.
LabelWeights compute_importance(const corpus::Corpus& corpus, std::string_view painter_id,
                                const ImportanceOptions& options = {});
LabelWeights compute_importance(const corpus::Corpus& corpus, std::size_t painter,
                                const ImportanceOptions& options = {});

std::vector<LabelWeights> compute_all_importance(const corpus::Corpus& corpus,
                                                 const ImportanceOptions& options = {});

// Per-snapshot memo of compute_all_importance; any corpus edit yields a new
// snapshot id, which makes the cached rows stale.
class ImportanceCache {
public:
    explicit ImportanceCache(ImportanceOptions options = {}) : options_(options) {}

    std::shared_ptr<const std::vector<LabelWeights>> get(const corpus::Corpus& corpus);
    bool is_stale(const corpus::Corpus& corpus) const;

private:
    ImportanceOptions options_;
    mutable std::mutex mutex_;
    std::uint64_t snapshot_ = 0;
    std::shared_ptr<const std::vector<LabelWeights>> rows_;
};

}  // namespace atlas
