#include "atlas/importance.hpp"

#include <algorithm>
#include <deque>

#include "atlas/kernels.hpp"

namespace atlas {

double LabelWeights::weight_of(std::string_view label) const {
    for (const auto& e : entries) {
        if (e.label_id == label) return e.weight;
    }
    return 0.0;
}

std::map<std::size_t, int> ancestor_distances(const corpus::Corpus& corpus, std::size_t painter,
                                              int max_depth) {
    std::map<std::size_t, int> dist;
    std::deque<std::size_t> queue{painter};
    std::map<std::size_t, int> seen{{painter, 0}};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        const int d = seen[cur];
        if (d >= max_depth) continue;
        for (auto m : corpus.masters_of(cur)) {
            if (seen.contains(m)) continue;
            seen[m] = d + 1;
            dist[m] = d + 1;
            queue.push_back(m);
        }
    }
    return dist;
}

std::vector<std::string> own_labels(const corpus::Painter& p) {
    std::vector<std::string> out;
    for (const auto& l : p.raw_labels) {
        if (std::find(out.begin(), out.end(), l.label_id) == out.end()) out.push_back(l.label_id);
    }
    return out;
}

std::map<std::string, RawLabelMass> raw_importance(const corpus::Corpus& corpus, std::size_t painter,
                                                   int max_depth) {
    std::map<std::string, RawLabelMass> mass;
    for (const auto& l : own_labels(corpus.painter(painter))) mass[l].own = 1.0;
    for (const auto& [ancestor, r] : ancestor_distances(corpus, painter, std::max(0, max_depth))) {
        const double f = halving_kernel(r);
        for (const auto& l : own_labels(corpus.painter(ancestor))) mass[l].inherited += f;
    }
    return mass;
}

LabelWeights compute_importance(const corpus::Corpus& corpus, std::size_t painter,
                                const ImportanceOptions& options) {
    LabelWeights out;
    out.painter_id = corpus.painter(painter).id;
    const auto mass = raw_importance(corpus, painter, options.max_depth);

    double total = 0.0;
    for (const auto& [_, m] : mass) total += m.total();
    if (total <= 0.0) return out;

    std::vector<WeightedLabel> ranked;
    for (const auto& [label, m] : mass) {
        ranked.push_back({label, m.total() / total, m.own / m.total(), m.inherited / m.total()});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.label_id < b.label_id;
    });
    if (ranked.size() > options.top_k) ranked.resize(options.top_k);
    std::erase_if(ranked, [&](const auto& e) { return e.weight < options.threshold; });

    double kept = 0.0;
    for (const auto& e : ranked) kept += e.weight;
    for (auto& e : ranked) e.weight /= kept;
    out.entries = std::move(ranked);
    return out;
}

LabelWeights compute_importance(const corpus::Corpus& corpus, std::string_view painter_id,
                                const ImportanceOptions& options) {
    return compute_importance(corpus, corpus.require_index(painter_id), options);
}

std::vector<LabelWeights> compute_all_importance(const corpus::Corpus& corpus,
                                                 const ImportanceOptions& options) {
    std::vector<LabelWeights> rows;
    rows.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) rows.push_back(compute_importance(corpus, i, options));
    return rows;
}

std::shared_ptr<const std::vector<LabelWeights>> ImportanceCache::get(const corpus::Corpus& corpus) {
    std::lock_guard lock(mutex_);
    if (!rows_ || snapshot_ != corpus.snapshot_id()) {
        rows_ = std::make_shared<const std::vector<LabelWeights>>(compute_all_importance(corpus, options_));
        snapshot_ = corpus.snapshot_id();
    }
    return rows_;
}

bool ImportanceCache::is_stale(const corpus::Corpus& corpus) const {
    std::lock_guard lock(mutex_);
    return !rows_ || snapshot_ != corpus.snapshot_id();
}

}  // namespace atlas
