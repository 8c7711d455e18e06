#pragma once

// Five-dimension cohort similarity (labels, geography, time, identity,
// inheritance) and the ranked recommendation list.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "atlas/corpus.hpp"
#include "atlas/geography.hpp"
#include "atlas/importance.hpp"
#include "atlas/similarity_table.hpp"

namespace atlas::rec {

inline constexpr std::size_t kDims = 5;
enum Dim : std::size_t { labels = 0, geography = 1, time = 2, identity = 3, inheritance = 4 };
inline constexpr std::array<const char*, kDims> kDimNames{"labels", "geography", "time", "identity", "inheritance"};

using Beta = std::array<double, kDims>;
using Availability = std::array<bool, kDims>;

inline constexpr Beta kUniformBeta{0.2, 0.2, 0.2, 0.2, 0.2};

struct SimilarityWeights {
    Beta beta{};
};

struct RecommenderConfig {
    double geo_scale_km = 1000.0;
    double time_scale_years = 100.0;
    int max_hops = 6;
};

struct CohortProfile {
    std::vector<std::string> members;
    std::vector<std::string> labels;         // pooled, sorted
    Eigen::VectorXd lfv;                     // aligned with labels, sums to 1
    std::vector<std::string> provinces;      // distinct, sorted, known only
    std::vector<int> known_births;           // sorted
    std::optional<int> year_first;
    std::optional<int> year_last;
    std::optional<std::array<double, 5>> level_freq;  // index 0 is level 1
    std::vector<int> hops;                   // per painter index; -1 beyond max_hops

    Availability availability() const;
};

// Everything scoring needs, read-only.
struct RecommenderContext {
    const corpus::Corpus& corpus;
    const geo::Geography& geography;
    const ArtisticSimilarityTable& ast;
    const std::vector<LabelWeights>& importances;  // by painter index
    RecommenderConfig config{};
};

// Throws ValidationError on an empty cohort, NotFoundError on unknown ids.
CohortProfile profile_cohort(const RecommenderContext& ctx, std::span<const std::string> cohort);

// nullopt marks the dimension unavailable for this painter.
std::optional<double> sim_labels(const LabelWeights& painter, const CohortProfile& profile,
                                 const ArtisticSimilarityTable& ast);
std::optional<double> sim_geo(const corpus::Painter& painter, const CohortProfile& profile,
                              const geo::Geography& geography, double scale_km = 1000.0);
std::optional<double> sim_time(const corpus::Painter& painter, const CohortProfile& profile,
                               double scale_years = 100.0);
std::optional<double> sim_identity(const corpus::Painter& painter, const CohortProfile& profile);
double sim_inherit(std::size_t painter, const CohortProfile& profile);

// Zeroes unavailable dimensions and rescales the rest to sum 1.
// Throws ValidationError("no usable dimensions") when nothing is left.
SimilarityWeights normalize_weights(const Beta& beta, const Availability& available);

// Throws ValidationError for negative or non-finite entries.
void validate_beta(const Beta& beta);

struct Recommendation {
    std::string painter_id;
    double score = 0.0;
    std::array<double, kDims> dims{};
    Availability available{};
    std::size_t rank = 0;  // 1-based
};

struct RecommendationResult {
    std::vector<std::string> cohort;
    Beta beta{};
    std::size_t count = 0;                       // ceil(|cohort| / 3), or fewer if the pool is smaller
    std::vector<Recommendation> recommendations; // top `count`
    std::vector<Recommendation> scored;          // every candidate, same order

    // S rescaled by the best candidate score; 0 when every score is 0.
    double intensity(const Recommendation& r) const;
};

inline std::size_t recommendation_count(std::size_t cohort_size) { return (cohort_size + 2) / 3; }

RecommendationResult recommend(const RecommenderContext& ctx, std::span<const std::string> cohort,
                               const Beta& beta = kUniformBeta);

nlohmann::json to_json(const CohortProfile& profile);
nlohmann::json to_json(const RecommendationResult& result);
// Parses "a,b,c,d,e"; throws ValidationError.
Beta parse_beta(std::string_view text);
Beta beta_from_json(const nlohmann::json& j);

}  // namespace atlas::rec
