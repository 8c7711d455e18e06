#include "atlas/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"

namespace atlas::rec {

Availability CohortProfile::availability() const {
    return {lfv.size() > 0, !provinces.empty(), !known_births.empty(), level_freq.has_value(), true};
}

CohortProfile profile_cohort(const RecommenderContext& ctx, std::span<const std::string> cohort) {
    if (cohort.empty()) throw ValidationError("empty cohort");
    const auto& corpus = ctx.corpus;

    std::set<std::size_t> members;
    for (const auto& id : cohort) members.insert(corpus.require_index(id));

    CohortProfile prof;
    std::map<std::string, double> freq;
    std::set<std::string> provinces;
    std::array<double, 5> levels{};
    double level_total = 0.0;
    for (auto m : members) {
        const auto& p = corpus.painter(m);
        prof.members.push_back(p.id);
        for (const auto& e : ctx.importances.at(m).entries) freq[e.label_id] += 1.0;
        if (!p.province.empty()) {
            (void)ctx.geography.require(p.province);
            provinces.insert(p.province);
        }
        if (p.birth_year) prof.known_births.push_back(*p.birth_year);
        if (p.official_level) {
            levels[static_cast<std::size_t>(*p.official_level - 1)] += 1.0;
            level_total += 1.0;
        }
        const int y = corpus.effective_birth(m);
        prof.year_first = prof.year_first ? std::min(*prof.year_first, y) : y;
        prof.year_last = prof.year_last ? std::max(*prof.year_last, y) : y;
    }
    std::sort(prof.members.begin(), prof.members.end());
    std::sort(prof.known_births.begin(), prof.known_births.end());
    prof.provinces.assign(provinces.begin(), provinces.end());

    double total = 0.0;
    for (const auto& [_, c] : freq) total += c;
    prof.lfv.resize(static_cast<Eigen::Index>(freq.size()));
    Eigen::Index j = 0;
    for (const auto& [label, c] : freq) {
        prof.labels.push_back(label);
        prof.lfv(j++) = c / total;
    }
    if (level_total > 0.0) {
        for (auto& f : levels) f /= level_total;
        prof.level_freq = levels;
    }

    // Multi-source BFS over the undirected inheritance subgraph.
    prof.hops.assign(corpus.size(), -1);
    std::deque<std::size_t> queue;
    for (auto m : members) {
        prof.hops[m] = 0;
        queue.push_back(m);
    }
    while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        if (prof.hops[cur] >= ctx.config.max_hops) continue;
        auto visit = [&](std::size_t next) {
            if (prof.hops[next] != -1) return;
            prof.hops[next] = prof.hops[cur] + 1;
            queue.push_back(next);
        };
        for (auto n : corpus.masters_of(cur)) visit(n);
        for (auto n : corpus.apprentices_of(cur)) visit(n);
    }
    return prof;
}

std::optional<double> sim_labels(const LabelWeights& painter, const CohortProfile& profile,
                                 const ArtisticSimilarityTable& ast) {
    if (painter.empty() || profile.labels.empty()) return std::nullopt;
    const auto m = static_cast<Eigen::Index>(painter.entries.size());
    const auto k = static_cast<Eigen::Index>(profile.labels.size());
    std::vector<Eigen::Index> cohort_idx;
    cohort_idx.reserve(profile.labels.size());
    for (const auto& l : profile.labels) cohort_idx.push_back(ast.require_index(l));

    Eigen::VectorXd w(m);
    Eigen::MatrixXd lsm(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& e = painter.entries[static_cast<std::size_t>(i)];
        w(i) = e.weight;
        const auto row = ast.require_index(e.label_id);
        for (Eigen::Index jj = 0; jj < k; ++jj) lsm(i, jj) = ast.matrix()(row, cohort_idx[static_cast<std::size_t>(jj)]);
    }
    const double s = w.dot(lsm * profile.lfv);
    return std::clamp(s, 0.0, 1.0);
}

std::optional<double> sim_geo(const corpus::Painter& painter, const CohortProfile& profile,
                              const geo::Geography& geography, double scale_km) {
    if (painter.province.empty() || profile.provinces.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& prov : profile.provinces) best = std::min(best, geography.distance_km(painter.province, prov));
    return exp_kernel(best, scale_km);
}

std::optional<double> sim_time(const corpus::Painter& painter, const CohortProfile& profile, double scale_years) {
    if (!painter.birth_year || profile.known_births.empty()) return std::nullopt;
    int best = std::numeric_limits<int>::max();
    for (int y : profile.known_births) best = std::min(best, std::abs(*painter.birth_year - y));
    return exp_kernel(static_cast<double>(best), scale_years);
}

std::optional<double> sim_identity(const corpus::Painter& painter, const CohortProfile& profile) {
    if (!painter.official_level || !profile.level_freq) return std::nullopt;
    return (*profile.level_freq)[static_cast<std::size_t>(*painter.official_level - 1)];
}

double sim_inherit(std::size_t painter, const CohortProfile& profile) {
    const int d = profile.hops.at(painter);
    return d < 0 ? 0.0 : halving_kernel(d);
}

void validate_beta(const Beta& beta) {
    for (std::size_t i = 0; i < kDims; ++i) {
        if (!std::isfinite(beta[i]) || beta[i] < 0.0) {
            throw ValidationError(std::string("beta.") + kDimNames[i] + " must be a nonnegative number");
        }
    }
}

SimilarityWeights normalize_weights(const Beta& beta, const Availability& available) {
    validate_beta(beta);
    SimilarityWeights out;
    double total = 0.0;
    for (std::size_t i = 0; i < kDims; ++i) {
        out.beta[i] = available[i] ? beta[i] : 0.0;
        total += out.beta[i];
    }
    if (!(total > 0.0)) throw ValidationError("no usable dimensions");
    for (auto& b : out.beta) b /= total;
    return out;
}

double RecommendationResult::intensity(const Recommendation& r) const {
    double best = 0.0;
    for (const auto& s : scored) best = std::max(best, s.score);
    return best > 0.0 ? r.score / best : 0.0;
}

RecommendationResult recommend(const RecommenderContext& ctx, std::span<const std::string> cohort, const Beta& beta) {
    validate_beta(beta);
    const auto profile = profile_cohort(ctx, cohort);
    const auto cohort_avail = profile.availability();
    {
        // Fails early when the cohort alone leaves nothing to weigh.
        (void)normalize_weights(beta, cohort_avail);
    }
    const std::set<std::string> in_cohort(profile.members.begin(), profile.members.end());

    RecommendationResult out;
    out.cohort = profile.members;
    out.beta = beta;
    const auto& corpus = ctx.corpus;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& p = corpus.painter(i);
        if (in_cohort.contains(p.id)) continue;
        std::array<std::optional<double>, kDims> s{
            sim_labels(ctx.importances.at(i), profile, ctx.ast),
            sim_geo(p, profile, ctx.geography, ctx.config.geo_scale_km),
            sim_time(p, profile, ctx.config.time_scale_years),
            sim_identity(p, profile),
            sim_inherit(i, profile),
        };
        Recommendation r;
        r.painter_id = p.id;
        for (std::size_t d = 0; d < kDims; ++d) {
            r.available[d] = s[d].has_value();
            r.dims[d] = s[d].value_or(0.0);
        }
        double total = 0.0;
        for (std::size_t d = 0; d < kDims; ++d) total += r.available[d] ? beta[d] : 0.0;
        if (total > 0.0) {
            const auto w = normalize_weights(beta, r.available);
            for (std::size_t d = 0; d < kDims; ++d) r.score += w.beta[d] * r.dims[d];
            r.score = std::clamp(r.score, 0.0, 1.0);
        }
        out.scored.push_back(std::move(r));
    }
    std::sort(out.scored.begin(), out.scored.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.painter_id < b.painter_id;
    });
    for (std::size_t i = 0; i < out.scored.size(); ++i) out.scored[i].rank = i + 1;
    out.count = std::min(recommendation_count(profile.members.size()), out.scored.size());
    out.recommendations.assign(out.scored.begin(), out.scored.begin() + static_cast<std::ptrdiff_t>(out.count));
    return out;
}

nlohmann::json to_json(const CohortProfile& profile) {
    nlohmann::json lfv = nlohmann::json::object();
    for (std::size_t j = 0; j < profile.labels.size(); ++j) lfv[profile.labels[j]] = profile.lfv(static_cast<Eigen::Index>(j));
    nlohmann::json out{{"members", profile.members},
                       {"lfv", lfv},
                       {"provinces", profile.provinces},
                       {"year_span", profile.year_first ? nlohmann::json{*profile.year_first, *profile.year_last} : nlohmann::json(nullptr)},
                       {"level_freq", profile.level_freq ? nlohmann::json(*profile.level_freq) : nlohmann::json(nullptr)}};
    nlohmann::json avail = nlohmann::json::object();
    const auto a = profile.availability();
    for (std::size_t d = 0; d < kDims; ++d) avail[kDimNames[d]] = a[d];
    out["available"] = avail;
    return out;
}

namespace {

nlohmann::json rec_json(const RecommendationResult& res, const Recommendation& r) {
    nlohmann::json dims = nlohmann::json::object();
    for (std::size_t d = 0; d < kDims; ++d) {
        dims[kDimNames[d]] = r.available[d] ? nlohmann::json(r.dims[d]) : nlohmann::json(nullptr);
    }
    return {{"painter_id", r.painter_id}, {"rank", r.rank}, {"score", r.score}, {"dims", dims}, {"intensity", res.intensity(r)}};
}

}  // namespace

nlohmann::json to_json(const RecommendationResult& result) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : result.recommendations) recs.push_back(rec_json(result, r));
    nlohmann::json highlight = nlohmann::json::object();
    for (const auto& r : result.scored) highlight[r.painter_id] = result.intensity(r);
    nlohmann::json beta = nlohmann::json::object();
    for (std::size_t d = 0; d < kDims; ++d) beta[kDimNames[d]] = result.beta[d];
    return {{"cohort", result.cohort},
            {"beta", beta},
            {"count", result.count},
            {"recommendations", recs},
            {"highlight", highlight}};
}

Beta parse_beta(std::string_view text) {
    Beta beta{};
    std::stringstream in{std::string(text)};
    std::string item;
    std::size_t i = 0;
    while (std::getline(in, item, ',')) {
        if (i >= kDims) throw ValidationError("beta needs exactly 5 values");
        try {
            std::size_t used = 0;
            beta[i] = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("beta value '" + item + "' is not a number");
        }
        ++i;
    }
    if (i != kDims) throw ValidationError("beta needs exactly 5 values");
    validate_beta(beta);
    return beta;
}

Beta beta_from_json(const nlohmann::json& j) {
    Beta beta{};
    if (j.is_array()) {
        if (j.size() != kDims) throw ValidationError("beta needs exactly 5 values");
        for (std::size_t d = 0; d < kDims; ++d) {
            if (!j[d].is_number()) throw ValidationError("beta values must be numbers");
            beta[d] = j[d].get<double>();
        }
    } else if (j.is_object()) {
        for (std::size_t d = 0; d < kDims; ++d) {
            if (!j.contains(kDimNames[d]) || !j[kDimNames[d]].is_number()) {
                throw ValidationError(std::string("beta.") + kDimNames[d] + " missing or not a number");
            }
            beta[d] = j[kDimNames[d]].get<double>();
        }
    } else {
        throw ValidationError("beta must be an array or an object");
    }
    validate_beta(beta);
    return beta;
}

}  // namespace atlas::rec
