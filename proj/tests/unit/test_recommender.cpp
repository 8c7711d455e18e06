#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "atlas/corpus.hpp"
#include "atlas/embedding.hpp"
#include "atlas/error.hpp"
#include "atlas/geography.hpp"
#include "atlas/importance.hpp"
#include "atlas/recommender.hpp"
#include "atlas/similarity_table.hpp"
#include "atlas/taxonomy.hpp"
#include "builders.hpp"
#include "oracles.hpp"

using namespace atlas;
using namespace atlas::rec;
using testing_support::make_corpus;
using testing_support::P;

namespace {

const ArtisticSimilarityTable& bundled_ast() {
    static const auto ast = build_ast(bundled_taxonomy(), TrigramHashProvider{}, bundled_descriptions());
    return ast;
}

// Owns everything a RecommenderContext only references.
struct Fixture {
    corpus::Corpus corpus;
    std::vector<LabelWeights> importances;

    explicit Fixture(corpus::Corpus c) : corpus(std::move(c)), importances(compute_all_importance(corpus)) {}
    RecommenderContext ctx() const { return {corpus, geo::bundled_geography(), bundled_ast(), importances}; }
};

LabelWeights weights(std::vector<std::pair<std::string, double>> entries) {
    LabelWeights w;
    for (auto& [l, x] : entries) w.entries.push_back({l, x, 1.0, 0.0});
    return w;
}

CohortProfile lfv_profile(std::vector<std::string> labels, std::vector<double> lfv) {
    CohortProfile p;
    p.labels = std::move(labels);
    p.lfv = Eigen::Map<Eigen::VectorXd>(lfv.data(), static_cast<Eigen::Index>(lfv.size()));
    return p;
}

corpus::Painter painter_born(std::optional<int> year, std::string province = {}, std::optional<int> level = {}) {
    corpus::Painter p;
    p.id = "q";
    p.birth_year = year;
    p.province = std::move(province);
    p.official_level = level;
    return p;
}

std::vector<std::string> first_ids(const corpus::Corpus& c, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(c.painter(i).id);
    return out;
}

}  // namespace

TEST_SUITE("recommender") {

TEST_CASE("cohort label frequency vector counts members per label") {
    Fixture fx(make_corpus({{"a", 900, {}, {"crane"}}, {"b", 910, {}, {"crane", "mogu"}}, {"c", 920, {}}}));
    std::vector<std::string> cohort{"a", "b"};
    auto prof = profile_cohort(fx.ctx(), cohort);
    REQUIRE(prof.labels == std::vector<std::string>{"crane", "mogu"});
    CHECK(prof.lfv(0) == doctest::Approx(2.0 / 3.0));
    CHECK(prof.lfv(1) == doctest::Approx(1.0 / 3.0));
    CHECK(prof.lfv.sum() == doctest::Approx(1.0));
}

TEST_CASE("level frequencies and the missing-level rule") {
    Fixture fx(make_corpus({{"a", 900, {}, {}, "", 3}, {"b", 910, {}, {}, "", 3}, {"c", 920, {}}}));
    std::vector<std::string> both{"a", "b"};
    auto prof = profile_cohort(fx.ctx(), both);
    REQUIRE(prof.level_freq);
    CHECK(*prof.level_freq == std::array<double, 5>{0, 0, 1, 0, 0});
    std::vector<std::string> unknown{"c"};
    auto none = profile_cohort(fx.ctx(), unknown);
    CHECK_FALSE(none.level_freq.has_value());
    CHECK_FALSE(none.availability()[identity]);
}

TEST_CASE("empty cohort and unknown members are rejected") {
    Fixture fx(make_corpus({{"a", 900, {}}}));
    std::vector<std::string> empty, ghost{"zz"};
    CHECK_THROWS_WITH_AS(profile_cohort(fx.ctx(), empty), "empty cohort", ValidationError);
    CHECK_THROWS_AS(profile_cohort(fx.ctx(), ghost), NotFoundError);
}

TEST_CASE("label similarity identity case") {
    ArtisticSimilarityTable ast({"L", "M"}, Eigen::Matrix2d::Identity());
    CHECK(*sim_labels(weights({{"L", 1.0}}), lfv_profile({"L"}, {1.0}), ast) == 1.0);
}

TEST_CASE("label similarity single cross term") {
    Eigen::Matrix2d m;
    m << 1.0, 0.4, 0.4, 1.0;
    ArtisticSimilarityTable ast({"L", "M"}, m);
    CHECK(*sim_labels(weights({{"L", 1.0}}), lfv_profile({"M"}, {1.0}), ast) == doctest::Approx(0.4));
}

TEST_CASE("label similarity four-term expansion") {
    ArtisticSimilarityTable ast({"L", "M"}, Eigen::Matrix2d::Identity());
    auto s = sim_labels(weights({{"L", 0.5}, {"M", 0.5}}), lfv_profile({"L", "M"}, {0.5, 0.5}), ast);
    CHECK(*s == doctest::Approx(0.5));
}

TEST_CASE("label similarity is unavailable without labels and signals a stale table") {
    ArtisticSimilarityTable ast({"L"}, Eigen::MatrixXd::Identity(1, 1));
    CHECK_FALSE(sim_labels(LabelWeights{}, lfv_profile({"L"}, {1.0}), ast).has_value());
    CHECK_THROWS_AS(sim_labels(weights({{"Q", 1.0}}), lfv_profile({"L"}, {1.0}), ast), StaleTableError);
}

TEST_CASE("geographic similarity") {
    const auto& g = geo::bundled_geography();
    CohortProfile prof;
    prof.provinces = {"jiangsu", "sichuan"};
    CHECK(*sim_geo(painter_born(900, "jiangsu"), prof, g) == 1.0);
    const double d = std::min(g.distance_km("zhejiang", "jiangsu"), g.distance_km("zhejiang", "sichuan"));
    CHECK(*sim_geo(painter_born(900, "zhejiang"), prof, g) == doctest::Approx(std::exp(-d / 1000.0)));
    CHECK_FALSE(sim_geo(painter_born(900), prof, g).has_value());
    CHECK_THROWS_AS(sim_geo(painter_born(900, "atlantis"), prof, g), NotFoundError);
}

TEST_CASE("haversine agrees with a known distance") {
    // Beijing to Shanghai capitals is roughly 1070 km.
    CHECK(geo::bundled_geography().distance_km("beijing", "shanghai") == doctest::Approx(1067).epsilon(0.01));
    CHECK(geo::haversine_km(10, 20, 10, 20) == 0.0);
}

TEST_CASE("time similarity uses the nearest known birth") {
    CohortProfile one;
    one.known_births = {1000};
    CHECK(*sim_time(painter_born(1100), one) == doctest::Approx(0.3679).epsilon(1e-4));
    CohortProfile two;
    two.known_births = {1050, 1300};
    CHECK(*sim_time(painter_born(1100), two) == doctest::Approx(std::exp(-0.5)));
    CHECK(*sim_time(painter_born(1050), two) == 1.0);
    CHECK_FALSE(sim_time(painter_born(std::nullopt), two).has_value());
}

TEST_CASE("time and geographic kernels never increase with distance") {
    CohortProfile prof;
    prof.known_births = {1000};
    double prev = 2.0;
    for (int y = 1000; y < 1600; y += 37) {
        const double s = *sim_time(painter_born(y), prof);
        CHECK(s <= prev);
        prev = s;
    }
}

TEST_CASE("identity similarity reads the level frequency") {
    CohortProfile prof;
    prof.level_freq = std::array<double, 5>{0, 0, 1, 0, 0};
    CHECK(*sim_identity(painter_born(900, "", 3), prof) == 1.0);
    CHECK(*sim_identity(painter_born(900, "", 1), prof) == 0.0);
    prof.level_freq = std::array<double, 5>{0.5, 0.5, 0, 0, 0};
    CHECK(*sim_identity(painter_born(900, "", 2), prof) == 0.5);
    CHECK_FALSE(sim_identity(painter_born(900), prof).has_value());
}

TEST_CASE("inheritance similarity halves per hop and takes the best member") {
    Fixture fx(make_corpus({{"m", 900, {}}, {"a", 930, {"m"}}, {"b", 960, {"a"}}, {"c", 990, {"b"}},
                            {"d", 1020, {"c"}}, {"e", 1050, {"d"}}, {"lone", 900, {}}}));
    std::vector<std::string> one{"a"};
    auto prof = profile_cohort(fx.ctx(), one);
    CHECK(sim_inherit(*fx.corpus.index_of("m"), prof) == 0.5);
    CHECK(sim_inherit(*fx.corpus.index_of("lone"), prof) == 0.0);
    // Distances 2 to c and 4 to a from e.
    std::vector<std::string> pair{"a", "c"};
    auto p2 = profile_cohort(fx.ctx(), pair);
    CHECK(sim_inherit(*fx.corpus.index_of("e"), p2) == 0.25);
}

TEST_CASE("inheritance similarity is cut beyond six hops") {
    std::vector<P> ps{{"n0", 900, {}}};
    for (int i = 1; i <= 8; ++i) ps.push_back({"n" + std::to_string(i), 900 + 30 * i, {"n" + std::to_string(i - 1)}});
    Fixture fx(make_corpus(ps));
    std::vector<std::string> cohort{"n0"};
    auto prof = profile_cohort(fx.ctx(), cohort);
    CHECK(sim_inherit(6, prof) == std::ldexp(1.0, -6));
    CHECK(sim_inherit(7, prof) == 0.0);
}

TEST_CASE("adding a member never lowers inheritance similarity") {
    Fixture fx(corpus::generate_fixture(4, 120, {900, 1900}));
    std::vector<std::string> cohort{fx.corpus.painter(10).id};
    auto before = profile_cohort(fx.ctx(), cohort);
    cohort.push_back(fx.corpus.painter(77).id);
    auto after = profile_cohort(fx.ctx(), cohort);
    for (std::size_t i = 0; i < fx.corpus.size(); ++i) CHECK(sim_inherit(i, after) >= sim_inherit(i, before));
}

TEST_CASE("unavailable dimensions hand their weight to the rest") {
    auto w = normalize_weights(kUniformBeta, {true, false, true, true, true});
    CHECK(w.beta == Beta{0.25, 0, 0.25, 0.25, 0.25});
    auto same = normalize_weights(kUniformBeta, {true, true, true, true, true});
    for (std::size_t i = 0; i < kDims; ++i) CHECK(same.beta[i] == doctest::Approx(0.2));
    CHECK_THROWS_WITH_AS(normalize_weights({1, 0, 0, 0, 0}, {false, true, true, true, true}),
                         "no usable dimensions", ValidationError);
}

TEST_CASE("negative or non-finite weights are rejected") {
    CHECK_THROWS_AS(validate_beta({-0.1, 0, 0, 0, 1}), ValidationError);
    CHECK_THROWS_AS(validate_beta({NAN, 0, 0, 0, 1}), ValidationError);
    CHECK_NOTHROW(validate_beta({0, 0, 0, 0, 3}));
}

TEST_CASE("weights parse from text and json") {
    CHECK(parse_beta("1,2,3,4,5") == Beta{1, 2, 3, 4, 5});
    CHECK_THROWS_AS(parse_beta("1,2,3"), ValidationError);
    CHECK_THROWS_AS(parse_beta("1,2,x,4,5"), ValidationError);
    CHECK(beta_from_json(nlohmann::json::array({0.1, 0.2, 0.3, 0.2, 0.2})) == Beta{0.1, 0.2, 0.3, 0.2, 0.2});
    nlohmann::json obj{{"labels", 1.0}, {"geography", 0.0}, {"time", 2.0}, {"identity", 0.0}, {"inheritance", 0.5}};
    CHECK(beta_from_json(obj) == Beta{1.0, 0.0, 2.0, 0.0, 0.5});
    obj.erase("time");
    CHECK_THROWS_AS(beta_from_json(obj), ValidationError);
    CHECK_THROWS_AS(beta_from_json("0.2"), ValidationError);
}

TEST_CASE("a third of the cohort size is recommended, rounded up") {
    Fixture fx(corpus::generate_fixture(9, 40, {900, 1900}));
    CHECK(recommend(fx.ctx(), first_ids(fx.corpus, 10)).recommendations.size() == 4);
    CHECK(recommend(fx.ctx(), first_ids(fx.corpus, 7)).recommendations.size() == 3);
    CHECK(recommend(fx.ctx(), first_ids(fx.corpus, 1)).recommendations.size() == 1);
}

TEST_CASE("an exhausted pool returns the last painter whatever the score") {
    Fixture fx(corpus::generate_fixture(9, 40, {900, 1900}));
    auto cohort = first_ids(fx.corpus, 39);
    auto r = recommend(fx.ctx(), cohort);
    REQUIRE(r.recommendations.size() == 1);
    CHECK(r.recommendations[0].painter_id == fx.corpus.painter(39).id);
}

TEST_CASE("ranking is sorted by score then painter id") {
    Fixture fx(make_corpus({{"a", 900, {}}, {"z", 1500, {}}, {"y", 1500, {}}, {"x", 1500, {}}, {"m", 1400, {}}}));
    std::vector<std::string> cohort{"a", "m"};
    auto r = recommend(fx.ctx(), cohort, {0, 0, 1, 0, 0});
    REQUIRE(r.scored.size() == 3);
    CHECK(r.scored[0].painter_id == "x");
    CHECK(r.scored[1].painter_id == "y");
    CHECK(r.scored[2].painter_id == "z");
    CHECK(r.scored[0].rank == 1);
    CHECK(r.intensity(r.scored[0]) == 1.0);
}

TEST_CASE("scores agree with a term-by-term evaluation") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Fixture fx(corpus::generate_fixture(seed, 18, {900, 1900}));
        std::vector<std::string> cohort;
        for (std::size_t i = seed % 3; i < fx.corpus.size(); i += 4) cohort.push_back(fx.corpus.painter(i).id);
        const Beta beta{0.3, 0.1, 0.25, 0.15, 0.2};
        auto want = oracle::straight_line_scores(fx.corpus.document(), fx.importances, bundled_ast(),
                                                 geo::bundled_geography(), cohort, beta);
        auto got = recommend(fx.ctx(), cohort, beta);
        REQUIRE(got.scored.size() == want.size());
        for (const auto& r : got.scored) {
            const auto& w = want.at(r.painter_id);
            CHECK(std::abs(r.score - w.total) <= 1e-12);
            for (std::size_t d = 0; d < kDims; ++d) {
                CHECK(r.available[d] == w.available[d]);
                if (w.available[d]) CHECK(std::abs(r.dims[d] - w.s[d]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("all scores stay within the unit interval") {
    Fixture fx(corpus::generate_fixture(13, 200, {900, 1900}));
    auto r = recommend(fx.ctx(), first_ids(fx.corpus, 30), {5, 1, 0, 2, 9});
    for (const auto& x : r.scored) {
        CHECK(x.score >= 0.0);
        CHECK(x.score <= 1.0);
        for (auto s : x.dims) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("result json carries the highlight map") {
    Fixture fx(corpus::generate_fixture(9, 40, {900, 1900}));
    auto j = to_json(recommend(fx.ctx(), first_ids(fx.corpus, 6)));
    CHECK(j["count"] == 2);
    CHECK(j["recommendations"].size() == 2);
    CHECK(j["highlight"].size() == 34);
    CHECK(j["beta"]["labels"] == 0.2);
}

}
