#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "atlas/embedding.hpp"
#include "atlas/error.hpp"
#include "atlas/kernels.hpp"
#include "atlas/similarity_table.hpp"
#include "atlas/taxonomy.hpp"

using namespace atlas;

namespace {

LabelNode node(std::string id, Dimension d, std::optional<std::string> parent) {
    return {id, d, std::move(parent), id};
}

// Fails on one chosen text, echoes a fixed vector otherwise.
class FlakyProvider final : public EmbeddingProvider {
public:
    explicit FlakyProvider(std::string bad) : bad_(std::move(bad)) {}
    std::string name() const override { return "flaky"; }
    int dimensionality() const override { return 2; }
    bool deterministic() const override { return true; }
    Eigen::VectorXd embed(std::string_view text) const override {
        if (text == bad_) throw EmbeddingError("boom");
        return Eigen::Vector2d(1.0, 0.0);
    }

private:
    std::string bad_;
};

}  // namespace

TEST_SUITE("taxonomy") {

TEST_CASE("bundled taxonomy has 40 labels across three dimensions") {
    const auto& t = bundled_taxonomy();
    CHECK(t.size() == 40);
    std::set<Dimension> dims;
    for (const auto& n : t.nodes()) dims.insert(n.dimension);
    CHECK(dims.size() == 3);
    for (auto d : kDimensions) CHECK_FALSE(t.roots(d).empty());
    CHECK(t.depth("buddha-statues") == 3);
    CHECK(t.ancestors("buddha-statues") == std::vector<std::string>{"buddhist", "figure"});
}

TEST_CASE("closure contains the label and every descendant") {
    auto c = bundled_taxonomy().closure("flower-bird");
    std::set<std::string> got(c.begin(), c.end());
    CHECK(got == std::set<std::string>{"flower-bird", "flower", "bird-beast", "crane", "exotic-birds"});
}

TEST_CASE("cross-dimension parent is rejected") {
    CHECK_THROWS_AS(LabelTaxonomy({node("a", Dimension::subject, {}), node("b", Dimension::emotion, "a")}),
                    ValidationError);
}

TEST_CASE("four-level chain is rejected with a depth message") {
    auto d = Dimension::technique;
    CHECK_THROWS_WITH(LabelTaxonomy({node("a", d, {}), node("b", d, "a"), node("c", d, "b"), node("e", d, "c")}),
                      doctest::Contains("depth exceeds 3"));
}

TEST_CASE("orphan parent and duplicate ids are rejected") {
    CHECK_THROWS_AS(LabelTaxonomy({node("a", Dimension::subject, "ghost")}), ValidationError);
    CHECK_THROWS_AS(LabelTaxonomy({node("a", Dimension::subject, {}), node("a", Dimension::subject, {})}),
                    ValidationError);
}

TEST_CASE("taxonomy json round trip and bad dimension") {
    auto j = to_json(bundled_taxonomy());
    CHECK(taxonomy_from_json(j) == bundled_taxonomy());
    j[0]["dimension"] = "colour";
    CHECK_THROWS_AS(taxonomy_from_json(j), ParseError);
}

TEST_CASE("shipped data files match the bundled tables") {
    const std::filesystem::path data = ATLAS_DATA_DIR;
    CHECK(load_taxonomy(data / "taxonomy.json") == bundled_taxonomy());
    CHECK(load_descriptions(data / "descriptions.json") == bundled_descriptions());
}

}

TEST_SUITE("taxonomy") {

TEST_CASE("trigram provider is deterministic and unit length") {
    TrigramHashProvider p;
    auto a = p.embed("Fine lines like iron wire");
    CHECK(a.size() == 256);
    CHECK(a.norm() == doctest::Approx(1.0));
    CHECK((a - p.embed("Fine lines like iron wire")).norm() == 0.0);
}

TEST_CASE("identical descriptions give similarity one") {
    LabelTaxonomy t({node("a", Dimension::subject, {}), node("b", Dimension::subject, {})});
    auto ast = build_ast(t, TrigramHashProvider{}, {{"a", "misty peaks"}, {"b", "misty peaks"}});
    CHECK(ast("a", "b") == doctest::Approx(1.0));
}

TEST_CASE("texts with disjoint trigram buckets are dissimilar") {
    TrigramHashProvider p;
    // Single-letter texts have exactly one padded trigram; find two that land apart.
    std::string first = "a", second;
    for (char c = 'b'; c <= 'z' && second.empty(); ++c) {
        std::string s(1, c);
        if (p.bucket(" " + s + " ") != p.bucket(" a ")) second = s;
    }
    REQUIRE_FALSE(second.empty());
    CHECK(p.embed(first).dot(p.embed(second)) == 0.0);
    LabelTaxonomy t({node("x", Dimension::subject, {}), node("y", Dimension::subject, {})});
    auto ast = build_ast(t, p, {{"x", first}, {"y", second}});
    CHECK(ast("x", "y") == 0.0);
}

TEST_CASE("bundled table is symmetric with unit diagonal and entries in range") {
    auto ast = build_ast(bundled_taxonomy(), TrigramHashProvider{}, bundled_descriptions());
    const auto& m = ast.matrix();
    CHECK(m.rows() == 40);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        CHECK(m(i, i) == 1.0);
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            CHECK(m(i, j) == m(j, i));
            CHECK(m(i, j) >= 0.0);
            CHECK(m(i, j) <= 1.0);
        }
    }
}

TEST_CASE("table entries are the clamped cosine of the description vectors") {
    TrigramHashProvider p;
    const auto& t = bundled_taxonomy();
    const auto& d = bundled_descriptions();
    auto ast = build_ast(t, p, d);
    for (const char* a : {"crane", "iron-wire", "serene"}) {
        for (const char* b : {"flower", "silk-thread", "reclusive"}) {
            auto va = p.embed(d.at(a)), vb = p.embed(d.at(b));
            double cos = va.dot(vb) / (va.norm() * vb.norm());
            CHECK(ast(a, b) == doctest::Approx(std::clamp(cos, 0.0, 1.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("negative input entries are clamped and asymmetric ones symmetrized") {
    Eigen::MatrixXd m(2, 2);
    m << 0.3, -0.5, -0.5, 0.9;
    ArtisticSimilarityTable t({"a", "b"}, m);
    CHECK(t("a", "b") == 0.0);
    CHECK(t("a", "a") == 1.0);
}

TEST_CASE("lookups of unknown labels signal a stale table") {
    ArtisticSimilarityTable t({"a"}, Eigen::MatrixXd::Identity(1, 1));
    CHECK_THROWS_AS(t("a", "zz"), StaleTableError);
}

TEST_CASE("provider failures are reported per label") {
    LabelTaxonomy t({node("a", Dimension::subject, {}), node("b", Dimension::subject, {})});
    try {
        build_ast(t, FlakyProvider("bad text"), {{"a", "fine"}, {"b", "bad text"}});
        FAIL("expected failure");
    } catch (const AstBuildError& e) {
        CHECK(e.failed_labels() == std::vector<std::string>{"b"});
    }
}

TEST_CASE("table survives a save and load") {
    auto ast = build_ast(bundled_taxonomy(), TrigramHashProvider{}, bundled_descriptions());
    auto path = std::filesystem::temp_directory_path() / "atlas_ast_roundtrip.json";
    save_ast(ast, path);
    auto back = load_ast(path);
    CHECK(back.labels() == ast.labels());
    CHECK((back.matrix() - ast.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kernels") {
    CHECK(exp_kernel(0.0, 100.0) == 1.0);
    CHECK(exp_kernel(100.0, 100.0) == doctest::Approx(0.36787944117));
    CHECK(halving_kernel(3) == 0.125);
    Eigen::Vector2d a(1, 0), b(-1, 0), z(0, 0);
    CHECK(clamped_cosine(a, b) == 0.0);
    CHECK(clamped_cosine(a, z) == 0.0);
    CHECK(clamped_cosine(a, a) == doctest::Approx(1.0));
}

}
