#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "atlas/corpus.hpp"
#include "atlas/error.hpp"
#include "atlas/importance.hpp"
#include "atlas/taxonomy.hpp"
#include "builders.hpp"
#include "oracles.hpp"

using namespace atlas;
using testing_support::P;
using testing_support::make_corpus;
using testing_support::make_document;

namespace {

std::string violation_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "atlas_tests";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::filesystem::remove(p);
    std::filesystem::remove(p.string() + ".edits.jsonl");
    return p;
}

std::vector<std::pair<std::size_t, std::size_t>> inheritance_edges(const corpus::Corpus& c) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (auto m : c.masters_of(i)) edges.emplace_back(i, m);
    }
    return edges;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("three painters with two master relations load as given") {
    auto c = make_corpus({{"a", 900, {}}, {"b", 930, {"a"}}, {"c", 960, {"b"}}});
    CHECK(c.size() == 3);
    CHECK(c.relations().size() == 2);
    CHECK(c.index_of("b") == 1u);
    CHECK(c.masters_of(2) == std::vector<std::size_t>{1});
}

TEST_CASE("self relation is rejected") {
    auto msg = violation_text([] { make_corpus({{"a", 900, {"a"}}}); });
    CHECK(msg.find("self relation") != std::string::npos);
}

TEST_CASE("two-node master cycle is rejected and the DFS oracle agrees") {
    auto doc = make_document({{"a", 900, {"b"}}, {"b", 930, {"a"}}});
    CHECK(oracle::has_cycle(2, {{0, 1}, {1, 0}}));
    auto msg = violation_text([&] { corpus::Corpus::build(doc); });
    CHECK(msg.find("inheritance cycle") != std::string::npos);
}

TEST_CASE("every violation is reported at once") {
    corpus::CorpusDocument doc = make_document({{"a", 900, {}}, {"a", 930, {}}, {"b", 950, {"zz"}}});
    doc.painters[2].death_year = 900;
    doc.painters[2].official_level = 9;
    try {
        corpus::Corpus::build(doc);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string all = e.what();
        CHECK(e.violations().size() >= 4);
        CHECK(all.find("duplicate id 'a'") != std::string::npos);
        CHECK(all.find("dangling relation endpoint") != std::string::npos);
        CHECK(all.find("birth_year > death_year") != std::string::npos);
        CHECK(all.find("official_level outside 1..5") != std::string::npos);
    }
}

TEST_CASE("friendship edges do not count towards cycles") {
    auto doc = make_document({{"a", 900, {"b"}}, {"b", 930, {}}});
    doc.relations.push_back({"b", "a", corpus::RelationKind::friendship, {}});
    auto c = corpus::Corpus::build(doc);
    CHECK(c.masters_of(1).empty());
}

TEST_CASE("missing birth years are estimated and flagged") {
    auto doc = make_document({{"a", 900, {}}, {"b", std::nullopt, {"a"}}, {"c", std::nullopt, {}}});
    doc.painters[2].dynasty = "song";
    auto c = corpus::Corpus::build(doc);
    CHECK(c.effective_birth(1) == 930);
    CHECK(c.birth_estimated(1));
    CHECK_FALSE(c.birth_estimated(0));
    auto song = corpus::find_dynasty("song");
    REQUIRE(song);
    CHECK(c.effective_birth(2) == (song->start + song->end) / 2);
}

TEST_CASE("fixture generation is deterministic") {
    auto a = corpus::to_json(corpus::generate_fixture(7, 50, {900, 1900}).document()).dump();
    auto b = corpus::to_json(corpus::generate_fixture(7, 50, {900, 1900}).document()).dump();
    CHECK(a == b);
    auto other = corpus::to_json(corpus::generate_fixture(8, 50, {900, 1900}).document()).dump();
    CHECK(a != other);
}

TEST_CASE("large fixture is cycle-free with masters strictly earlier") {
    auto c = corpus::generate_fixture(7, 2212, {200, 1900});
    CHECK(c.size() == 2212);
    CHECK_FALSE(oracle::has_cycle(c.size(), inheritance_edges(c)));
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (auto m : c.masters_of(i)) CHECK(*c.painter(m).birth_year < *c.painter(i).birth_year);
    }
    for (const auto& p : c.painters()) {
        for (const auto& l : p.raw_labels) CHECK(bundled_taxonomy().contains(l.label_id));
    }
}

TEST_CASE("degenerate fixture has one painter and no relations") {
    auto c = corpus::generate_fixture(1, 1, {1000, 1001});
    CHECK(c.size() == 1);
    CHECK(c.relations().empty());
}

TEST_CASE("save then load gives the same document, unknown keys included") {
    auto doc = corpus::to_json(corpus::generate_fixture(3, 40, {900, 1900}).document());
    doc["painters"][0]["courtesy_name"] = "Ziyun";
    doc["relations"][0]["source"] = "annals";
    doc["extra_top"] = {1, 2, 3};
    auto c = corpus::corpus_from_json(doc);
    auto path = temp_file("roundtrip.json");
    corpus::save_corpus(c, path);
    auto back = corpus::load_corpus(path);
    CHECK(back.document() == c.document());
    CHECK(corpus::to_json(back.document()) == doc);
}

TEST_CASE("malformed file is a parse error") {
    auto path = temp_file("broken.json");
    std::ofstream(path) << "{\"painters\": [";
    CHECK_THROWS_AS(corpus::load_corpus(path), ParseError);
}

TEST_CASE("adding a label persists, versions the snapshot and stales importances") {
    auto c = corpus::generate_fixture(5, 20, {900, 1900});
    auto path = temp_file("edits.json");
    corpus::save_corpus(c, path);
    auto loaded = corpus::load_corpus(path);
    const auto before = loaded.document();

    ImportanceCache cache;
    (void)cache.get(loaded);
    CHECK_FALSE(cache.is_stale(loaded));

    std::vector<corpus::LabelEdit> edits{{corpus::LabelEditKind::add, "crane", "painted cranes"}};
    auto res = corpus::update_painter_labels(loaded, before.painters[1].id, edits, bundled_taxonomy());
    const auto& p = res.corpus.painter(1);
    CHECK(std::any_of(p.raw_labels.begin(), p.raw_labels.end(), [](auto& l) { return l.label_id == "crane"; }));
    CHECK(res.corpus.version() == loaded.version() + 1);
    CHECK(cache.is_stale(res.corpus));
    for (std::size_t i = 0; i < before.painters.size(); ++i) {
        if (i != 1) CHECK(res.corpus.painter(i) == before.painters[i]);
    }
    CHECK(corpus::load_corpus(path).painter(1) == p);
    CHECK(std::filesystem::exists(path.string() + ".edits.jsonl"));
}

TEST_CASE("removing an absent label is a no-op with a warning") {
    auto c = make_corpus({{"a", 900, {}, {"crane"}}});
    std::vector<corpus::LabelEdit> edits{{corpus::LabelEditKind::remove, "bamboo-stone", ""}};
    auto res = corpus::update_painter_labels(c, "a", edits, bundled_taxonomy());
    CHECK(res.warnings.size() == 1);
    CHECK(res.corpus.painter(0).raw_labels == c.painter(0).raw_labels);
}

TEST_CASE("label edits reject unknown labels and painters") {
    auto c = make_corpus({{"a", 900, {}}});
    std::vector<corpus::LabelEdit> bad_label{{corpus::LabelEditKind::add, "no-such-label", ""}};
    CHECK_THROWS_WITH_AS(corpus::update_painter_labels(c, "a", bad_label, bundled_taxonomy()),
                         doctest::Contains("unknown label id"), NotFoundError);
    std::vector<corpus::LabelEdit> ok{{corpus::LabelEditKind::add, "crane", ""}};
    CHECK_THROWS_AS(corpus::update_painter_labels(c, "zz", ok, bundled_taxonomy()), NotFoundError);
}

}
