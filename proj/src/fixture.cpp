#include <algorithm>
#include <array>
#include <string>

#include "atlas/corpus.hpp"
#include "atlas/detail/rng.hpp"
#include "atlas/geography.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas::corpus {

namespace {

constexpr std::array kSurnames{"Wang", "Li",  "Zhang", "Liu", "Chen", "Yang", "Zhao", "Huang",
                               "Zhou", "Wu",  "Xu",    "Sun", "Ma",   "Zhu",  "Hu",   "Guo",
                               "Lin",  "He",  "Gao",   "Shen", "Wen", "Dong", "Cui",  "Qiu"};
constexpr std::array kSyllables{"Meng", "Xi",  "Quan", "Ji",   "Zhou", "Ming", "Chun", "Wei",
                                "Bai",  "Chang", "Kai", "Zhi", "Dao",  "Yun",  "Shou", "Ping",
                                "Fu",   "Heng", "Lin",  "Jing", "Yi",   "Zhen", "Sheng", "An"};

struct Rank {
    int level;
    const char* title;
};
constexpr std::array kRanks{Rank{1, "Grand Councillor"},     Rank{2, "Vice Minister"},
                            Rank{2, "Imperial Academy Director"}, Rank{3, "Prefect"},
                            Rank{3, "Imperial Academy Yuanshi"},  Rank{4, "Court Painter"},
                            Rank{4, "County Magistrate"},      Rank{5, "Artisan"},
                            Rank{5, "Painting Academy Student"}};

// Jiangnan provinces weighted up, as in the historical record.
constexpr std::array kProvinceWeights{
    std::pair{"jiangsu", 9}, std::pair{"zhejiang", 8}, std::pair{"anhui", 3},
    std::pair{"jiangxi", 2}, std::pair{"fujian", 2},   std::pair{"henan", 3},
    std::pair{"shaanxi", 2}, std::pair{"shandong", 2}, std::pair{"hebei", 2},
    std::pair{"sichuan", 2}, std::pair{"beijing", 2},  std::pair{"hubei", 1},
    std::pair{"hunan", 1},   std::pair{"guangdong", 1}, std::pair{"shanxi", 1},
    std::pair{"shanghai", 1}, std::pair{"yunnan", 1}};

std::string pick_province(detail::Rng& rng) {
    int total = 0;
    for (const auto& [_, w] : kProvinceWeights) total += w;
    auto r = rng.between(0, total - 1);
    for (const auto& [code, w] : kProvinceWeights) {
        if (r < w) return code;
        r -= w;
    }
    return kProvinceWeights.front().first;
}

std::string make_name(detail::Rng& rng) {
    std::string name = rng.pick(kSurnames);
    name += ' ';
    name += rng.pick(kSyllables);
    if (rng.chance(0.5)) {
        std::string second = rng.pick(kSyllables);
        second[0] = static_cast<char>(second[0] - 'A' + 'a');
        name += second;
    }
    return name;
}

std::string padded_id(int i, int width) {
    auto s = std::to_string(i);
    return "p" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

Corpus generate_fixture(std::uint64_t seed, int n, YearRange era) {
    n = std::clamp(n, 1, 100000);
    if (era.first > era.last) std::swap(era.first, era.last);
    if (era.first == era.last) ++era.last;

    detail::Rng rng(seed);
    const auto& taxonomy = bundled_taxonomy();
    std::vector<std::string> label_ids;
    for (const auto& node : taxonomy.nodes()) label_ids.push_back(node.id);

    std::vector<int> births(static_cast<std::size_t>(n));
    for (auto& b : births) b = static_cast<int>(rng.between(era.first, era.last));
    std::sort(births.begin(), births.end());

    const int width = static_cast<int>(std::to_string(n).size());
    CorpusDocument doc;
    doc.painters.reserve(births.size());
    std::vector<std::vector<std::size_t>> masters(births.size());

    for (std::size_t i = 0; i < births.size(); ++i) {
        Painter p;
        p.id = padded_id(static_cast<int>(i + 1), width);
        p.name = make_name(rng);
        p.birth_year = births[i];
        if (rng.chance(0.85)) p.death_year = births[i] + static_cast<int>(rng.between(30, 85));
        p.dynasty = std::string(dynasty_for_year(births[i] + 20));
        if (rng.chance(0.95)) p.province = pick_province(rng);
        if (rng.chance(0.45)) {
            const auto& r = rng.pick(kRanks);
            p.official_position = r.title;
            p.official_level = r.level;
        }

        // Masters: strictly earlier births only, so the graph is acyclic by construction.
        const auto earliest = std::lower_bound(births.begin(), births.end(), births[i] - 80) - births.begin();
        const auto strictly_before = std::lower_bound(births.begin(), births.end(), births[i]) - births.begin();
        const auto latest = std::upper_bound(births.begin(), births.end(), births[i] - 12) - births.begin();
        std::vector<std::size_t>& mine = masters[i];
        if (strictly_before > 0 && rng.chance(0.75)) {
            // Copy a peer's master set now and then so logic units get several members.
            bool copied = false;
            if (rng.chance(0.35)) {
                for (int attempt = 0; attempt < 4 && !copied; ++attempt) {
                    auto peer = static_cast<std::size_t>(rng.between(earliest, static_cast<std::int64_t>(strictly_before) - 1));
                    if (peer >= i || masters[peer].empty()) continue;
                    bool ok = std::all_of(masters[peer].begin(), masters[peer].end(),
                                          [&](std::size_t m) { return births[m] < births[i]; });
                    if (ok) {
                        mine = masters[peer];
                        copied = true;
                    }
                }
            }
            if (!copied) {
                std::int64_t lo = earliest;
                std::int64_t hi = latest - 1;
                if (hi < lo) {
                    lo = std::lower_bound(births.begin(), births.end(), births[i] - 150) - births.begin();
                    hi = static_cast<std::int64_t>(strictly_before) - 1;
                }
                if (hi >= lo) {
                    const double r = rng.unit();
                    const int want = r < 0.6 ? 1 : (r < 0.9 ? 2 : 3);
                    for (int k = 0; k < want; ++k) {
                        auto m = static_cast<std::size_t>(rng.between(lo, hi));
                        if (std::find(mine.begin(), mine.end(), m) == mine.end()) mine.push_back(m);
                    }
                    std::sort(mine.begin(), mine.end());
                }
            }
        }

        // Labels: inherited from masters with some probability, plus own picks.
        std::vector<std::string> labels;
        for (auto m : mine) {
            for (const auto& l : doc.painters[m].raw_labels) {
                if (rng.chance(0.4)) labels.push_back(l.label_id);
            }
        }
        if (rng.chance(0.95)) {
            const auto own = rng.between(1, 3);
            for (int k = 0; k < own; ++k) labels.push_back(rng.pick(label_ids));
        }
        std::vector<std::string> unique;
        for (auto& l : labels) {
            if (std::find(unique.begin(), unique.end(), l) == unique.end()) unique.push_back(l);
        }
        std::string bio = p.name + " (b. " + std::to_string(births[i]) + ")";
        if (!p.province.empty()) bio += " of " + geo::bundled_geography().require(p.province).name;
        bio += ".";
        for (const auto& l : unique) {
            std::string span = "excelled at " + taxonomy.require(l).name;
            bio += " " + span + ".";
            p.raw_labels.push_back({l, span});
        }
        p.biography = std::move(bio);
        doc.painters.push_back(std::move(p));
    }

    for (std::size_t i = 0; i < masters.size(); ++i) {
        for (auto m : masters[i]) {
            doc.relations.push_back({doc.painters[i].id, doc.painters[m].id,
                                     rng.chance(0.85) ? RelationKind::master : RelationKind::imitation});
        }
    }
    // Metadata-only relations between near contemporaries.
    for (std::size_t i = 1; i < births.size(); ++i) {
        if (!rng.chance(0.12)) continue;
        const auto lo = std::lower_bound(births.begin(), births.end(), births[i] - 15) - births.begin();
        auto j = static_cast<std::size_t>(rng.between(lo, static_cast<std::int64_t>(i) - 1));
        if (j == i) continue;
        doc.relations.push_back({doc.painters[i].id, doc.painters[j].id,
                                 rng.chance(0.7) ? RelationKind::friendship : RelationKind::kinship});
    }

    doc.meta = {{"generator", "atlas-fixture"},
                {"seed", seed},
                {"n", n},
                {"era", {era.first, era.last}},
                {"taxonomy_ref", "bundled"},
                {"geography_ref", "bundled"}};
    return Corpus::build(std::move(doc));
}

}  // namespace atlas::corpus
