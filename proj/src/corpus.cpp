#include "atlas/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <queue>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas::corpus {

namespace {

std::atomic<std::uint64_t> g_next_snapshot{1};

constexpr DynastyRange kDynasties[] = {
    {"han", -206, 220},
    {"three-kingdoms", 220, 280},
    {"jin", 266, 420},
    {"southern-northern", 420, 589},
    {"sui", 581, 618},
    {"tang", 618, 907},
    {"five-dynasties", 907, 979},
    {"song", 960, 1279},
    {"yuan", 1271, 1368},
    {"ming", 1368, 1644},
    {"qing", 1644, 1912},
};

constexpr int kApprenticeGap = 30;

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

nlohmann::json optional_json(const auto& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

Painter parse_painter(const nlohmann::json& j) {
    static const std::set<std::string> kKnown{"id",       "name",          "birth_year",
                                              "death_year", "dynasty",     "province",
                                              "official_position", "official_level",
                                              "biography", "raw_labels"};
    if (!j.is_object()) throw ParseError("painter entry is not an object");
    Painter p;
    p.id = j.at("id").get<std::string>();
    p.name = j.value("name", std::string{});
    p.birth_year = optional_field<int>(j, "birth_year");
    p.death_year = optional_field<int>(j, "death_year");
    p.dynasty = j.value("dynasty", std::string{});
    p.province = j.value("province", std::string{});
    p.official_position = optional_field<std::string>(j, "official_position");
    p.official_level = optional_field<int>(j, "official_level");
    p.biography = j.value("biography", std::string{});
    if (j.contains("raw_labels")) {
        for (const auto& l : j.at("raw_labels")) {
            p.raw_labels.push_back(
                {l.at("label_id").get<std::string>(), l.value("source_text_span", std::string{})});
        }
    }
    for (const auto& [k, v] : j.items()) {
        if (!kKnown.contains(k)) p.extra[k] = v;
    }
    return p;
}

Relation parse_relation(const nlohmann::json& j) {
    static const std::set<std::string> kKnown{"apprentice_id", "master_id", "kind"};
    Relation r;
    r.apprentice_id = j.at("apprentice_id").get<std::string>();
    r.master_id = j.at("master_id").get<std::string>();
    const auto kind = j.value("kind", std::string("master"));
    auto k = relation_kind_from_string(kind);
    if (!k) throw ParseError("unknown relation kind '" + kind + "'");
    r.kind = *k;
    for (const auto& [key, v] : j.items()) {
        if (!kKnown.contains(key)) r.extra[key] = v;
    }
    return r;
}

}  // namespace

std::string_view to_string(RelationKind kind) {
    switch (kind) {
        case RelationKind::master: return "master";
        case RelationKind::imitation: return "imitation";
        case RelationKind::kinship: return "kinship";
        case RelationKind::friendship: return "friendship";
    }
    return "master";
}

std::optional<RelationKind> relation_kind_from_string(std::string_view s) {
    for (auto k : {RelationKind::master, RelationKind::imitation, RelationKind::kinship,
                   RelationKind::friendship}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::span<const DynastyRange> dynasty_table() { return kDynasties; }

std::optional<DynastyRange> find_dynasty(std::string_view code) {
    for (const auto& d : kDynasties) {
        if (d.code == code) return d;
    }
    return std::nullopt;
}

std::string_view dynasty_for_year(int year) {
    std::string_view best = kDynasties[0].code;
    for (const auto& d : kDynasties) {
        if (d.start <= year) best = d.code;
    }
    return best;
}

CorpusDocument parse_document(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("corpus: top level must be an object");
    CorpusDocument doc;
    std::string where = "corpus";
    try {
        const auto& painters = j.at("painters");
        for (std::size_t i = 0; i < painters.size(); ++i) {
            where = "painters[" + std::to_string(i) + "]";
            doc.painters.push_back(parse_painter(painters[i]));
        }
        if (j.contains("relations")) {
            const auto& relations = j.at("relations");
            for (std::size_t i = 0; i < relations.size(); ++i) {
                where = "relations[" + std::to_string(i) + "]";
                doc.relations.push_back(parse_relation(relations[i]));
            }
        }
        if (j.contains("meta")) doc.meta = j.at("meta");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    for (const auto& [k, v] : j.items()) {
        if (k != "painters" && k != "relations" && k != "meta") doc.extra[k] = v;
    }
    return doc;
}

nlohmann::json to_json(const CorpusDocument& doc) {
    nlohmann::json out = doc.extra.is_object() ? doc.extra : nlohmann::json::object();
    nlohmann::json painters = nlohmann::json::array();
    for (const auto& p : doc.painters) {
        nlohmann::json pj = p.extra.is_object() ? p.extra : nlohmann::json::object();
        pj["id"] = p.id;
        pj["name"] = p.name;
        pj["birth_year"] = optional_json(p.birth_year);
        pj["death_year"] = optional_json(p.death_year);
        pj["dynasty"] = p.dynasty;
        pj["province"] = p.province;
        pj["official_position"] = optional_json(p.official_position);
        pj["official_level"] = optional_json(p.official_level);
        pj["biography"] = p.biography;
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& l : p.raw_labels) {
            labels.push_back({{"label_id", l.label_id}, {"source_text_span", l.source_text_span}});
        }
        pj["raw_labels"] = labels;
        painters.push_back(std::move(pj));
    }
    nlohmann::json relations = nlohmann::json::array();
    for (const auto& r : doc.relations) {
        nlohmann::json rj = r.extra.is_object() ? r.extra : nlohmann::json::object();
        rj["apprentice_id"] = r.apprentice_id;
        rj["master_id"] = r.master_id;
        rj["kind"] = to_string(r.kind);
        relations.push_back(std::move(rj));
    }
    out["painters"] = std::move(painters);
    out["relations"] = std::move(relations);
    out["meta"] = doc.meta;
    return out;
}

Corpus Corpus::build(CorpusDocument doc, InheritanceKinds kinds) {
    Corpus c;
    c.doc_ = std::move(doc);
    c.kinds_ = std::move(kinds);
    std::vector<std::string> problems;

    const auto n = c.doc_.painters.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = c.doc_.painters[i];
        if (p.id.empty()) problems.push_back("painter #" + std::to_string(i) + ": empty id");
        if (!c.index_.emplace(p.id, i).second) problems.push_back("duplicate id '" + p.id + "'");
        if (p.birth_year && p.death_year && *p.birth_year > *p.death_year) {
            problems.push_back("painter '" + p.id + "': birth_year > death_year");
        }
        if (p.official_level && (*p.official_level < 1 || *p.official_level > 5)) {
            problems.push_back("painter '" + p.id + "': official_level outside 1..5");
        }
    }

    c.masters_.assign(n, {});
    c.apprentices_.assign(n, {});
    for (const auto& r : c.doc_.relations) {
        if (r.apprentice_id == r.master_id) {
            problems.push_back("self relation on '" + r.apprentice_id + "'");
            continue;
        }
        auto a = c.index_.find(r.apprentice_id);
        auto m = c.index_.find(r.master_id);
        if (a == c.index_.end() || m == c.index_.end()) {
            problems.push_back("dangling relation endpoint " + r.apprentice_id + " -> " + r.master_id);
            continue;
        }
        if (!c.kinds_.contains(r.kind)) continue;
        c.masters_[a->second].push_back(m->second);
        c.apprentices_[m->second].push_back(a->second);
    }
    for (auto* adj : {&c.masters_, &c.apprentices_}) {
        for (auto& v : *adj) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }

    // Kahn, masters first, lowest index among ready painters.
    std::vector<std::size_t> pending(n);
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = c.masters_[i].size();
        if (pending[i] == 0) ready.push(i);
    }
    while (!ready.empty()) {
        auto i = ready.top();
        ready.pop();
        c.topo_.push_back(i);
        for (auto a : c.apprentices_[i]) {
            if (--pending[a] == 0) ready.push(a);
        }
    }
    if (c.topo_.size() != n) {
        std::string who;
        for (std::size_t i = 0; i < n && who.size() < 200; ++i) {
            if (pending[i] > 0) who += (who.empty() ? "" : ", ") + c.doc_.painters[i].id;
        }
        problems.push_back("inheritance cycle among {" + who + "}");
    }

    if (!problems.empty()) throw ValidationError(problems);

    // Year estimation for painters without a birth year.
    std::vector<int> known;
    for (const auto& p : c.doc_.painters) {
        if (p.birth_year) known.push_back(*p.birth_year);
    }
    std::sort(known.begin(), known.end());
    const int fallback = known.empty() ? 1000 : known[known.size() / 2];

    c.effective_birth_.assign(n, 0);
    c.estimated_.assign(n, 0);
    for (auto i : c.topo_) {
        const auto& p = c.doc_.painters[i];
        if (p.birth_year) {
            c.effective_birth_[i] = *p.birth_year;
            continue;
        }
        c.estimated_[i] = 1;
        if (!c.masters_[i].empty()) {
            int latest = c.effective_birth_[c.masters_[i].front()];
            for (auto m : c.masters_[i]) latest = std::max(latest, c.effective_birth_[m]);
            c.effective_birth_[i] = latest + kApprenticeGap;
        } else if (auto d = find_dynasty(p.dynasty)) {
            c.effective_birth_[i] = (d->start + d->end) / 2;
        } else if (p.death_year) {
            c.effective_birth_[i] = *p.death_year - 50;
        } else {
            c.effective_birth_[i] = fallback;
        }
    }

    c.snapshot_id_ = g_next_snapshot.fetch_add(1);
    return c;
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Corpus::require_index(std::string_view id) const {
    if (auto i = index_of(id)) return *i;
    throw NotFoundError("unknown painter '" + std::string(id) + "'");
}

std::string Corpus::taxonomy_ref() const {
    return doc_.meta.is_object() ? doc_.meta.value("taxonomy_ref", std::string("bundled"))
                                 : std::string("bundled");
}

std::string Corpus::geography_ref() const {
    return doc_.meta.is_object() ? doc_.meta.value("geography_ref", std::string("bundled"))
                                 : std::string("bundled");
}

Corpus corpus_from_json(const nlohmann::json& j, InheritanceKinds kinds) {
    return Corpus::build(parse_document(j), std::move(kinds));
}

Corpus load_corpus(const std::filesystem::path& path, InheritanceKinds kinds) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    auto c = corpus_from_json(j, std::move(kinds));
    c.set_source_path(path);
    return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write corpus file " + path.string());
    out << to_json(corpus.document()).dump(2) << '\n';
}

std::optional<LabelEditKind> label_edit_kind_from_string(std::string_view s) {
    if (s == "add") return LabelEditKind::add;
    if (s == "remove") return LabelEditKind::remove;
    if (s == "retext") return LabelEditKind::retext;
    return std::nullopt;
}

struct CorpusEditor {
    static Corpus next_snapshot(const Corpus& base, CorpusDocument doc) {
        auto c = Corpus::build(std::move(doc), base.kinds_);
        c.version_ = base.version_ + 1;
        c.source_ = base.source_;
        return c;
    }
};

LabelEditResult update_painter_labels(const Corpus& corpus, std::string_view painter_id,
                                      std::span<const LabelEdit> edits,
                                      const LabelTaxonomy& taxonomy) {
    const auto idx = corpus.require_index(painter_id);
    for (const auto& e : edits) {
        if (e.kind == LabelEditKind::add && !taxonomy.contains(e.label_id)) {
            throw NotFoundError("unknown label id '" + e.label_id + "'");
        }
    }

    CorpusDocument doc = corpus.document();
    auto& labels = doc.painters[idx].raw_labels;
    std::vector<std::string> warnings;
    auto find = [&](const std::string& id) {
        return std::find_if(labels.begin(), labels.end(),
                            [&](const RawLabel& l) { return l.label_id == id; });
    };
    for (const auto& e : edits) {
        auto it = find(e.label_id);
        switch (e.kind) {
            case LabelEditKind::add:
                if (it != labels.end()) {
                    warnings.push_back("label '" + e.label_id + "' already present");
                } else {
                    labels.push_back({e.label_id, e.source_text_span});
                }
                break;
            case LabelEditKind::remove:
                if (it == labels.end()) {
                    warnings.push_back("label '" + e.label_id + "' not present; nothing removed");
                } else {
                    labels.erase(std::remove_if(labels.begin(), labels.end(),
                                                [&](const RawLabel& l) { return l.label_id == e.label_id; }),
                                 labels.end());
                }
                break;
            case LabelEditKind::retext:
                if (it == labels.end()) {
                    warnings.push_back("label '" + e.label_id + "' not present; nothing retexted");
                } else {
                    it->source_text_span = e.source_text_span;
                }
                break;
        }
    }

    LabelEditResult result{CorpusEditor::next_snapshot(corpus, std::move(doc)), std::move(warnings)};

    if (const auto& path = result.corpus.source_path()) {
        save_corpus(result.corpus, *path);
        std::ofstream log(path->string() + ".edits.jsonl", std::ios::app);
        nlohmann::json entry{{"version", result.corpus.version()},
                             {"painter_id", std::string(painter_id)},
                             {"warnings", result.warnings}};
        nlohmann::json ej = nlohmann::json::array();
        for (const auto& e : edits) {
            ej.push_back({{"op", e.kind == LabelEditKind::add      ? "add"
                                 : e.kind == LabelEditKind::remove ? "remove"
                                                                   : "retext"},
                          {"label_id", e.label_id},
                          {"source_text_span", e.source_text_span}});
        }
        entry["edits"] = std::move(ej);
        log << entry.dump() << '\n';
    }
    return result;
}

}  // namespace atlas::corpus
