#pragma once

// Painter data model, corpus loading/validation/persistence and the
// deterministic synthetic fixture generator.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace atlas {

class LabelTaxonomy;

namespace corpus {

struct RawLabel {
    std::string label_id;
    std::string source_text_span;

    bool operator==(const RawLabel&) const = default;
};

struct Painter {
    std::string id;
    std::string name;
    std::optional<int> birth_year;
    std::optional<int> death_year;
    std::string dynasty;
    std::string province;
    std::optional<std::string> official_position;
    std::optional<int> official_level;  // 1..5
    std::string biography;
    std::vector<RawLabel> raw_labels;
    nlohmann::json extra = nlohmann::json::object();  // unknown keys, kept verbatim

    bool operator==(const Painter&) const = default;
};

enum class RelationKind { master, imitation, kinship, friendship };

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> relation_kind_from_string(std::string_view s);

struct Relation {
    std::string apprentice_id;
    std::string master_id;
    RelationKind kind = RelationKind::master;
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const Relation&) const = default;
};

// Raw, unvalidated document contents.
struct CorpusDocument {
    std::vector<Painter> painters;
    std::vector<Relation> relations;
    nlohmann::json meta = nlohmann::json::object();
    nlohmann::json extra = nlohmann::json::object();

    bool operator==(const CorpusDocument&) const = default;
};

using InheritanceKinds = std::set<RelationKind>;

inline InheritanceKinds default_inheritance_kinds() {
    return {RelationKind::master, RelationKind::imitation};
}

// Validated, indexed, immutable snapshot of a corpus.
class Corpus {
public:
    // Validates and indexes; throws ValidationError listing every violation.
    static Corpus build(CorpusDocument doc, InheritanceKinds kinds = default_inheritance_kinds());

    const CorpusDocument& document() const noexcept { return doc_; }
    const std::vector<Painter>& painters() const noexcept { return doc_.painters; }
    const std::vector<Relation>& relations() const noexcept { return doc_.relations; }
    std::size_t size() const noexcept { return doc_.painters.size(); }

    const Painter& painter(std::size_t index) const { return doc_.painters.at(index); }
    std::optional<std::size_t> index_of(std::string_view id) const;
    // Throws NotFoundError.
    std::size_t require_index(std::string_view id) const;

    const InheritanceKinds& inheritance_kinds() const noexcept { return kinds_; }
    // Masters / apprentices along inheritance-kind edges, as sorted painter indices.
    const std::vector<std::size_t>& masters_of(std::size_t index) const { return masters_.at(index); }
    const std::vector<std::size_t>& apprentices_of(std::size_t index) const { return apprentices_.at(index); }
    // Painter indices, every master before its apprentices.
    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

    // Birth year, or its estimate when absent (see estimated_birth()).
    int effective_birth(std::size_t index) const { return effective_birth_.at(index); }
    bool birth_estimated(std::size_t index) const { return estimated_.at(index) != 0; }

    std::string taxonomy_ref() const;
    std::string geography_ref() const;

    // Monotone edit counter; a new snapshot id is issued for every built corpus.
    std::uint64_t version() const noexcept { return version_; }
    std::uint64_t snapshot_id() const noexcept { return snapshot_id_; }

    const std::optional<std::filesystem::path>& source_path() const noexcept { return source_; }
    void set_source_path(std::filesystem::path p) { source_ = std::move(p); }

private:
    Corpus() = default;

    CorpusDocument doc_;
    InheritanceKinds kinds_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> masters_;
    std::vector<std::vector<std::size_t>> apprentices_;
    std::vector<std::size_t> topo_;
    std::vector<int> effective_birth_;
    std::vector<char> estimated_;
    std::uint64_t version_ = 0;
    std::uint64_t snapshot_id_ = 0;
    std::optional<std::filesystem::path> source_;

    friend struct CorpusEditor;
};

struct DynastyRange {
    std::string_view code;
    int start;
    int end;
};

// Bundled dynasty table used for year estimation and fixture generation.
std::span<const DynastyRange> dynasty_table();
std::optional<DynastyRange> find_dynasty(std::string_view code);
// Dynasty whose range contains the year (latest start wins on overlap).
std::string_view dynasty_for_year(int year);

// JSON <-> document. parse_document throws ParseError on malformed input.
CorpusDocument parse_document(const nlohmann::json& j);
nlohmann::json to_json(const CorpusDocument& doc);

Corpus load_corpus(const std::filesystem::path& path,
                   InheritanceKinds kinds = default_inheritance_kinds());
Corpus corpus_from_json(const nlohmann::json& j,
                        InheritanceKinds kinds = default_inheritance_kinds());
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct YearRange {
    int first = 900;
    int last = 1900;
};

Corpus generate_fixture(std::uint64_t seed, int n, YearRange era);

enum class LabelEditKind { add, remove, retext };

struct LabelEdit {
    LabelEditKind kind = LabelEditKind::add;
    std::string label_id;
    std::string source_text_span;
};

std::optional<LabelEditKind> label_edit_kind_from_string(std::string_view s);

struct LabelEditResult {
    Corpus corpus;
    std::vector<std::string> warnings;
};

// Returns a new snapshot (version + 1). When the corpus has a backing file the
// document is rewritten and the edit appended to "<file>.edits.jsonl".
LabelEditResult update_painter_labels(const Corpus& corpus, std::string_view painter_id,
                                      std::span<const LabelEdit> edits,
                                      const LabelTaxonomy& taxonomy);

}  // namespace corpus
}  // namespace atlas
