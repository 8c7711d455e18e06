#pragma once

// Closed-loop exploration state: boolean selection log with undo/redo,
// cohorts, per-view aggregates and recommendation runs.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "atlas/corpus.hpp"
#include "atlas/geography.hpp"
#include "atlas/importance.hpp"
#include "atlas/label_stats.hpp"
#include "atlas/lineage.hpp"
#include "atlas/recommender.hpp"
#include "atlas/similarity_table.hpp"
#include "atlas/taxonomy.hpp"

namespace atlas::explore {

// Immutable data a session reads. Label edits produce a new Workspace.
struct Workspace {
    std::shared_ptr<const corpus::Corpus> corpus;
    std::shared_ptr<const LabelTaxonomy> taxonomy;
    std::shared_ptr<const geo::Geography> geography;
    std::shared_ptr<const ArtisticSimilarityTable> ast;
    std::shared_ptr<const std::vector<LabelWeights>> importances;
    rec::RecommenderConfig recommender{};

    rec::RecommenderContext recommender_context() const {
        return {*corpus, *geography, *ast, *importances, recommender};
    }
};

// Computes importances for the corpus.
std::shared_ptr<const Workspace> make_workspace(corpus::Corpus corpus, LabelTaxonomy taxonomy,
                                                geo::Geography geography, ArtisticSimilarityTable ast);
// Same taxonomy/geography/AST over an edited corpus.
std::shared_ptr<const Workspace> with_corpus(const Workspace& ws, corpus::Corpus corpus);

enum class Op { OR, AND, NOT };
std::string_view to_string(Op op);
std::optional<Op> op_from_string(std::string_view s);
// Stable texture codes the UI overlays per operator.
std::string_view texture(Op op);

struct Predicate {
    std::string kind;  // labels | provinces | dynasties | years | levels | units | clusters | painters
    nlohmann::json params = nlohmann::json::object();

    bool operator==(const Predicate&) const = default;
};

Predicate predicate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Predicate& p);

using PainterSet = std::vector<std::string>;  // sorted painter ids

// Throws ValidationError listing every bad field.
PainterSet evaluate(const Predicate& p, const Workspace& ws, const lineage::InheritanceForest& forest);

PainterSet combine(Op op, const PainterSet& current, const PainterSet& extent);

struct SelectionStep {
    Op op = Op::OR;
    Predicate predicate;
    PainterSet extent;  // frozen at application time

    bool operator==(const SelectionStep&) const = default;
};

class SelectionLog {
public:
    const std::vector<SelectionStep>& steps() const noexcept { return steps_; }
    std::size_t cursor() const noexcept { return cursor_; }
    // Drops the redo tail. The first live step always acts as OR.
    void push(SelectionStep step);
    // Throws ValidationError("nothing to undo" / "nothing to redo").
    void undo();
    void redo();
    // Fold of steps[0..cursor) from the empty set.
    PainterSet replay() const;

    static SelectionLog restore(std::vector<SelectionStep> steps, std::size_t cursor);

private:
    std::vector<SelectionStep> steps_;
    std::size_t cursor_ = 0;
};

struct CohortSummary {
    std::vector<std::string> top_labels;
    int year_first = 0;
    int year_last = 0;
    std::vector<std::string> dominant_provinces;
    std::optional<int> dominant_level;
};

struct Cohort {
    std::string id;
    std::string name;
    std::string color;
    PainterSet painters;
    std::vector<std::string> labels;
    CohortSummary summary;
};

CohortSummary summarize(const Workspace& ws, const PainterSet& painters);

struct SessionParams {
    double theta = lineage::kDefaultTheta;
    std::optional<std::size_t> lod;
    int min_count = 1;
};

struct ForestEdit {
    std::string unit;
    std::optional<std::string> new_parent;
};

// Aggregates over an arbitrary painter set.
nlohmann::json geo_aggregate(const Workspace& ws, const PainterSet& selected);
nlohmann::json identity_aggregate(const Workspace& ws, const PainterSet& selected);

// Not thread-safe; owners serialize access.
class Session {
public:
    Session(std::string id, std::shared_ptr<const Workspace> ws, SessionParams params = {});

    const std::string& id() const noexcept { return id_; }
    std::uint64_t version() const noexcept { return version_; }
    const Workspace& workspace() const noexcept { return *ws_; }
    // Swaps in a newer corpus snapshot; selection and cohorts are id-based and survive.
    void rebind(std::shared_ptr<const Workspace> ws);

    const SessionParams& params() const noexcept { return params_; }
    void set_theta(double theta);
    void set_lod(std::optional<std::size_t> lod);
    void set_min_count(int min_count);
    const rec::Beta& beta() const noexcept { return beta_; }
    void set_beta(const rec::Beta& beta);

    const lineage::InheritanceForest& forest();
    void reassign(std::string unit, std::optional<std::string> new_parent);
    const std::vector<ForestEdit>& forest_edits() const noexcept { return edits_; }

    const SelectionLog& log() const noexcept { return log_; }
    const PainterSet& selection() const noexcept { return selection_; }
    const PainterSet& apply(Op op, const Predicate& predicate);
    const PainterSet& undo();
    const PainterSet& redo();

    nlohmann::json geo_view() const { return geo_aggregate(*ws_, selection_); }
    nlohmann::json identity_view() const { return identity_aggregate(*ws_, selection_); }
    nlohmann::json label_view(std::span<const Dimension> order, std::optional<int> min_count, LabelViewMode mode);

    const Cohort& create_cohort(std::string name, std::string color, std::vector<std::string> labels);
    const std::vector<Cohort>& cohorts() const noexcept { return cohorts_; }
    const Cohort& cohort(std::string_view id) const;
    void delete_cohort(std::string_view id);
    nlohmann::json compare_cohorts(std::span<const std::string> ids);

    // Selection is the potential cohort; stores the result on the session.
    nlohmann::json run_recommendation(std::optional<rec::Beta> beta = std::nullopt);
    const nlohmann::json& last_recommendation() const noexcept { return last_recommendation_; }

    nlohmann::json describe() const;
    nlohmann::json snapshot() const;
    static Session restore(const nlohmann::json& j, std::shared_ptr<const Workspace> ws);

private:
    std::string id_;
    std::shared_ptr<const Workspace> ws_;
    SessionParams params_;
    rec::Beta beta_ = rec::kUniformBeta;
    SelectionLog log_;
    PainterSet selection_;
    std::vector<Cohort> cohorts_;
    std::size_t next_cohort_ = 1;
    std::vector<ForestEdit> edits_;
    nlohmann::json last_recommendation_ = nullptr;
    std::uint64_t version_ = 0;

    std::shared_ptr<const lineage::InheritanceForest> forest_;
    std::uint64_t forest_snapshot_ = 0;
};

nlohmann::json to_json(const Cohort& c);

}  // namespace atlas::explore
