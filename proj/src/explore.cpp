#include "atlas/explore.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <regex>
#include <set>
#include <stdexcept>

#include "atlas/error.hpp"

namespace atlas::explore {

std::shared_ptr<const Workspace> make_workspace(corpus::Corpus corpus, LabelTaxonomy taxonomy,
                                                geo::Geography geography, ArtisticSimilarityTable ast) {
    auto ws = std::make_shared<Workspace>();
    ws->importances = std::make_shared<const std::vector<LabelWeights>>(compute_all_importance(corpus));
    ws->corpus = std::make_shared<const corpus::Corpus>(std::move(corpus));
    ws->taxonomy = std::make_shared<const LabelTaxonomy>(std::move(taxonomy));
    ws->geography = std::make_shared<const geo::Geography>(std::move(geography));
    ws->ast = std::make_shared<const ArtisticSimilarityTable>(std::move(ast));
    return ws;
}

std::shared_ptr<const Workspace> with_corpus(const Workspace& ws, corpus::Corpus corpus) {
    auto out = std::make_shared<Workspace>(ws);
    out->importances = std::make_shared<const std::vector<LabelWeights>>(compute_all_importance(corpus));
    out->corpus = std::make_shared<const corpus::Corpus>(std::move(corpus));
    return out;
}

std::string_view to_string(Op op) {
    switch (op) {
        case Op::OR: return "OR";
        case Op::AND: return "AND";
        case Op::NOT: return "NOT";
    }
    return "OR";
}

std::optional<Op> op_from_string(std::string_view s) {
    if (s == "OR" || s == "or") return Op::OR;
    if (s == "AND" || s == "and") return Op::AND;
    if (s == "NOT" || s == "not") return Op::NOT;
    return std::nullopt;
}

std::string_view texture(Op op) {
    switch (op) {
        case Op::OR: return "slash";
        case Op::AND: return "dot";
        case Op::NOT: return "grid";
    }
    return "slash";
}

Predicate predicate_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("predicate must be an object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ValidationError("predicate.kind must be a string");
    Predicate p;
    p.kind = j["kind"].get<std::string>();
    p.params = j;
    p.params.erase("kind");
    return p;
}

nlohmann::json to_json(const Predicate& p) {
    auto j = p.params;
    j["kind"] = p.kind;
    return j;
}

namespace {

// Non-empty array of strings under `key`, or a violation.
std::vector<std::string> string_list(const nlohmann::json& params, const char* key, std::vector<std::string>& errors) {
    std::vector<std::string> out;
    if (!params.contains(key) || !params[key].is_array() || params[key].empty()) {
        errors.push_back(std::string("predicate.") + key + " must be a non-empty array");
        return out;
    }
    for (const auto& v : params[key]) {
        if (!v.is_string()) {
            errors.push_back(std::string("predicate.") + key + " entries must be strings");
            return {};
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

PainterSet sorted_ids(const corpus::Corpus& c, const std::vector<bool>& mask) {
    PainterSet out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (mask[i]) out.push_back(c.painter(i).id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> indices_of(const corpus::Corpus& c, const PainterSet& ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(c.require_index(id));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

PainterSet evaluate(const Predicate& p, const Workspace& ws, const lineage::InheritanceForest& forest) {
    const auto& c = *ws.corpus;
    std::vector<std::string> errors;
    std::vector<bool> mask(c.size(), false);

    if (p.kind == "labels") {
        std::set<std::string> closed;
        for (const auto& l : string_list(p.params, "labels", errors)) {
            if (!ws.taxonomy->contains(l)) {
                errors.push_back("predicate.labels: unknown label id '" + l + "'");
                continue;
            }
            for (auto& d : ws.taxonomy->closure(l)) closed.insert(std::move(d));
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            for (const auto& l : own_labels(c.painter(i))) {
                if (closed.contains(l)) mask[i] = true;
            }
        }
    } else if (p.kind == "provinces") {
        std::set<std::string> wanted;
        for (const auto& code : string_list(p.params, "provinces", errors)) {
            if (!ws.geography->find(code)) errors.push_back("predicate.provinces: unknown province code '" + code + "'");
            wanted.insert(code);
        }
        for (std::size_t i = 0; i < c.size(); ++i) mask[i] = wanted.contains(c.painter(i).province);
    } else if (p.kind == "dynasties") {
        std::set<std::string> wanted;
        for (const auto& code : string_list(p.params, "dynasties", errors)) {
            if (!corpus::find_dynasty(code)) errors.push_back("predicate.dynasties: unknown dynasty '" + code + "'");
            wanted.insert(code);
        }
        for (std::size_t i = 0; i < c.size(); ++i) mask[i] = wanted.contains(c.painter(i).dynasty);
    } else if (p.kind == "years") {
        const auto& ps = p.params;
        const bool ok_from = ps.contains("from") && ps["from"].is_number_integer();
        const bool ok_to = ps.contains("to") && ps["to"].is_number_integer();
        if (!ok_from) errors.push_back("predicate.from must be an integer year");
        if (!ok_to) errors.push_back("predicate.to must be an integer year");
        if (ok_from && ok_to) {
            const int from = ps["from"].get<int>(), to = ps["to"].get<int>();
            if (from > to) errors.push_back("predicate.from must not exceed predicate.to");
            for (std::size_t i = 0; i < c.size(); ++i) {
                const int y = c.effective_birth(i);
                mask[i] = y >= from && y <= to;
            }
        }
    } else if (p.kind == "levels") {
        std::set<int> wanted;
        const auto& ps = p.params;
        if (!ps.contains("levels") || !ps["levels"].is_array() || ps["levels"].empty()) {
            errors.push_back("predicate.levels must be a non-empty array");
        } else {
            for (const auto& v : ps["levels"]) {
                if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 5) {
                    errors.push_back("predicate.levels entries must be integers in 1..5");
                    break;
                }
                wanted.insert(v.get<int>());
            }
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto& lvl = c.painter(i).official_level;
            mask[i] = lvl && wanted.contains(*lvl);
        }
    } else if (p.kind == "units") {
        for (const auto& id : string_list(p.params, "units", errors)) {
            auto u = forest.graph.find(id);
            if (!u) {
                errors.push_back("predicate.units: unknown unit '" + id + "'");
                continue;
            }
            for (const auto& m : forest.graph.units[*u].members) {
                if (auto i = c.index_of(m)) mask[*i] = true;
            }
        }
    } else if (p.kind == "clusters") {
        for (const auto& id : string_list(p.params, "clusters", errors)) {
            const auto& cl = forest.partition.clusters;
            auto it = std::find_if(cl.begin(), cl.end(), [&](const lineage::Cluster& k) { return k.id == id; });
            if (it == cl.end()) {
                errors.push_back("predicate.clusters: unknown cluster '" + id + "'");
                continue;
            }
            for (auto u : it->units) {
                for (const auto& m : forest.graph.units[u].members) {
                    if (auto i = c.index_of(m)) mask[*i] = true;
                }
            }
        }
    } else if (p.kind == "painters") {
        for (const auto& id : string_list(p.params, "painters", errors)) {
            auto i = c.index_of(id);
            if (!i) {
                errors.push_back("predicate.painters: unknown painter '" + id + "'");
                continue;
            }
            mask[*i] = true;
        }
    } else {
        errors.push_back("predicate.kind: unknown kind '" + p.kind + "'");
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return sorted_ids(c, mask);
}

PainterSet combine(Op op, const PainterSet& current, const PainterSet& extent) {
    PainterSet out;
    switch (op) {
        case Op::OR:
            std::set_union(current.begin(), current.end(), extent.begin(), extent.end(), std::back_inserter(out));
            break;
        case Op::AND:
            std::set_intersection(current.begin(), current.end(), extent.begin(), extent.end(), std::back_inserter(out));
            break;
        case Op::NOT:
            std::set_difference(current.begin(), current.end(), extent.begin(), extent.end(), std::back_inserter(out));
            break;
    }
    return out;
}

void SelectionLog::push(SelectionStep step) {
    steps_.resize(cursor_);
    if (steps_.empty()) step.op = Op::OR;
    steps_.push_back(std::move(step));
    cursor_ = steps_.size();
}

void SelectionLog::undo() {
    if (cursor_ == 0) throw ValidationError("nothing to undo");
    --cursor_;
}

void SelectionLog::redo() {
    if (cursor_ >= steps_.size()) throw ValidationError("nothing to redo");
    ++cursor_;
}

PainterSet SelectionLog::replay() const {
    PainterSet acc;
    for (std::size_t i = 0; i < cursor_; ++i) {
        acc = combine(i == 0 ? Op::OR : steps_[i].op, acc, steps_[i].extent);
    }
    return acc;
}

SelectionLog SelectionLog::restore(std::vector<SelectionStep> steps, std::size_t cursor) {
    if (cursor > steps.size()) throw ParseError("selection cursor beyond the log");
    SelectionLog log;
    log.steps_ = std::move(steps);
    log.cursor_ = cursor;
    if (!log.steps_.empty()) log.steps_.front().op = Op::OR;
    return log;
}

CohortSummary summarize(const Workspace& ws, const PainterSet& painters) {
    const auto& c = *ws.corpus;
    CohortSummary s;
    std::map<std::string, double> pooled;
    std::map<std::string, int> provinces;
    std::map<int, int> levels;
    bool first = true;
    for (auto i : indices_of(c, painters)) {
        for (const auto& e : ws.importances->at(i).entries) pooled[e.label_id] += e.weight;
        const auto& p = c.painter(i);
        if (!p.province.empty()) ++provinces[p.province];
        if (p.official_level) ++levels[*p.official_level];
        const int y = c.effective_birth(i);
        s.year_first = first ? y : std::min(s.year_first, y);
        s.year_last = first ? y : std::max(s.year_last, y);
        first = false;
    }
    std::vector<std::pair<std::string, double>> labels(pooled.begin(), pooled.end());
    std::stable_sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < labels.size() && i < 5; ++i) s.top_labels.push_back(labels[i].first);

    std::vector<std::pair<std::string, int>> provs(provinces.begin(), provinces.end());
    std::stable_sort(provs.begin(), provs.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < provs.size() && i < 3; ++i) s.dominant_provinces.push_back(provs[i].first);

    int best = 0;
    for (const auto& [lvl, n] : levels) {
        if (n > best) {
            best = n;
            s.dominant_level = lvl;
        }
    }
    return s;
}

nlohmann::json geo_aggregate(const Workspace& ws, const PainterSet& selected) {
    const auto& c = *ws.corpus;
    const std::set<std::string> sel(selected.begin(), selected.end());
    std::map<std::string, std::pair<int, int>> buckets;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& p = c.painter(i);
        auto& b = buckets[p.province.empty() ? std::string("unknown") : p.province];
        ++b.first;
        if (sel.contains(p.id)) ++b.second;
    }
    nlohmann::json provinces = nlohmann::json::array();
    nlohmann::json unknown{{"total", 0}, {"selected", 0}};
    for (const auto& [code, b] : buckets) {
        if (code == "unknown" && !ws.geography->find(code)) {
            unknown = {{"total", b.first}, {"selected", b.second}};
            continue;
        }
        nlohmann::json entry{{"code", code}, {"total", b.first}, {"selected", b.second}};
        if (const auto* prov = ws.geography->find(code)) {
            entry["name"] = prov->name;
            entry["lat"] = prov->lat;
            entry["lon"] = prov->lon;
        }
        provinces.push_back(std::move(entry));
    }
    return {{"provinces", provinces}, {"unknown", unknown}, {"selected_total", selected.size()}};
}

nlohmann::json identity_aggregate(const Workspace& ws, const PainterSet& selected) {
    const auto& c = *ws.corpus;
    const std::set<std::string> sel(selected.begin(), selected.end());
    std::array<std::pair<int, int>, 6> inner{};  // levels 1..5, then unknown
    std::map<std::pair<int, std::string>, std::pair<int, int>> outer;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& p = c.painter(i);
        const std::size_t slot = p.official_level ? static_cast<std::size_t>(*p.official_level - 1) : 5;
        const bool on = sel.contains(p.id);
        ++inner[slot].first;
        if (on) ++inner[slot].second;
        if (p.official_position && !p.official_position->empty()) {
            auto& o = outer[{static_cast<int>(slot) + 1, *p.official_position}];
            ++o.first;
            if (on) ++o.second;
        }
    }
    nlohmann::json in = nlohmann::json::array();
    for (std::size_t k = 0; k < 6; ++k) {
        in.push_back({{"level", k < 5 ? nlohmann::json(k + 1) : nlohmann::json("unknown")},
                      {"total", inner[k].first},
                      {"selected", inner[k].second}});
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, counts] : outer) {
        out.push_back({{"position", key.second},
                       {"level", key.first <= 5 ? nlohmann::json(key.first) : nlohmann::json("unknown")},
                       {"total", counts.first},
                       {"selected", counts.second}});
    }
    return {{"inner", in}, {"outer", out}, {"total", c.size()}, {"selected_total", selected.size()}};
}

Session::Session(std::string id, std::shared_ptr<const Workspace> ws, SessionParams params)
    : id_(std::move(id)), ws_(std::move(ws)), params_(params) {
    set_theta(params.theta);
    set_min_count(params.min_count);
}

void Session::rebind(std::shared_ptr<const Workspace> ws) {
    if (ws == ws_) return;
    ws_ = std::move(ws);
    forest_.reset();
    ++version_;
}

void Session::set_theta(double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in (0, 1]");
    if (theta != params_.theta) {
        params_.theta = theta;
        edits_.clear();
        forest_.reset();
        ++version_;
    }
}

void Session::set_lod(std::optional<std::size_t> lod) {
    if (lod != params_.lod) {
        params_.lod = lod;
        forest_.reset();
        ++version_;
    }
}

void Session::set_min_count(int min_count) {
    if (min_count < 1) throw ValidationError("min_count must be at least 1");
    if (min_count != params_.min_count) {
        params_.min_count = min_count;
        ++version_;
    }
}

void Session::set_beta(const rec::Beta& beta) {
    rec::validate_beta(beta);
    beta_ = beta;
    ++version_;
}

const lineage::InheritanceForest& Session::forest() {
    if (!forest_ || forest_snapshot_ != ws_->corpus->snapshot_id()) {
        auto f = lineage::reconstruct(*ws_->corpus, params_.theta, params_.lod);
        for (const auto& e : edits_) {
            f = lineage::reassign_parent(f, e.unit, e.new_parent ? std::optional<std::string_view>(*e.new_parent) : std::nullopt);
        }
        forest_ = std::make_shared<const lineage::InheritanceForest>(std::move(f));
        forest_snapshot_ = ws_->corpus->snapshot_id();
    }
    return *forest_;
}

void Session::reassign(std::string unit, std::optional<std::string> new_parent) {
    auto f = lineage::reassign_parent(forest(), unit,
                                      new_parent ? std::optional<std::string_view>(*new_parent) : std::nullopt);
    forest_ = std::make_shared<const lineage::InheritanceForest>(std::move(f));
    edits_.push_back({std::move(unit), std::move(new_parent)});
    ++version_;
}

const PainterSet& Session::apply(Op op, const Predicate& predicate) {
    auto extent = evaluate(predicate, *ws_, forest());
    log_.push({op, predicate, std::move(extent)});
    selection_ = log_.replay();
    ++version_;
    return selection_;
}

const PainterSet& Session::undo() {
    log_.undo();
    selection_ = log_.replay();
    ++version_;
    return selection_;
}

const PainterSet& Session::redo() {
    log_.redo();
    selection_ = log_.replay();
    ++version_;
    return selection_;
}

nlohmann::json Session::label_view(std::span<const Dimension> order, std::optional<int> min_count, LabelViewMode mode) {
    if (min_count) set_min_count(*min_count);
    const auto sel = indices_of(*ws_->corpus, selection_);
    std::vector<Dimension> dims(order.begin(), order.end());
    if (dims.empty()) dims.assign(kDimensions.begin(), kDimensions.end());
    try {
        auto combos = label_combinations(*ws_->corpus, *ws_->taxonomy, sel, dims, params_.min_count);
        return {{"mode", mode == LabelViewMode::focus ? "focus" : "context"},
                {"distribution", to_json(label_distribution(*ws_->corpus, *ws_->taxonomy, sel, mode))},
                {"combinations", to_json(combos)}};
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

namespace {

const std::regex kColor("#[0-9a-fA-F]{6}");
constexpr std::array<const char*, 8> kPalette{"#c0392b", "#2e86c1", "#27ae60", "#8e44ad",
                                              "#d68910", "#17a589", "#cb4335", "#5d6d7e"};

}  // namespace

const Cohort& Session::create_cohort(std::string name, std::string color, std::vector<std::string> labels) {
    if (selection_.empty()) throw ValidationError("empty selection");
    if (color.empty()) color = kPalette[(next_cohort_ - 1) % kPalette.size()];
    if (!std::regex_match(color, kColor)) throw ValidationError("color must look like #rrggbb");
    Cohort c;
    c.id = "c" + std::to_string(next_cohort_++);
    c.name = name.empty() ? c.id : std::move(name);
    c.color = std::move(color);
    c.painters = selection_;
    c.labels = std::move(labels);
    c.summary = summarize(*ws_, c.painters);
    cohorts_.push_back(std::move(c));
    ++version_;
    return cohorts_.back();
}

const Cohort& Session::cohort(std::string_view id) const {
    for (const auto& c : cohorts_) {
        if (c.id == id) return c;
    }
    throw NotFoundError("unknown cohort '" + std::string(id) + "'");
}

void Session::delete_cohort(std::string_view id) {
    (void)cohort(id);
    std::erase_if(cohorts_, [&](const Cohort& c) { return c.id == id; });
    ++version_;
}

nlohmann::json Session::compare_cohorts(std::span<const std::string> ids) {
    if (ids.empty()) throw ValidationError("ids must be a non-empty array");
    std::vector<const Cohort*> picked;
    for (const auto& id : ids) picked.push_back(&cohort(id));

    const auto& c = *ws_->corpus;
    const auto& f = forest();
    nlohmann::json head = nlohmann::json::array();
    nlohmann::json geo = nlohmann::json::object();
    nlohmann::json identity = nlohmann::json::object();
    nlohmann::json labels = nlohmann::json::object();
    nlohmann::json mountain = nlohmann::json::object();
    for (const auto* k : picked) {
        head.push_back({{"id", k->id}, {"name", k->name}, {"color", k->color}, {"size", k->painters.size()}});
        geo[k->id] = geo_aggregate(*ws_, k->painters);
        identity[k->id] = identity_aggregate(*ws_, k->painters);
        labels[k->id] = to_json(label_distribution(c, *ws_->taxonomy, indices_of(c, k->painters), LabelViewMode::focus));
        std::map<std::string, int> units, clusters;
        for (const auto& pid : k->painters) {
            if (auto u = f.graph.unit_of_painter(pid)) {
                ++units[f.graph.units[*u].id];
                ++clusters[f.partition.clusters[f.partition.assignment[*u]].id];
            }
        }
        mountain[k->id] = {{"units", units}, {"clusters", clusters}};
    }
    nlohmann::json overlaps = nlohmann::json::array();
    for (std::size_t a = 0; a < picked.size(); ++a) {
        for (std::size_t b = a + 1; b < picked.size(); ++b) {
            PainterSet shared;
            std::set_intersection(picked[a]->painters.begin(), picked[a]->painters.end(), picked[b]->painters.begin(),
                                  picked[b]->painters.end(), std::back_inserter(shared));
            overlaps.push_back({{"a", picked[a]->id}, {"b", picked[b]->id}, {"shared", shared}});
        }
    }
    return {{"cohorts", head}, {"geography", geo}, {"identity", identity},
            {"labels", labels}, {"mountain", mountain}, {"overlaps", overlaps}};
}

nlohmann::json Session::run_recommendation(std::optional<rec::Beta> beta) {
    if (selection_.empty()) throw ValidationError("no potential cohort");
    if (beta) {
        rec::validate_beta(*beta);
        beta_ = *beta;
    }
    const auto result = rec::recommend(ws_->recommender_context(), selection_, beta_);
    last_recommendation_ = rec::to_json(result);
    last_recommendation_["snapshot_version"] = ws_->corpus->version();
    ++version_;
    return last_recommendation_;
}

nlohmann::json to_json(const Cohort& c) {
    nlohmann::json summary{{"top_labels", c.summary.top_labels},
                           {"year_span", {c.summary.year_first, c.summary.year_last}},
                           {"dominant_provinces", c.summary.dominant_provinces}};
    if (c.summary.dominant_level) summary["dominant_level"] = *c.summary.dominant_level;
    return {{"id", c.id}, {"name", c.name}, {"color", c.color}, {"painters", c.painters},
            {"labels", c.labels}, {"summary", summary}};
}

namespace {

nlohmann::json params_json(const SessionParams& p) {
    return {{"theta", p.theta}, {"lod", p.lod ? nlohmann::json(*p.lod) : nlohmann::json(nullptr)}, {"min_count", p.min_count}};
}

nlohmann::json beta_json(const rec::Beta& b) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t d = 0; d < rec::kDims; ++d) j[rec::kDimNames[d]] = b[d];
    return j;
}

}  // namespace

nlohmann::json Session::describe() const {
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t i = 0; i < log_.steps().size(); ++i) {
        const auto& s = log_.steps()[i];
        steps.push_back({{"op", to_string(s.op)}, {"texture", texture(s.op)}, {"predicate", to_json(s.predicate)},
                         {"size", s.extent.size()}, {"active", i < log_.cursor()}});
    }
    nlohmann::json cohorts = nlohmann::json::array();
    for (const auto& c : cohorts_) cohorts.push_back(to_json(c));
    return {{"id", id_},
            {"version", version_},
            {"snapshot_version", ws_->corpus->version()},
            {"params", params_json(params_)},
            {"beta", beta_json(beta_)},
            {"selection", selection_},
            {"steps", steps},
            {"cursor", log_.cursor()},
            {"cohorts", cohorts}};
}

nlohmann::json Session::snapshot() const {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : log_.steps()) {
        steps.push_back({{"op", to_string(s.op)}, {"predicate", to_json(s.predicate)}, {"extent", s.extent}});
    }
    nlohmann::json cohorts = nlohmann::json::array();
    for (const auto& c : cohorts_) cohorts.push_back(to_json(c));
    nlohmann::json edits = nlohmann::json::array();
    for (const auto& e : edits_) {
        edits.push_back({{"unit", e.unit}, {"new_parent", e.new_parent ? nlohmann::json(*e.new_parent) : nlohmann::json(nullptr)}});
    }
    return {{"id", id_},
            {"version", version_},
            {"params", params_json(params_)},
            {"beta", beta_json(beta_)},
            {"selection", {{"steps", steps}, {"cursor", log_.cursor()}}},
            {"cohorts", cohorts},
            {"next_cohort", next_cohort_},
            {"forest_edits", edits},
            {"last_recommendation", last_recommendation_}};
}

Session Session::restore(const nlohmann::json& j, std::shared_ptr<const Workspace> ws) {
    try {
        SessionParams params;
        const auto& pj = j.at("params");
        params.theta = pj.at("theta").get<double>();
        if (!pj.at("lod").is_null()) params.lod = pj.at("lod").get<std::size_t>();
        params.min_count = pj.at("min_count").get<int>();
        Session s(j.at("id").get<std::string>(), std::move(ws), params);
        s.beta_ = rec::beta_from_json(j.at("beta"));

        std::vector<SelectionStep> steps;
        for (const auto& sj : j.at("selection").at("steps")) {
            auto op = op_from_string(sj.at("op").get<std::string>());
            if (!op) throw ParseError("session: bad selection operator");
            steps.push_back({*op, predicate_from_json(sj.at("predicate")), sj.at("extent").get<PainterSet>()});
        }
        s.log_ = SelectionLog::restore(std::move(steps), j.at("selection").at("cursor").get<std::size_t>());
        s.selection_ = s.log_.replay();

        for (const auto& cj : j.at("cohorts")) {
            Cohort c;
            c.id = cj.at("id").get<std::string>();
            c.name = cj.at("name").get<std::string>();
            c.color = cj.at("color").get<std::string>();
            c.painters = cj.at("painters").get<PainterSet>();
            c.labels = cj.at("labels").get<std::vector<std::string>>();
            const auto& sj = cj.at("summary");
            c.summary.top_labels = sj.at("top_labels").get<std::vector<std::string>>();
            c.summary.year_first = sj.at("year_span").at(0).get<int>();
            c.summary.year_last = sj.at("year_span").at(1).get<int>();
            c.summary.dominant_provinces = sj.at("dominant_provinces").get<std::vector<std::string>>();
            if (sj.contains("dominant_level")) c.summary.dominant_level = sj["dominant_level"].get<int>();
            s.cohorts_.push_back(std::move(c));
        }
        s.next_cohort_ = j.at("next_cohort").get<std::size_t>();
        for (const auto& ej : j.at("forest_edits")) {
            ForestEdit e{ej.at("unit").get<std::string>(), std::nullopt};
            if (!ej.at("new_parent").is_null()) e.new_parent = ej["new_parent"].get<std::string>();
            s.edits_.push_back(std::move(e));
        }
        s.last_recommendation_ = j.value("last_recommendation", nlohmann::json(nullptr));
        s.version_ = j.at("version").get<std::uint64_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("session: ") + e.what());
    }
}

}  // namespace atlas::explore
