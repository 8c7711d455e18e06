#include "atlas/service.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>

#include "atlas/embedding.hpp"
#include "atlas/error.hpp"

namespace atlas::service {

namespace {

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Response json_response(int status, nlohmann::json body) { return {status, std::move(body), "application/json", {}}; }

Response error_response(int status, const std::string& message, std::vector<std::string> violations = {}) {
    nlohmann::json body{{"error", message}};
    if (!violations.empty()) body["violations"] = violations;
    return json_response(status, std::move(body));
}

nlohmann::json parse_body(const Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON body: ") + e.what());
    }
}

std::optional<std::string> query(const Request& req, const std::string& key) {
    auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return std::nullopt;
    return it->second;
}

double query_double(const Request& req, const std::string& key, double fallback) {
    auto v = query(req, key);
    if (!v) return fallback;
    auto d = parse_double(*v);
    if (!d) throw ValidationError(key + " must be a number");
    return *d;
}

std::optional<long long> query_int(const Request& req, const std::string& key) {
    auto v = query(req, key);
    if (!v) return std::nullopt;
    auto n = parse_number<long long>(*v);
    if (!n) throw ValidationError(key + " must be an integer");
    return n;
}

std::string_view dimension_color(Dimension d) {
    switch (d) {
        case Dimension::subject: return "red";
        case Dimension::technique: return "green";
        case Dimension::emotion: return "blue";
    }
    return "red";
}

nlohmann::json painter_detail(const explore::Workspace& ws, std::size_t i) {
    const auto& c = *ws.corpus;
    const auto& p = c.painter(i);
    auto j = corpus::to_json(corpus::CorpusDocument{{p}, {}, {}, {}})["painters"][0];
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : p.raw_labels) {
        nlohmann::json entry{{"label_id", l.label_id}, {"source_text_span", l.source_text_span}};
        if (const auto* node = ws.taxonomy->find(l.label_id)) {
            entry["dimension"] = to_string(node->dimension);
            entry["color"] = dimension_color(node->dimension);
            entry["name"] = node->name;
        }
        labels.push_back(std::move(entry));
    }
    nlohmann::json importance = nlohmann::json::array();
    for (const auto& e : ws.importances->at(i).entries) {
        importance.push_back({{"label_id", e.label_id}, {"weight", e.weight}, {"own_share", e.own_share},
                              {"inherited_share", e.inherited_share}});
    }
    nlohmann::json masters = nlohmann::json::array(), apprentices = nlohmann::json::array();
    for (auto m : c.masters_of(i)) masters.push_back(c.painter(m).id);
    for (auto a : c.apprentices_of(i)) apprentices.push_back(c.painter(a).id);
    j["labels"] = labels;
    j["importance"] = importance;
    j["masters"] = masters;
    j["apprentices"] = apprentices;
    j["effective_birth_year"] = c.effective_birth(i);
    j["birth_estimated"] = c.birth_estimated(i);
    j["snapshot_version"] = c.version();
    return j;
}

}  // namespace

void apply_env(ApiConfig& config, const std::function<const char*(const char*)>& getenv) {
    auto get = [&](const char* key) -> std::optional<std::string> {
        const char* v = getenv(key);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = get("ATLAS_BIND")) {
        const auto colon = v->rfind(':');
        if (colon == std::string::npos) throw ValidationError("ATLAS_BIND must look like host:port");
        auto port = parse_number<int>(std::string_view(*v).substr(colon + 1));
        if (!port || *port < 0 || *port > 65535) throw ValidationError("ATLAS_BIND has a bad port");
        config.host = v->substr(0, colon);
        config.port = *port;
    }
    if (auto v = get("ATLAS_CORPUS")) config.corpus = *v;
    if (auto v = get("ATLAS_TAXONOMY")) config.taxonomy = *v;
    if (auto v = get("ATLAS_GEOGRAPHY")) config.geography = *v;
    if (auto v = get("ATLAS_AST")) config.ast = *v;
    if (auto v = get("ATLAS_DESCRIPTIONS")) config.descriptions = *v;
    if (auto v = get("ATLAS_STATIC_DIR")) config.static_dir = *v;
    if (auto v = get("ATLAS_THETA")) {
        auto t = parse_double(*v);
        if (!t || !(*t > 0.0 && *t <= 1.0)) throw ValidationError("ATLAS_THETA must lie in (0, 1]");
        config.theta = *t;
    }
    if (auto v = get("ATLAS_LOD")) {
        auto n = parse_number<std::size_t>(*v);
        if (!n) throw ValidationError("ATLAS_LOD must be a nonnegative integer");
        config.lod = *n;
    }
    if (auto v = get("ATLAS_BETA")) config.beta = rec::parse_beta(*v);
    if (auto v = get("ATLAS_SESSION_TTL")) {
        auto n = parse_number<long long>(*v);
        if (!n || *n <= 0) throw ValidationError("ATLAS_SESSION_TTL must be a positive number of seconds");
        config.session_ttl = std::chrono::seconds(*n);
    }
}

std::shared_ptr<const explore::Workspace> load_workspace(const ApiConfig& config) {
    auto corpus = corpus::load_corpus(config.corpus);
    auto taxonomy = config.taxonomy ? load_taxonomy(*config.taxonomy) : bundled_taxonomy();
    auto geography = config.geography ? geo::load_geography(*config.geography) : geo::bundled_geography();

    std::vector<std::string> problems;
    for (const auto& p : corpus.painters()) {
        for (const auto& l : p.raw_labels) {
            if (!taxonomy.contains(l.label_id)) problems.push_back("painter " + p.id + ": unknown label id '" + l.label_id + "'");
        }
        if (!p.province.empty() && !geography.find(p.province)) {
            problems.push_back("painter " + p.id + ": unknown province code '" + p.province + "'");
        }
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    ArtisticSimilarityTable ast;
    if (config.ast && std::filesystem::exists(*config.ast)) {
        ast = load_ast(*config.ast);
        for (const auto& n : taxonomy.nodes()) {
            if (!ast.index_of(n.id)) throw StaleTableError("similarity table lacks label '" + n.id + "'; rebuild it");
        }
    } else {
        DescriptionMap descriptions = config.descriptions ? load_descriptions(*config.descriptions) : bundled_descriptions();
        ast = build_ast(taxonomy, TrigramHashProvider(), descriptions);
        if (config.ast) save_ast(ast, *config.ast);
    }
    auto ws = explore::make_workspace(std::move(corpus), std::move(taxonomy), std::move(geography), std::move(ast));
    return ws;
}

Api::Api(std::shared_ptr<const explore::Workspace> ws, ApiConfig config, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)), ws_(std::move(ws)) {}

std::shared_ptr<const explore::Workspace> Api::workspace() const {
    std::lock_guard lock(ws_mutex_);
    return ws_;
}

std::size_t Api::session_count() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

std::size_t Api::expire_sessions() {
    const auto now = clock_();
    std::lock_guard lock(store_mutex_);
    return std::erase_if(sessions_, [&](const auto& kv) {
        std::unique_lock entry_lock(kv.second->mutex, std::try_to_lock);
        return entry_lock.owns_lock() && now - kv.second->last_used > config_.session_ttl;
    });
}

std::shared_ptr<Api::Entry> Api::find_session(const std::string& id) {
    std::lock_guard lock(store_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
}

std::shared_ptr<Api::Entry> Api::add_session(explore::Session s) {
    std::lock_guard lock(store_mutex_);
    const auto id = s.id();
    if (sessions_.contains(id)) throw ConflictError("session '" + id + "' already exists");
    auto entry = std::make_shared<Entry>(std::move(s), clock_());
    sessions_.emplace(id, entry);
    return entry;
}

Response Api::handle(const Request& req) {
    expire_sessions();
    try {
        return route(req);
    } catch (const ValidationError& e) {
        return error_response(422, e.what(), e.violations());
    } catch (const NotFoundError& e) {
        return error_response(404, e.what());
    } catch (const ConflictError& e) {
        return error_response(409, e.what());
    } catch (const ParseError& e) {
        return error_response(400, e.what());
    } catch (const std::invalid_argument& e) {
        return error_response(422, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

Response Api::route(const Request& req) {
    const auto parts = split(req.path, '/');
    if (parts.size() == 1 && parts[0] == "healthz" && req.method == "GET") {
        auto ws = workspace();
        return json_response(200, {{"status", "ok"},
                                   {"painters", ws->corpus->size()},
                                   {"relations", ws->corpus->relations().size()},
                                   {"labels", ws->taxonomy->size()},
                                   {"snapshot_version", ws->corpus->version()},
                                   {"sessions", session_count()}});
    }
    if (!parts.empty() && parts[0] == "sessions") return session_route(req, parts);
    if (!parts.empty() && parts[0] == "painters") return painter_route(req, parts);
    return error_response(404, "no route for " + req.method + " " + req.path);
}

Response Api::session_route(const Request& req, const std::vector<std::string>& parts) {
    const auto& m = req.method;
    if (parts.size() == 1 && m == "POST") {
        const auto body = parse_body(req);
        explore::SessionParams params;
        params.theta = body.value("theta", config_.theta);
        params.lod = config_.lod;
        if (body.contains("lod")) {
            if (body["lod"].is_null()) params.lod.reset();
            else if (body["lod"].is_number_unsigned()) params.lod = body["lod"].get<std::size_t>();
            else throw ValidationError("lod must be a nonnegative integer or null");
        }
        if (body.contains("min_count")) {
            if (!body["min_count"].is_number_integer()) throw ValidationError("min_count must be an integer");
            params.min_count = body["min_count"].get<int>();
        }
        std::string id;
        {
            std::lock_guard lock(store_mutex_);
            id = "s" + std::to_string(next_session_++);
        }
        explore::Session s(id, workspace(), params);
        s.set_beta(body.contains("beta") ? rec::beta_from_json(body["beta"]) : config_.beta);
        auto entry = add_session(std::move(s));
        std::lock_guard lock(entry->mutex);
        return json_response(201, entry->session.describe());
    }
    if (parts.size() == 2 && parts[1] == "restore" && m == "POST") {
        auto s = explore::Session::restore(parse_body(req), workspace());
        auto entry = add_session(std::move(s));
        std::lock_guard lock(entry->mutex);
        return json_response(201, entry->session.describe());
    }
    if (parts.size() < 2) return error_response(404, "no route for " + m + " " + req.path);

    auto entry = find_session(parts[1]);
    std::lock_guard lock(entry->mutex);
    entry->last_used = clock_();
    auto& s = entry->session;
    s.rebind(workspace());
    const auto sub = parts.size() > 2 ? parts[2] : std::string();

    if (parts.size() == 2) {
        if (m == "GET") return json_response(200, s.describe());
        if (m == "DELETE") {
            std::lock_guard store(store_mutex_);
            sessions_.erase(parts[1]);
            return json_response(200, {{"deleted", parts[1]}});
        }
    }
    if (parts.size() == 3 && sub == "snapshot" && m == "GET") return json_response(200, s.snapshot());
    if (parts.size() == 3 && sub == "select" && m == "POST") {
        const auto body = parse_body(req);
        std::vector<std::string> errors;
        std::optional<explore::Op> op = explore::Op::OR;
        if (body.contains("op")) {
            op = body["op"].is_string() ? explore::op_from_string(body["op"].get<std::string>()) : std::nullopt;
            if (!op) errors.push_back("op must be one of OR, AND, NOT");
        }
        if (!body.contains("predicate")) errors.push_back("predicate is required");
        if (!errors.empty()) throw ValidationError(std::move(errors));
        const auto& sel = s.apply(*op, explore::predicate_from_json(body["predicate"]));
        const auto& step = s.log().steps().back();
        return json_response(200, {{"selection", sel},
                                   {"size", sel.size()},
                                   {"step", {{"op", explore::to_string(step.op)}, {"texture", explore::texture(step.op)},
                                             {"extent_size", step.extent.size()}}},
                                   {"cursor", s.log().cursor()},
                                   {"version", s.version()}});
    }
    if (parts.size() == 3 && (sub == "undo" || sub == "redo") && m == "POST") {
        const auto& sel = sub == "undo" ? s.undo() : s.redo();
        return json_response(200, {{"selection", sel}, {"size", sel.size()}, {"cursor", s.log().cursor()}, {"version", s.version()}});
    }
    if (parts.size() == 4 && sub == "views" && m == "GET") {
        const auto& view = parts[3];
        if (view == "geography") return json_response(200, s.geo_view());
        if (view == "identity") return json_response(200, s.identity_view());
        if (view == "labels") {
            std::vector<Dimension> dims;
            if (auto d = query(req, "dims")) {
                for (const auto& name : split(*d, ',')) {
                    auto dim = dimension_from_string(name);
                    if (!dim) throw ValidationError("dims: unknown dimension '" + name + "'");
                    dims.push_back(*dim);
                }
            }
            std::optional<int> min_count;
            if (auto n = query_int(req, "min_count")) min_count = static_cast<int>(*n);
            auto mode = LabelViewMode::focus;
            if (auto md = query(req, "mode")) {
                auto parsed = label_view_mode_from_string(*md);
                if (!parsed) throw ValidationError("mode must be focus or context");
                mode = *parsed;
            }
            return json_response(200, s.label_view(dims, min_count, mode));
        }
        if (view == "mountain") {
            if (query(req, "theta")) s.set_theta(query_double(req, "theta", s.params().theta));
            if (auto lod = query(req, "lod")) {
                if (*lod == "none") {
                    s.set_lod(std::nullopt);
                } else {
                    auto n = query_int(req, "lod");
                    if (*n < 0) throw ValidationError("lod must be nonnegative");
                    s.set_lod(static_cast<std::size_t>(*n));
                }
            }
            layout::LayoutParams lp;
            lp.width = query_double(req, "width", lp.width);
            lp.height = query_double(req, "height", lp.height);
            if (auto seed = query_int(req, "seed")) lp.seed = static_cast<std::uint64_t>(*seed);
            const auto& forest = s.forest();
            const auto lay = layout::compute_layout(forest, lp);
            if (query(req, "format") == std::optional<std::string>("svg")) {
                return {200, nullptr, "image/svg+xml", layout::to_svg(lay, forest)};
            }
            return json_response(200, {{"params", {{"theta", s.params().theta},
                                                   {"lod", s.params().lod ? nlohmann::json(*s.params().lod) : nlohmann::json(nullptr)}}},
                                       {"forest", lineage::to_json(forest)},
                                       {"layout", layout::to_json(lay, forest)}});
        }
        return error_response(404, "unknown view '" + view + "'");
    }
    if (parts.size() == 3 && sub == "recommend" && m == "POST") {
        const auto body = parse_body(req);
        std::optional<rec::Beta> beta;
        if (body.contains("beta") && !body["beta"].is_null()) beta = rec::beta_from_json(body["beta"]);
        return json_response(200, s.run_recommendation(beta));
    }
    if (parts.size() == 4 && sub == "forest" && parts[3] == "reassign" && m == "POST") {
        const auto body = parse_body(req);
        if (!body.contains("unit") || !body["unit"].is_string()) throw ValidationError("unit must be a unit id");
        std::optional<std::string> parent;
        if (body.contains("new_parent") && !body["new_parent"].is_null()) {
            if (!body["new_parent"].is_string()) throw ValidationError("new_parent must be a unit id or null");
            parent = body["new_parent"].get<std::string>();
        }
        s.reassign(body["unit"].get<std::string>(), parent);
        return json_response(200, {{"forest", lineage::to_json(s.forest())}, {"version", s.version()}});
    }
    if (sub == "cohorts") {
        if (parts.size() == 3 && m == "GET") {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& c : s.cohorts()) list.push_back(explore::to_json(c));
            return json_response(200, {{"cohorts", list}});
        }
        if (parts.size() == 3 && m == "POST") {
            const auto body = parse_body(req);
            std::vector<std::string> errors;
            auto str = [&](const char* key) {
                if (!body.contains(key)) return std::string();
                if (!body[key].is_string()) {
                    errors.push_back(std::string(key) + " must be a string");
                    return std::string();
                }
                return body[key].get<std::string>();
            };
            auto name = str("name");
            auto color = str("color");
            std::vector<std::string> labels;
            if (body.contains("labels")) {
                if (!body["labels"].is_array()) errors.push_back("labels must be an array of strings");
                else {
                    for (const auto& l : body["labels"]) {
                        if (!l.is_string()) {
                            errors.push_back("labels must be an array of strings");
                            break;
                        }
                        labels.push_back(l.get<std::string>());
                    }
                }
            }
            if (!errors.empty()) throw ValidationError(std::move(errors));
            return json_response(201, explore::to_json(s.create_cohort(std::move(name), std::move(color), std::move(labels))));
        }
        if (parts.size() == 4 && parts[3] == "compare" && m == "POST") {
            const auto body = parse_body(req);
            if (!body.contains("ids") || !body["ids"].is_array()) throw ValidationError("ids must be an array of cohort ids");
            std::vector<std::string> ids;
            for (const auto& id : body["ids"]) {
                if (!id.is_string()) throw ValidationError("ids must be an array of cohort ids");
                ids.push_back(id.get<std::string>());
            }
            return json_response(200, s.compare_cohorts(ids));
        }
        if (parts.size() == 4 && m == "GET") return json_response(200, explore::to_json(s.cohort(parts[3])));
        if (parts.size() == 4 && m == "DELETE") {
            s.delete_cohort(parts[3]);
            return json_response(200, {{"deleted", parts[3]}});
        }
    }
    return error_response(404, "no route for " + m + " " + req.path);
}

Response Api::painter_route(const Request& req, const std::vector<std::string>& parts) {
    if (parts.size() == 2 && req.method == "GET") {
        auto ws = workspace();
        return json_response(200, painter_detail(*ws, ws->corpus->require_index(parts[1])));
    }
    if (parts.size() == 3 && parts[2] == "labels" && req.method == "PATCH") {
        const auto body = parse_body(req);
        std::vector<std::string> errors;
        if (!body.contains("base_version") || !body["base_version"].is_number_unsigned()) {
            errors.push_back("base_version must be the snapshot version the edit is based on");
        }
        std::vector<corpus::LabelEdit> edits;
        if (!body.contains("edits") || !body["edits"].is_array()) {
            errors.push_back("edits must be an array");
        } else {
            for (const auto& ej : body["edits"]) {
                corpus::LabelEdit e;
                auto kind = ej.contains("kind") && ej["kind"].is_string()
                                ? corpus::label_edit_kind_from_string(ej["kind"].get<std::string>())
                                : std::nullopt;
                if (!kind) {
                    errors.push_back("edits[].kind must be add, remove or retext");
                    continue;
                }
                if (!ej.contains("label_id") || !ej["label_id"].is_string()) {
                    errors.push_back("edits[].label_id must be a string");
                    continue;
                }
                e.kind = *kind;
                e.label_id = ej["label_id"].get<std::string>();
                e.source_text_span = ej.value("source_text_span", std::string());
                edits.push_back(std::move(e));
            }
        }
        if (!errors.empty()) throw ValidationError(std::move(errors));

        std::lock_guard lock(edit_mutex_);
        auto ws = workspace();
        const auto base = body["base_version"].get<std::uint64_t>();
        if (base != ws->corpus->version()) {
            throw ConflictError("stale snapshot: base_version " + std::to_string(base) + " but current is " +
                                std::to_string(ws->corpus->version()));
        }
        auto result = corpus::update_painter_labels(*ws->corpus, parts[1], edits, *ws->taxonomy);
        auto next = explore::with_corpus(*ws, std::move(result.corpus));
        {
            std::lock_guard wl(ws_mutex_);
            ws_ = next;
        }
        auto detail = painter_detail(*next, next->corpus->require_index(parts[1]));
        return json_response(200, {{"painter", detail}, {"snapshot_version", next->corpus->version()}, {"warnings", result.warnings}});
    }
    return error_response(404, "no route for " + req.method + " " + req.path);
}

void serve(const ApiConfig& config) {
    auto api = std::make_shared<Api>(load_workspace(config), config);
    httplib::Server server;
    if (config.static_dir && !server.set_mount_point("/ui", config.static_dir->string())) {
        throw ValidationError("static dir " + config.static_dir->string() + " does not exist");
    }
    auto adapter = [api](const httplib::Request& hreq, httplib::Response& hres) {
        Request req;
        req.method = hreq.method;
        req.path = hreq.path;
        for (const auto& [k, v] : hreq.params) req.query[k] = v;
        req.body = hreq.body;
        const auto res = api->handle(req);
        hres.status = res.status;
        hres.set_content(res.serialize(), res.content_type);
    };
    const std::string any = R"(/.*)";
    server.Get(any, adapter);
    server.Post(any, adapter);
    server.Patch(any, adapter);
    server.Delete(any, adapter);
    if (!server.bind_to_port(config.host, config.port)) {
        throw Error("cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    server.listen_after_bind();
}

}  // namespace atlas::service
