#pragma once

// JSON-over-HTTP surface. Api::handle is transport-free so it can be
// exercised directly; serve() binds it to an HTTP listener.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "atlas/explore.hpp"
#include "atlas/layout.hpp"

namespace atlas::service {

struct ApiConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path corpus;
    std::optional<std::filesystem::path> taxonomy;      // bundled when absent
    std::optional<std::filesystem::path> geography;     // bundled when absent
    std::optional<std::filesystem::path> ast;           // built on demand when absent or missing
    std::optional<std::filesystem::path> descriptions;  // bundled when absent
    std::optional<std::filesystem::path> static_dir;
    double theta = lineage::kDefaultTheta;
    std::optional<std::size_t> lod;
    rec::Beta beta = rec::kUniformBeta;
    std::chrono::seconds session_ttl{24 * 60 * 60};
};

// Applies ATLAS_* environment overrides; throws ValidationError on bad values.
void apply_env(ApiConfig& config, const std::function<const char*(const char*)>& getenv);

// Loads corpus, taxonomy, geography and AST, checking that every painter
// label and province resolves. Throws with a diagnostic on failure.
std::shared_ptr<const explore::Workspace> load_workspace(const ApiConfig& config);

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    nlohmann::json body;
    std::string content_type = "application/json";
    std::string text;  // non-JSON payloads (SVG)

    std::string serialize() const { return text.empty() ? body.dump() : text; }
};

class Api {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    Api(std::shared_ptr<const explore::Workspace> ws, ApiConfig config, Clock clock = std::chrono::steady_clock::now);

    Response handle(const Request& req);

    std::shared_ptr<const explore::Workspace> workspace() const;
    std::size_t session_count() const;
    // Drops sessions idle for longer than the TTL; returns how many.
    std::size_t expire_sessions();

private:
    struct Entry {
        std::mutex mutex;
        explore::Session session;
        std::chrono::steady_clock::time_point last_used;

        Entry(explore::Session s, std::chrono::steady_clock::time_point t) : session(std::move(s)), last_used(t) {}
    };

    Response route(const Request& req);
    Response session_route(const Request& req, const std::vector<std::string>& parts);
    Response painter_route(const Request& req, const std::vector<std::string>& parts);
    std::shared_ptr<Entry> find_session(const std::string& id);
    std::shared_ptr<Entry> add_session(explore::Session s);

    ApiConfig config_;
    Clock clock_;
    mutable std::mutex ws_mutex_;
    std::shared_ptr<const explore::Workspace> ws_;
    std::mutex edit_mutex_;
    mutable std::mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::size_t next_session_ = 1;
};

// Blocks serving HTTP until the process is stopped.
void serve(const ApiConfig& config);

}  // namespace atlas::service
