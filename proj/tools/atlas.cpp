// Command-line front end. Exit codes: 0 ok, 1 validation or data error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "atlas/corpus.hpp"
#include "atlas/error.hpp"
#include "atlas/explore.hpp"
#include "atlas/layout.hpp"
#include "atlas/lineage.hpp"
#include "atlas/recommender.hpp"
#include "atlas/service.hpp"

namespace {

using namespace atlas;

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << text;
}

void emit_json(const nlohmann::json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

// "900-1900" or "900:1900"; negative years allowed on the left.
corpus::YearRange parse_era(const std::string& s) {
    const auto sep = s.find_first_of(":-", 1);
    if (sep == std::string::npos) throw CLI::ValidationError("--era", "expected FIRST-LAST");
    try {
        return {std::stoi(s.substr(0, sep)), std::stoi(s.substr(sep + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--era", "expected FIRST-LAST");
    }
}

// Cohort file: a JSON array of painter ids, or {"cohort": [...]}.
std::vector<std::string> read_cohort(const std::string& path) {
    auto j = read_json(path);
    if (j.is_object() && j.contains("cohort")) j = j["cohort"];
    if (!j.is_array()) throw ValidationError("cohort file must hold an array of painter ids");
    std::vector<std::string> ids;
    for (const auto& v : j) {
        if (!v.is_string()) throw ValidationError("cohort file must hold an array of painter ids");
        ids.push_back(v.get<std::string>());
    }
    return ids;
}

struct DataOptions {
    std::string taxonomy, geography, ast, descriptions;

    void add(CLI::App* cmd) {
        cmd->add_option("--taxonomy", taxonomy, "Label taxonomy JSON (bundled when omitted)");
        cmd->add_option("--geography", geography, "Province table JSON (bundled when omitted)");
        cmd->add_option("--ast", ast, "Similarity table JSON; built from descriptions when missing");
        cmd->add_option("--descriptions", descriptions, "Label descriptions JSON (bundled when omitted)");
    }

    service::ApiConfig config(const std::string& corpus) const {
        service::ApiConfig c;
        c.corpus = corpus;
        if (!taxonomy.empty()) c.taxonomy = taxonomy;
        if (!geography.empty()) c.geography = geography;
        if (!ast.empty()) c.ast = ast;
        if (!descriptions.empty()) c.descriptions = descriptions;
        return c;
    }
};

std::vector<std::string> read_selection(const std::string& path) { return path.empty() ? std::vector<std::string>{} : read_cohort(path); }

int run(int argc, char** argv) {
    CLI::App app{"Painter lineage atlas: forest reconstruction, cohort recommendation and mountain layout"};
    app.require_subcommand(1);

    // validate
    std::string v_file;
    DataOptions v_data;
    auto* validate = app.add_subcommand("validate", "Validate a corpus file against the taxonomy and geography");
    validate->add_option("file", v_file, "Corpus JSON")->required();
    v_data.add(validate);

    // gen-fixture
    std::uint64_t g_seed = 7;
    int g_n = 50;
    std::string g_era = "900-1900", g_out;
    auto* gen = app.add_subcommand("gen-fixture", "Write a deterministic synthetic corpus");
    gen->add_option("--seed", g_seed, "RNG seed")->capture_default_str();
    gen->add_option("--n", g_n, "Number of painters")->capture_default_str()->check(CLI::Range(1, 100000));
    gen->add_option("--era", g_era, "Birth-year range FIRST-LAST")->capture_default_str();
    gen->add_option("--out,-o", g_out, "Output file (stdout when omitted)");

    // reconstruct
    std::string r_file, r_out;
    double r_theta = lineage::kDefaultTheta;
    std::optional<std::size_t> r_lod;
    auto* recon = app.add_subcommand("reconstruct", "Reconstruct the inheritance forest");
    recon->add_option("file", r_file, "Corpus JSON")->required();
    recon->add_option("--theta", r_theta, "Clustering threshold in (0, 1]")->capture_default_str();
    recon->add_option("--lod", r_lod, "Painter budget for visible clusters");
    recon->add_option("--out,-o", r_out, "Output file (stdout when omitted)");

    // recommend
    std::string c_file, c_cohort, c_beta = "0.2,0.2,0.2,0.2,0.2", c_out;
    DataOptions c_data;
    auto* recommend = app.add_subcommand("recommend", "Recommend painters for a potential cohort");
    recommend->add_option("file", c_file, "Corpus JSON")->required();
    recommend->add_option("--cohort", c_cohort, "JSON array of cohort painter ids")->required();
    recommend->add_option("--beta", c_beta, "Weights for labels,geography,time,identity,inheritance")->capture_default_str();
    recommend->add_option("--out,-o", c_out, "Output file (stdout when omitted)");
    c_data.add(recommend);

    // layout
    std::string l_file, l_out, l_svg;
    layout::LayoutParams lp;
    std::optional<int> l_first, l_last;
    std::optional<std::size_t> l_lod;
    auto* lay = app.add_subcommand("layout", "Compute the mountain layout of a forest");
    lay->add_option("forest", l_file, "Forest JSON from `reconstruct`")->required();
    lay->add_option("--width", lp.width)->capture_default_str();
    lay->add_option("--height", lp.height)->capture_default_str();
    lay->add_option("--year-first", l_first, "Top of the timeline (data minimum when omitted)");
    lay->add_option("--year-last", l_last, "Bottom of the timeline (data maximum when omitted)");
    lay->add_option("--base-width", lp.base_width)->capture_default_str();
    lay->add_option("--gap", lp.gap)->capture_default_str();
    lay->add_option("--iterations", lp.iterations)->capture_default_str();
    lay->add_option("--seed", lp.seed)->capture_default_str();
    lay->add_option("--glyph-width", lp.glyph_width)->capture_default_str();
    lay->add_option("--lod", l_lod, "Painter budget overriding the forest's visibility");
    lay->add_option("--out,-o", l_out, "Layout JSON output (stdout when omitted)");
    lay->add_option("--svg", l_svg, "Also write an SVG rendering");

    // views
    std::string w_file, w_sel, w_out, w_dims, w_mode = "focus";
    int w_min = 1;
    double w_theta = lineage::kDefaultTheta;
    DataOptions w_data;
    auto* views = app.add_subcommand("views", "Print a view aggregate for a selection");
    views->require_subcommand(1);
    auto add_view = [&](const char* name, const char* help) {
        auto* v = views->add_subcommand(name, help);
        v->add_option("file", w_file, "Corpus JSON")->required();
        v->add_option("--selection", w_sel, "JSON array of selected painter ids");
        v->add_option("--out,-o", w_out, "Output file (stdout when omitted)");
        w_data.add(v);
        return v;
    };
    auto* v_geo = add_view("geography", "Per-province totals and selected counts");
    auto* v_id = add_view("identity", "Official-level rings with selected counts");
    auto* v_labels = add_view("labels", "Label distribution and combination tree");
    v_labels->add_option("--dims", w_dims, "Dimension order, e.g. subject,technique,emotion");
    v_labels->add_option("--min-count", w_min)->capture_default_str();
    v_labels->add_option("--mode", w_mode, "focus or context")->capture_default_str();
    auto* v_mountain = add_view("mountain", "Forest and layout for the corpus");
    v_mountain->add_option("--theta", w_theta)->capture_default_str();

    // serve
    service::ApiConfig s_cfg;
    std::string s_bind, s_corpus, s_static, s_beta, s_tax, s_geo, s_ast, s_desc;
    std::optional<double> s_theta;
    std::optional<std::size_t> s_lod;
    std::optional<long long> s_ttl;
    auto* srv = app.add_subcommand("serve", "Run the HTTP service (ATLAS_* environment variables supply defaults)");
    srv->add_option("--corpus", s_corpus, "Corpus JSON");
    srv->add_option("--bind", s_bind, "host:port");
    srv->add_option("--taxonomy", s_tax);
    srv->add_option("--geography", s_geo);
    srv->add_option("--ast", s_ast);
    srv->add_option("--descriptions", s_desc);
    srv->add_option("--static", s_static, "Directory served under /ui");
    srv->add_option("--theta", s_theta);
    srv->add_option("--lod", s_lod);
    srv->add_option("--beta", s_beta);
    srv->add_option("--session-ttl", s_ttl, "Idle session lifetime in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    if (*validate) {
        auto cfg = v_data.config(v_file);
        auto ws = service::load_workspace(cfg);
        std::cout << "ok: " << ws->corpus->size() << " painters, " << ws->corpus->relations().size() << " relations\n";
    } else if (*gen) {
        corpus::YearRange era;
        try {
            era = parse_era(g_era);
        } catch (const CLI::ParseError& e) {
            std::cerr << "error: " << e.what() << "\n\n" << gen->help();
            return 2;
        }
        emit_json(corpus::to_json(corpus::generate_fixture(g_seed, g_n, era).document()), g_out);
    } else if (*recon) {
        auto c = corpus::load_corpus(r_file);
        emit_json(lineage::to_json(lineage::reconstruct(c, r_theta, r_lod)), r_out);
    } else if (*recommend) {
        const auto beta = rec::parse_beta(c_beta);
        const auto cohort = read_cohort(c_cohort);
        auto ws = service::load_workspace(c_data.config(c_file));
        emit_json(rec::to_json(rec::recommend(ws->recommender_context(), cohort, beta)), c_out);
    } else if (*lay) {
        const auto forest = lineage::forest_from_json(read_json(l_file));
        lp.year_first = l_first;
        lp.year_last = l_last;
        lp.lod = l_lod;
        const auto result = layout::compute_layout(forest, lp);
        if (!l_svg.empty()) emit(layout::to_svg(result, forest), l_svg);
        emit_json(layout::to_json(result, forest), l_out);
    } else if (*views) {
        auto ws = service::load_workspace(w_data.config(w_file));
        explore::Session s("cli", ws, {w_theta, std::nullopt, 1});
        const auto sel = read_selection(w_sel);
        if (!sel.empty()) s.apply(explore::Op::OR, {"painters", {{"painters", sel}}});
        if (*v_geo) {
            emit_json(s.geo_view(), w_out);
        } else if (*v_id) {
            emit_json(s.identity_view(), w_out);
        } else if (*v_labels) {
            std::vector<Dimension> dims;
            for (const auto& name : CLI::detail::split(w_dims, ',')) {
                if (name.empty()) continue;
                auto d = dimension_from_string(name);
                if (!d) throw ValidationError("unknown dimension '" + name + "'");
                dims.push_back(*d);
            }
            auto mode = label_view_mode_from_string(w_mode);
            if (!mode) throw ValidationError("mode must be focus or context");
            emit_json(s.label_view(dims, w_min, *mode), w_out);
        } else if (*v_mountain) {
            const auto& forest = s.forest();
            emit_json({{"forest", lineage::to_json(forest)}, {"layout", layout::to_json(layout::compute_layout(forest), forest)}}, w_out);
        }
    } else if (*srv) {
        service::apply_env(s_cfg, [](const char* k) { return std::getenv(k); });
        if (!s_corpus.empty()) s_cfg.corpus = s_corpus;
        if (!s_bind.empty()) {
            service::apply_env(s_cfg, [&](const char* k) { return std::string(k) == "ATLAS_BIND" ? s_bind.c_str() : nullptr; });
        }
        if (!s_tax.empty()) s_cfg.taxonomy = s_tax;
        if (!s_geo.empty()) s_cfg.geography = s_geo;
        if (!s_ast.empty()) s_cfg.ast = s_ast;
        if (!s_desc.empty()) s_cfg.descriptions = s_desc;
        if (!s_static.empty()) s_cfg.static_dir = s_static;
        if (s_theta) {
            if (!(*s_theta > 0.0 && *s_theta <= 1.0)) throw ValidationError("--theta must lie in (0, 1]");
            s_cfg.theta = *s_theta;
        }
        if (s_lod) s_cfg.lod = s_lod;
        if (!s_beta.empty()) s_cfg.beta = rec::parse_beta(s_beta);
        if (s_ttl) s_cfg.session_ttl = std::chrono::seconds(*s_ttl);
        if (s_cfg.corpus.empty()) {
            std::cerr << "error: --corpus (or ATLAS_CORPUS) is required\n\n" << srv->help();
            return 2;
        }
        std::cerr << "listening on " << s_cfg.host << ":" << s_cfg.port << "\n";
        service::serve(s_cfg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const atlas::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
