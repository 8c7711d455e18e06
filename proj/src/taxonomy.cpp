#include "atlas/taxonomy.hpp"

#include <fstream>

#include "atlas/error.hpp"

namespace atlas {

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::subject: return "subject";
        case Dimension::technique: return "technique";
        case Dimension::emotion: return "emotion";
    }
    return "subject";
}

std::optional<Dimension> dimension_from_string(std::string_view s) {
    for (auto d : kDimensions) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

LabelTaxonomy::LabelTaxonomy(std::vector<LabelNode> nodes) : nodes_(std::move(nodes)) {
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) problems.push_back("label with empty id");
        if (!index_.emplace(nodes_[i].id, i).second) {
            problems.push_back("duplicate label id '" + nodes_[i].id + "'");
        }
    }
    for (const auto& n : nodes_) {
        if (!n.parent) continue;
        auto it = index_.find(*n.parent);
        if (it == index_.end()) {
            problems.push_back("label '" + n.id + "' has orphan parent '" + *n.parent + "'");
            continue;
        }
        if (nodes_[it->second].dimension != n.dimension) {
            problems.push_back("label '" + n.id + "' has parent '" + *n.parent +
                               "' in another dimension");
        }
        children_[*n.parent].push_back(n.id);
    }
    if (!problems.empty()) throw ValidationError(problems);

    // Depth walk doubles as parent-cycle detection.
    for (const auto& n : nodes_) {
        int depth = 1;
        const LabelNode* cur = &n;
        while (cur->parent) {
            cur = &nodes_[index_.at(*cur->parent)];
            if (++depth > kMaxDepth) {
                problems.push_back("label '" + n.id + "': depth exceeds 3");
                break;
            }
        }
    }
    if (!problems.empty()) throw ValidationError(problems);
}

const LabelNode* LabelTaxonomy::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const LabelNode& LabelTaxonomy::require(std::string_view id) const {
    if (const auto* n = find(id)) return *n;
    throw NotFoundError("unknown label id '" + std::string(id) + "'");
}

std::vector<std::string> LabelTaxonomy::roots(Dimension d) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.dimension == d && !n.parent) out.push_back(n.id);
    }
    return out;
}

const std::vector<std::string>& LabelTaxonomy::children(std::string_view id) const {
    static const std::vector<std::string> kNone;
    auto it = children_.find(std::string(id));
    return it == children_.end() ? kNone : it->second;
}

int LabelTaxonomy::depth(std::string_view id) const {
    return static_cast<int>(ancestors(id).size()) + 1;
}

std::vector<std::string> LabelTaxonomy::closure(std::string_view id) const {
    std::vector<std::string> out{require(id).id};
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& c : children(out[i])) out.push_back(c);
    }
    return out;
}

std::vector<std::string> LabelTaxonomy::ancestors(std::string_view id) const {
    std::vector<std::string> out;
    const LabelNode* cur = &require(id);
    while (cur->parent) {
        out.push_back(*cur->parent);
        cur = &require(*cur->parent);
    }
    return out;
}

LabelTaxonomy taxonomy_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("taxonomy: expected a JSON list");
    std::vector<LabelNode> nodes;
    try {
        for (const auto& e : j) {
            LabelNode n;
            n.id = e.at("id").get<std::string>();
            const auto dim = e.at("dimension").get<std::string>();
            auto d = dimension_from_string(dim);
            if (!d) throw ParseError("taxonomy: label '" + n.id + "' has unknown dimension '" + dim + "'");
            n.dimension = *d;
            if (e.contains("parent") && !e.at("parent").is_null()) n.parent = e.at("parent").get<std::string>();
            n.name = e.value("name", n.id);
            nodes.push_back(std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("taxonomy: ") + e.what());
    }
    return LabelTaxonomy(std::move(nodes));
}

nlohmann::json to_json(const LabelTaxonomy& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : t.nodes()) {
        arr.push_back({{"id", n.id},
                       {"dimension", to_string(n.dimension)},
                       {"parent", n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr)},
                       {"name", n.name}});
    }
    return arr;
}

LabelTaxonomy load_taxonomy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open taxonomy file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return taxonomy_from_json(j);
}

namespace {

struct BundledLabel {
    const char* id;
    Dimension dim;
    const char* parent;
    const char* name;
    const char* description;
};

constexpr Dimension S = Dimension::subject;
constexpr Dimension T = Dimension::technique;
constexpr Dimension E = Dimension::emotion;

const BundledLabel kBundled[] = {
    // subject
    {"figure", S, nullptr, "Figure Painting", "paintings of human figures, portraits and scenes of people"},
    {"buddhist", S, "figure", "Buddhist Painting", "religious figure paintings of buddhas, bodhisattvas and arhats"},
    {"buddha-statues", S, "buddhist", "Buddha Statues", "devotional images of seated and standing buddha statues"},
    {"court-ladies", S, "figure", "Court Ladies", "elegant palace women in silk robes at leisure in the inner court"},
    {"taoist", S, "figure", "Taoist Immortals", "taoist immortals, deities and legendary sages among clouds"},
    {"landscape", S, "", "Landscape Painting", "mountains and water, rivers, peaks and distant scenery"},
    {"blue-green-landscape", S, "landscape", "Blue-Green Landscape", "mineral blue and green pigments on mountain landscapes"},
    {"ink-landscape", S, "landscape", "Ink Landscape", "monochrome ink mountains, mist and rivers"},
    {"flower-bird", S, "", "Flower-Bird Painting", "flowers, birds, insects and plants of the garden and field"},
    {"flower", S, "flower-bird", "Flower Painting", "peonies, lotus, plum blossoms and other flowers"},
    {"bird-beast", S, "flower-bird", "Bird-Beast Painting", "birds and animals, feathered creatures and beasts"},
    {"crane", S, "bird-beast", "Crane", "red-crowned cranes standing among pines"},
    {"exotic-birds", S, "bird-beast", "Exotic Birds", "rare birds and exotic animals of the imperial gardens"},
    {"bamboo-stone", S, "", "Bamboo and Stone", "ink bamboo stalks, leaves and garden rocks"},
    // technique
    {"gongbi", T, "", "Gongbi", "meticulous brushwork with fine outlines and careful color application"},
    {"line-drawing", T, "gongbi", "Line Drawing", "outline drawing with expressive brush lines"},
    {"iron-wire", T, "line-drawing", "Iron Wire", "even, strong lines like bent iron wire"},
    {"silk-thread", T, "line-drawing", "Silk Thread", "fine continuous lines like spun silk thread, tight and flowing"},
    {"willow-leaf", T, "line-drawing", "Willow Leaf", "lines swelling and tapering like willow leaves"},
    {"bamboo-leaf", T, "line-drawing", "Bamboo Leaf", "pointed strokes shaped like bamboo leaves"},
    {"heavy-color", T, "gongbi", "Heavy Color", "layered mineral pigments in rich opaque color"},
    {"freehand", T, "", "Freehand", "spontaneous ink wash brushwork expressing the idea rather than form"},
    {"great-freehand", T, "freehand", "Great Freehand", "wild, bold and expressive splashes of ink"},
    {"splashed-ink", T, "freehand", "Splashed Ink", "ink splashed and poured onto the surface"},
    {"light-ink", T, "freehand", "Light Ink", "pale diluted ink with bold brushwork"},
    {"mogu", T, "", "Mogu", "boneless technique relying on color washes without ink outlines"},
    {"texture-strokes", T, "", "Texture Strokes", "cun strokes modelling rock surfaces"},
    // emotion
    {"elegant", E, "", "Elegant", "refined, graceful and cultivated mood"},
    {"ornate", E, "elegant", "Ornate Elegance", "luxurious, decorative and splendid courtly taste"},
    {"restrained", E, "elegant", "Restrained", "quiet, reserved and understated feeling"},
    {"unrestrained", E, "", "Unrestrained", "free, uninhibited and untamed spirit"},
    {"intense", E, "unrestrained", "Intense Emotion", "strong passion and dramatic emotional impact"},
    {"serene", E, "", "Serene", "calm, tranquil and peaceful atmosphere"},
    {"reclusive", E, "serene", "Reclusive", "withdrawal from the world to live as a hermit"},
    {"archaic", E, "", "Archaic", "antique flavor imitating the ancient masters"},
    {"melancholy", E, "", "Melancholy", "sorrowful, lonely and wistful mood"},
    {"vigorous", E, "", "Vigorous", "forceful, energetic and powerful brush spirit"},
    {"delicate", E, "vigorous", "Delicate-Forceful", "delicate yet forceful, fine and strong at once"},
    {"playful", E, "", "Playful", "humorous, light-hearted and witty feeling"},
    {"solemn", E, "", "Solemn", "grave, dignified and reverent tone"},
};

}  // namespace

const LabelTaxonomy& bundled_taxonomy() {
    static const LabelTaxonomy t = [] {
        std::vector<LabelNode> nodes;
        for (const auto& b : kBundled) {
            LabelNode n{b.id, b.dim, std::nullopt, b.name};
            if (b.parent && *b.parent) n.parent = std::string(b.parent);
            nodes.push_back(std::move(n));
        }
        return LabelTaxonomy(std::move(nodes));
    }();
    return t;
}

const std::unordered_map<std::string, std::string>& bundled_descriptions() {
    static const std::unordered_map<std::string, std::string> d = [] {
        std::unordered_map<std::string, std::string> out;
        for (const auto& b : kBundled) out.emplace(b.id, b.description);
        return out;
    }();
    return d;
}

}  // namespace atlas
