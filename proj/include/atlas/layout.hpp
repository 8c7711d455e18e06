#pragma once

// Mountain-map geometry: timeline scale, hill shaping, force placement of
// trees, stream/ladder routing and name decluttering. Abstract units.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "atlas/lineage.hpp"

namespace atlas::layout {

using Point = Eigen::Vector2d;

struct LayoutParams {
    double width = 2000.0;
    double height = 1000.0;
    // Derived from the forest's member years when absent.
    std::optional<int> year_first;
    std::optional<int> year_last;
    double base_width = 40.0;
    double gap = 20.0;
    double min_hill_height = 4.0;
    int iterations = 300;
    std::uint64_t seed = 0;
    double glyph_width = 12.0;
    int tick_step = 100;
    // Overrides the forest's own LoD visibility when set.
    std::optional<std::size_t> lod;
};

// Throws std::invalid_argument for a degenerate year range or iterations < 1.
void validate(const LayoutParams& params);
// Fills in the year range from the forest when absent.
LayoutParams resolve(LayoutParams params, const lineage::InheritanceForest& forest);

// Linear, earliest year at the top (y = 0); years outside the range are clamped.
double vertical_scale(const LayoutParams& params, double year);

struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    // Open-interval test: touching edges do not count.
    bool intersects(const Box& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
    Box shifted(double dx) const { return {x0 + dx, y0, x1 + dx, y1}; }
};

struct Hill {
    lineage::UnitIndex unit = 0;
    double left = 0;       // x of the base's left end
    double width = 0;
    double top = 0;        // y of the peak (earliest member)
    double bottom = 0;     // y of the latest member
    double right() const { return left + width; }
    double height() const { return bottom - top; }
    Point peak() const { return {right(), top}; }
    // Padded to min_hill_height so degenerate hills still occupy space.
    Box box(double min_height) const { return {left, top, right(), std::max(bottom, top + min_height)}; }
    std::vector<Point> polygon() const;
};

enum class DotKind { painter, virtual_node };

struct Dot {
    std::string id;  // painter id or virtual node id
    DotKind kind = DotKind::painter;
    lineage::UnitIndex unit = 0;
    Point pos;
};

struct Mountain {
    lineage::ClusterIndex cluster = 0;
    lineage::UnitIndex root = 0;
    double x = 0;          // origin; hills are stored in local coordinates
    double width = 0;
    std::vector<Hill> hills;  // depth-first hierarchy order
    Box local_box;
    Box box() const { return local_box.shifted(x); }
};

// Hills of one tree in local coordinates, root at x = 0.
Mountain shape_hills(const lineage::InheritanceForest& forest, lineage::ClusterIndex cluster, const LayoutParams& params);

enum class EdgeKind { stream, ladder };

struct Edge {
    EdgeKind kind = EdgeKind::stream;
    lineage::UnitIndex source = 0;
    std::string target;                 // parent unit id, or anchor / virtual node id
    std::vector<Point> points;
    std::vector<bool> solid;            // one per segment
};

struct NameLabel {
    std::string painter_id;
    std::string text;
    Point anchor;
    Box box;
    bool emphasized = false;
    bool shown = true;
};

// Greedy sweep by (y, emphasized first, id); hides names whose box
// intersects an already shown one.
void declutter_names(std::vector<NameLabel>& names);

struct Tick {
    int year = 0;
    double y = 0;
};

struct MountainLayout {
    LayoutParams params;
    std::vector<Mountain> mountains;
    std::vector<Dot> dots;
    std::vector<Edge> edges;
    std::vector<NameLabel> names;
    std::vector<Tick> ticks;
    bool overflow = false;
    double extent_width = 0;  // rightmost mountain edge
};

// x origins for already shaped mountains; `links` holds one (a, b) pair per
// ladder between mountain indices a and b.
std::vector<double> place_mountains(const std::vector<Mountain>& mountains,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& links,
                                    const LayoutParams& params);

MountainLayout compute_layout(const lineage::InheritanceForest& forest, LayoutParams params = {});

nlohmann::json to_json(const MountainLayout& layout, const lineage::InheritanceForest& forest);
std::string to_svg(const MountainLayout& layout, const lineage::InheritanceForest& forest);

}  // namespace atlas::layout
