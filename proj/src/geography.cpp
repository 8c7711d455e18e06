#include "atlas/geography.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "atlas/error.hpp"

namespace atlas::geo {

Geography::Geography(std::vector<Province> provinces) : provinces_(std::move(provinces)) {
    for (std::size_t i = 0; i < provinces_.size(); ++i) {
        auto [it, fresh] = index_.emplace(provinces_[i].code, i);
        if (!fresh) throw ValidationError("duplicate province code " + provinces_[i].code);
    }
}

const Province* Geography::find(std::string_view code) const {
    auto it = index_.find(std::string(code));
    return it == index_.end() ? nullptr : &provinces_[it->second];
}

const Province& Geography::require(std::string_view code) const {
    if (const auto* p = find(code)) return *p;
    throw NotFoundError("unknown province code '" + std::string(code) + "'");
}

double Geography::distance_km(std::string_view a, std::string_view b) const {
    if (a == b) {
        require(a);
        return 0.0;
    }
    const auto& pa = require(a);
    const auto& pb = require(b);
    return haversine_km(pa.lat, pa.lon, pb.lat, pb.lon);
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0;
    constexpr double kRad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * kRad;
    const double dlon = (lon2 - lon1) * kRad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

Geography geography_from_json(const nlohmann::json& j) {
    try {
        std::vector<Province> out;
        for (const auto& p : j.at("provinces")) {
            out.push_back({p.at("code").get<std::string>(), p.value("name", std::string{}),
                           p.at("lat").get<double>(), p.at("lon").get<double>()});
        }
        return Geography(std::move(out));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("geography: ") + e.what());
    }
}

nlohmann::json to_json(const Geography& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : g.provinces()) {
        arr.push_back({{"code", p.code}, {"name", p.name}, {"lat", p.lat}, {"lon", p.lon}});
    }
    return {{"provinces", arr}};
}

Geography load_geography(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open geography file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return geography_from_json(j);
}

const Geography& bundled_geography() {
    static const Geography g({
        {"anhui", "Anhui", 31.82, 117.23},
        {"beijing", "Beijing", 39.90, 116.40},
        {"fujian", "Fujian", 26.07, 119.30},
        {"gansu", "Gansu", 36.06, 103.83},
        {"guangdong", "Guangdong", 23.13, 113.26},
        {"guangxi", "Guangxi", 22.82, 108.37},
        {"guizhou", "Guizhou", 26.65, 106.63},
        {"hebei", "Hebei", 38.04, 114.51},
        {"henan", "Henan", 34.75, 113.63},
        {"hubei", "Hubei", 30.59, 114.31},
        {"hunan", "Hunan", 28.23, 112.94},
        {"jiangsu", "Jiangsu", 32.06, 118.80},
        {"jiangxi", "Jiangxi", 28.68, 115.86},
        {"liaoning", "Liaoning", 41.80, 123.43},
        {"shaanxi", "Shaanxi", 34.34, 108.94},
        {"shandong", "Shandong", 36.65, 117.12},
        {"shanghai", "Shanghai", 31.23, 121.47},
        {"shanxi", "Shanxi", 37.87, 112.55},
        {"sichuan", "Sichuan", 30.57, 104.07},
        {"yunnan", "Yunnan", 25.04, 102.71},
        {"zhejiang", "Zhejiang", 30.27, 120.15},
    });
    return g;
}

}  // namespace atlas::geo
