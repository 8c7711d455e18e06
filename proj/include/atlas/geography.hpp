#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace atlas::geo {

struct Province {
    std::string code;
    std::string name;
    double lat = 0.0;  // provincial capital, degrees
    double lon = 0.0;
};

// Province-code -> capital coordinates.
class Geography {
public:
    Geography() = default;
    explicit Geography(std::vector<Province> provinces);

    const std::vector<Province>& provinces() const noexcept { return provinces_; }
    const Province* find(std::string_view code) const;
    // Throws NotFoundError("unknown province code ...").
    const Province& require(std::string_view code) const;

    // Great-circle distance between the two capitals in km.
    double distance_km(std::string_view a, std::string_view b) const;

private:
    std::vector<Province> provinces_;
    std::unordered_map<std::string, std::size_t> index_;
};

double haversine_km(double lat1, double lon1, double lat2, double lon2);

// File format: {"provinces": [{"code", "name", "lat", "lon"}, ...]}
Geography load_geography(const std::filesystem::path& path);
Geography geography_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Geography& g);

const Geography& bundled_geography();

}  // namespace atlas::geo
