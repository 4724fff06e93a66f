#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "agriconn/landscape.hpp"

namespace agriconn {

// Schema violation in a landscape file; message names the offending feature.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline bool polygon_is_simple(const Polygon& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a1 = poly[i];
        const Point a2 = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges sharing a vertex (adjacent in the ring).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Point b1 = poly[j];
            const Point b2 = poly[(j + 1) % n];
            if (segments_intersect(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

}  // namespace detail

// One Feature per plot: Polygon geometry in planar meters, properties
// {farm_id, kind, label, yield}.
inline std::string save_configuration(const LandscapeConfiguration& config) {
    nlohmann::ordered_json root;
    root["type"] = "FeatureCollection";
    auto& features = root["features"];
    features = nlohmann::ordered_json::array();
    for (const Plot& plot : config.plots) {
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        auto ring = nlohmann::ordered_json::array();
        for (const Point& p : plot.geometry) ring.push_back({p.x, p.y});
        ring.push_back({plot.geometry.front().x, plot.geometry.front().y});
        feature["geometry"] = {{"type", "Polygon"},
                               {"coordinates", nlohmann::ordered_json::array({ring})}};
        feature["properties"] = {{"farm_id", plot.farm_id},
                                 {"kind", plot.agricultural() ? "agricultural" : "habitat"},
                                 {"label", plot.label},
                                 {"yield", plot.base_yield}};
        features.push_back(std::move(feature));
    }
    return root.dump(2) + "\n";
}

inline LandscapeConfiguration load_configuration(const std::string& geojson_bytes,
                                                 double d_neib = 1000.0, int config_id = 0) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(geojson_bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object() || root.value("type", "") != "FeatureCollection" ||
        !root.contains("features") || !root["features"].is_array())
        throw SchemaError("not a GeoJSON FeatureCollection");

    LandscapeConfiguration config;
    config.config_id = config_id;
    std::map<int, Farm> farms;

    const auto& features = root["features"];
    for (std::size_t idx = 0; idx < features.size(); ++idx) {
        const auto& feature = features[idx];
        const std::string at = "feature " + std::to_string(idx);
        if (!feature.is_object() || feature.value("type", "") != "Feature")
            throw SchemaError(at + ": not a Feature");
        if (!feature.contains("geometry") || !feature["geometry"].is_object())
            throw SchemaError(at + ": missing geometry");
        const auto& geom = feature["geometry"];
        if (geom.value("type", "") != "Polygon")
            throw SchemaError(at + ": geometry type must be Polygon");
        if (!geom.contains("coordinates") || !geom["coordinates"].is_array() ||
            geom["coordinates"].empty())
            throw SchemaError(at + ": missing polygon coordinates");
        if (!feature.contains("properties") || !feature["properties"].is_object())
            throw SchemaError(at + ": missing properties");
        const auto& props = feature["properties"];
        for (const char* key : {"farm_id", "kind", "label", "yield"}) {
            if (!props.contains(key))
                throw SchemaError(at + ": missing property \"" + key + "\"");
        }

        Plot plot;
        plot.id = static_cast<int>(idx);
        if (!props["farm_id"].is_number_integer())
            throw SchemaError(at + ": farm_id must be an integer");
        plot.farm_id = props["farm_id"].get<int>();
        const std::string kind = props["kind"].get<std::string>();
        if (kind == "agricultural")
            plot.kind = PlotKind::Agricultural;
        else if (kind == "habitat")
            plot.kind = PlotKind::Habitat;
        else
            throw SchemaError(at + ": unknown kind \"" + kind + "\"");
        plot.label = props["label"].get<std::string>();
        if (plot.agricultural() && !is_crop_label(plot.label))
            throw SchemaError(at + ": label \"" + plot.label + "\" is not a crop");
        if (!plot.agricultural() && !is_habitat_label(plot.label))
            throw SchemaError(at + ": label \"" + plot.label + "\" is not a habitat class");
        if (!props["yield"].is_number()) throw SchemaError(at + ": yield must be a number");
        plot.base_yield = props["yield"].get<double>();

        const auto& ring = geom["coordinates"][0];
        if (!ring.is_array() || ring.size() < 4)
            throw SchemaError(at + ": polygon ring needs at least 4 positions");
        for (const auto& pos : ring) {
            if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
                throw SchemaError(at + ": bad coordinate position");
            plot.geometry.push_back({pos[0].get<double>(), pos[1].get<double>()});
        }
        // GeoJSON rings repeat the first position at the end.
        if (distance(plot.geometry.front(), plot.geometry.back()) < 1e-12)
            plot.geometry.pop_back();
        if (plot.geometry.size() < 3 || polygon_area(plot.geometry) <= 0.0)
            throw SchemaError(at + ": degenerate polygon");
        if (!detail::polygon_is_simple(plot.geometry))
            throw SchemaError(at + ": self-intersecting polygon");

        finalize_plot(plot);  // applies the yield floor / habitat zero-yield rule
        farms[plot.farm_id].plot_ids.push_back(plot.id);
        config.plots.push_back(std::move(plot));
    }

    for (auto& [fid, farm] : farms) {
        farm.id = fid;
        std::vector<Point> pts;
        for (int pid : farm.plot_ids) {
            const auto& g = config.plots[static_cast<std::size_t>(pid)].geometry;
            pts.insert(pts.end(), g.begin(), g.end());
        }
        farm.boundary = convex_hull(std::move(pts));
        config.farms.push_back(std::move(farm));
    }

    refresh_spatial_index(config, d_neib);
    return config;
}

}  // namespace agriconn
