#pragma once

#include <string>
#include <vector>

#include "agriconn/generator.hpp"
#include "agriconn/landscape.hpp"
#include "agriconn/params.hpp"

namespace testutil {

using namespace agriconn;

inline Polygon square_at(double x, double y, double side) {
    return {{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}};
}

inline Plot make_plot(int id, int farm_id, PlotKind kind, Polygon geom,
                      const std::string& label, double base_yield) {
    Plot p;
    p.id = id;
    p.farm_id = farm_id;
    p.kind = kind;
    p.label = label;
    p.geometry = std::move(geom);
    p.base_yield = base_yield;
    finalize_plot(p);
    return p;
}

struct PlotSpec {
    PlotKind kind = PlotKind::Agricultural;
    std::string label = "Spring wheat";
    double base_yield = 2.0;
    double x = 0.0;       // lower-left corner, meters
    double y = 0.0;
    double side = 100.0;  // 100 m square = 1 ha
    int farm_id = 0;
};

inline LandscapeConfiguration make_config(const std::vector<PlotSpec>& specs,
                                          double d_neib = 1000.0) {
    LandscapeConfiguration config;
    std::map<int, Farm> farms;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const PlotSpec& s = specs[i];
        config.plots.push_back(make_plot(static_cast<int>(i), s.farm_id, s.kind,
                                         square_at(s.x, s.y, s.side), s.label, s.base_yield));
        farms[s.farm_id].plot_ids.push_back(static_cast<int>(i));
    }
    for (auto& [fid, farm] : farms) {
        farm.id = fid;
        std::vector<Point> pts;
        for (int pid : farm.plot_ids) {
            const auto& g = config.plots[static_cast<std::size_t>(pid)].geometry;
            pts.insert(pts.end(), g.begin(), g.end());
        }
        farm.boundary = convex_hull(std::move(pts));
        config.farms.push_back(farm);
    }
    refresh_spatial_index(config, d_neib);
    return config;
}

// Isolated single-plot configuration, far from everything.
inline LandscapeConfiguration single_plot(const std::string& label, double base_yield,
                                          double side = 100.0) {
    return make_config({PlotSpec{PlotKind::Agricultural, label, base_yield, 0.0, 0.0, side, 0}});
}

// A small random configuration with n_plots plots on a loose grid; roughly a
// third of the plots become habitat.
inline LandscapeConfiguration random_config(RngStream& rng, int n_plots, double d_neib = 1000.0) {
    const std::vector<std::string> crops{kCropLabels.begin(), kCropLabels.end()};
    std::vector<PlotSpec> specs;
    for (int i = 0; i < n_plots; ++i) {
        PlotSpec s;
        const bool habitat = rng.uniform() < 0.3 && i > 0;
        s.kind = habitat ? PlotKind::Habitat : PlotKind::Agricultural;
        s.label = habitat ? "Grassland" : crops[static_cast<std::size_t>(
                                              rng.uniform_int(0, static_cast<int>(crops.size()) - 1))];
        s.base_yield = habitat ? 0.0 : rng.uniform(0.5, 8.0);
        s.x = rng.uniform(0.0, 1500.0);
        s.y = rng.uniform(0.0, 1500.0);
        s.side = rng.uniform(60.0, 220.0);
        s.farm_id = i % 2;
        specs.push_back(s);
    }
    return make_config(specs, d_neib);
}

}  // namespace testutil
