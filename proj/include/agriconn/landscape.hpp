#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agriconn/geometry.hpp"

namespace agriconn {

enum class PlotKind { Agricultural, Habitat };

inline constexpr std::array<const char*, 6> kCropLabels = {
    "Soybeans", "Oats", "Corn", "Canola/rapeseed", "Barley", "Spring wheat"};
inline constexpr std::array<const char*, 7> kHabitatLabels = {
    "Broadleaf", "Coniferous", "Exposed land/barren", "Grassland", "Shrubland", "Water", "Wetland"};

inline constexpr double kMinCropYield = 0.5;  // t/ha floor for agricultural plots
inline constexpr double kSqMetersPerHectare = 10000.0;
inline constexpr double kTouchTolerance = 1e-6;  // meters; "touching" geometry test

inline bool is_crop_label(const std::string& label) {
    for (const char* c : kCropLabels)
        if (label == c) return true;
    return false;
}

inline bool is_habitat_label(const std::string& label) {
    for (const char* c : kHabitatLabels)
        if (label == c) return true;
    return false;
}

struct Plot {
    int id = -1;
    int farm_id = -1;
    PlotKind kind = PlotKind::Agricultural;
    std::string label;
    Polygon geometry;       // planar meters
    double area = 0.0;      // hectares
    double perimeter = 0.0; // meters
    Point centroid;
    double base_yield = 0.0;  // t/ha; 0 for habitat plots

    bool agricultural() const { return kind == PlotKind::Agricultural; }
};

struct Farm {
    int id = -1;
    std::vector<int> plot_ids;
    Polygon boundary;
};

// Fills in derived fields from the raw polygon and enforces kind invariants.
inline void finalize_plot(Plot& plot) {
    if (plot.geometry.size() < 3) throw std::invalid_argument("plot polygon is degenerate");
    const double area_m2 = polygon_area(plot.geometry);
    if (area_m2 <= 0.0) throw std::invalid_argument("plot polygon has zero area");
    plot.area = area_m2 / kSqMetersPerHectare;
    plot.perimeter = polygon_perimeter(plot.geometry);
    plot.centroid = polygon_centroid(plot.geometry);
    if (plot.kind == PlotKind::Habitat) {
        plot.base_yield = 0.0;
    } else if (plot.base_yield < kMinCropYield) {
        plot.base_yield = kMinCropYield;
    }
}

struct LandscapeConfiguration {
    int config_id = 0;
    std::uint64_t rng_seed = 0;
    double d_neib = 1000.0;  // meters, neighbor threshold baked into neighbor_sets
    std::vector<Farm> farms;
    std::vector<Plot> plots;  // plot.id == index
    std::vector<double> distance_matrix;       // row-major n x n, centroid distances
    std::vector<std::vector<int>> neighbor_sets;

    std::size_t n_plots() const { return plots.size(); }
    double dist(int i, int j) const {
        return distance_matrix[static_cast<std::size_t>(i) * plots.size() +
                               static_cast<std::size_t>(j)];
    }
    const Farm* farm_by_id(int id) const {
        for (const Farm& f : farms)
            if (f.id == id) return &f;
        return nullptr;
    }
};

inline void compute_distance_matrix(LandscapeConfiguration& config) {
    const std::size_t n = config.plots.size();
    config.distance_matrix.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(config.plots[i].centroid, config.plots[j].centroid);
            config.distance_matrix[i * n + j] = d;
            config.distance_matrix[j * n + i] = d;
        }
    }
}

// N(i) = { j != i : d_ij <= d_neib }. Habitat neighbors are recovered from
// plot kinds where needed.
inline std::vector<std::vector<int>> compute_neighbors(const LandscapeConfiguration& config,
                                                       double d_neib) {
    if (d_neib < 0.0) throw std::invalid_argument("compute_neighbors: negative d_neib");
    if (config.distance_matrix.empty() && !config.plots.empty())
        throw std::invalid_argument("compute_neighbors: distance matrix missing");
    const std::size_t n = config.plots.size();
    std::vector<std::vector<int>> sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (config.distance_matrix[i * n + j] <= d_neib)
                sets[i].push_back(static_cast<int>(j));
        }
    }
    return sets;
}

inline void refresh_spatial_index(LandscapeConfiguration& config, double d_neib) {
    config.d_neib = d_neib;
    compute_distance_matrix(config);
    config.neighbor_sets = compute_neighbors(config, d_neib);
}

inline bool plots_touch(const Plot& a, const Plot& b, double tol = kTouchTolerance) {
    return shape_distance(Shape::ring(a.geometry), Shape::ring(b.geometry)) <= tol;
}

// Result of grouping farms into configurations: connected groups within the
// size window plus any groups that could not reach min_size.
struct FarmGrouping {
    std::vector<LandscapeConfiguration> configurations;
    std::vector<LandscapeConfiguration> undersized;
};

namespace detail {

inline LandscapeConfiguration make_config_from_farms(const std::vector<Farm>& farms,
                                                     const std::vector<Plot>& plots,
                                                     std::span<const int> farm_indices,
                                                     int config_id, double d_neib) {
    LandscapeConfiguration out;
    out.config_id = config_id;
    for (int fi : farm_indices) {
        Farm farm = farms[static_cast<std::size_t>(fi)];
        std::vector<int> new_ids;
        for (int pid : farm.plot_ids) {
            Plot plot = plots[static_cast<std::size_t>(pid)];
            const int new_id = static_cast<int>(out.plots.size());
            plot.id = new_id;
            out.plots.push_back(std::move(plot));
            new_ids.push_back(new_id);
        }
        farm.plot_ids = std::move(new_ids);
        out.farms.push_back(std::move(farm));
    }
    refresh_spatial_index(out, d_neib);
    return out;
}

}  // namespace detail

// Groups farms into connected configurations by breadth-first traversal over
// the touching-boundary adjacency graph. Groups are cut at max_size; groups
// smaller than min_size are reported in `undersized`, never dropped.
inline FarmGrouping group_farms(const std::vector<Farm>& farms, const std::vector<Plot>& plots,
                                int min_size = 2, int max_size = 10, double d_neib = 1000.0) {
    const std::size_t nf = farms.size();
    std::vector<std::vector<int>> adj(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = i + 1; j < nf; ++j) {
            bool touch = false;
            for (int pa : farms[i].plot_ids) {
                for (int pb : farms[j].plot_ids) {
                    if (plots_touch(plots[static_cast<std::size_t>(pa)],
                                    plots[static_cast<std::size_t>(pb)])) {
                        touch = true;
                        break;
                    }
                }
                if (touch) break;
            }
            if (touch) {
                adj[i].push_back(static_cast<int>(j));
                adj[j].push_back(static_cast<int>(i));
            }
        }
    }

    FarmGrouping grouping;
    std::vector<bool> visited(nf, false);
    int next_config = 0;
    for (std::size_t start = 0; start < nf; ++start) {
        if (visited[start]) continue;
        std::vector<int> group;
        std::queue<int> frontier;
        frontier.push(static_cast<int>(start));
        visited[start] = true;
        while (!frontier.empty() && static_cast<int>(group.size()) < max_size) {
            const int cur = frontier.front();
            frontier.pop();
            group.push_back(cur);
            for (int nb : adj[static_cast<std::size_t>(cur)]) {
                if (!visited[static_cast<std::size_t>(nb)]) {
                    visited[static_cast<std::size_t>(nb)] = true;
                    frontier.push(nb);
                }
            }
        }
        // Farms queued but not admitted are released back for later groups.
        while (!frontier.empty()) {
            visited[static_cast<std::size_t>(frontier.front())] = false;
            frontier.pop();
        }
        auto config =
            detail::make_config_from_farms(farms, plots, group, next_config++, d_neib);
        if (static_cast<int>(group.size()) >= min_size)
            grouping.configurations.push_back(std::move(config));
        else
            grouping.undersized.push_back(std::move(config));
    }
    return grouping;
}

}  // namespace agriconn
