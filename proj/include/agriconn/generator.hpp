#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agriconn/landscape.hpp"
#include "agriconn/rng.hpp"

namespace agriconn {

struct YieldDistribution {
    double mean = 3.0;  // t/ha
    double sd = 0.8;
    double floor = kMinCropYield;
};

// Synthetic landscape generator settings. Label weights and yield
// distributions are free choices and can be overridden from the config file.
struct GeneratorConfig {
    int n_configs = 500;
    int farms_min = 5;
    int farms_max = 10;
    int plots_min = 5;
    int plots_max = 10;
    double p_agricultural = 0.6;
    double p_habitat = 0.4;
    std::vector<std::string> crop_labels{kCropLabels.begin(), kCropLabels.end()};
    std::vector<double> crop_weights{0.15, 0.10, 0.05, 0.30, 0.10, 0.30};
    std::vector<std::string> habitat_labels{kHabitatLabels.begin(), kHabitatLabels.end()};
    std::vector<double> habitat_weights{0.15, 0.10, 0.05, 0.30, 0.10, 0.10, 0.20};
    std::map<std::string, YieldDistribution> yields{
        {"Soybeans", {2.8, 0.7, kMinCropYield}},  {"Oats", {3.2, 0.8, kMinCropYield}},
        {"Corn", {9.5, 1.5, kMinCropYield}},      {"Canola/rapeseed", {2.4, 0.6, kMinCropYield}},
        {"Barley", {3.8, 0.9, kMinCropYield}},    {"Spring wheat", {3.5, 0.8, kMinCropYield}},
    };
    double boundary_width = 6000.0;   // meters
    double boundary_height = 6000.0;  // meters
    double d_neib = 1000.0;           // meters, for the precomputed neighbor sets
    std::uint64_t seed = 0;

    void validate() const {
        if (n_configs < 0) throw std::invalid_argument("generator: n_configs < 0");
        if (farms_min < 1 || farms_max < farms_min)
            throw std::invalid_argument("generator: bad farm count range");
        if (plots_min < 1 || plots_max < plots_min)
            throw std::invalid_argument("generator: bad plot count range");
        if (std::abs(p_agricultural + p_habitat - 1.0) > 1e-9)
            throw std::invalid_argument("generator: kind probabilities must sum to 1");
        if (p_agricultural < 0.0 || p_habitat < 0.0)
            throw std::invalid_argument("generator: negative kind probability");
        if (crop_labels.size() != crop_weights.size() || crop_labels.empty())
            throw std::invalid_argument("generator: crop labels/weights mismatch");
        if (habitat_labels.size() != habitat_weights.size() || habitat_labels.empty())
            throw std::invalid_argument("generator: habitat labels/weights mismatch");
        double wc = 0.0, wh = 0.0;
        for (double w : crop_weights) {
            if (w < 0.0) throw std::invalid_argument("generator: negative crop weight");
            wc += w;
        }
        for (double w : habitat_weights) {
            if (w < 0.0) throw std::invalid_argument("generator: negative habitat weight");
            wh += w;
        }
        if (wc <= 0.0 || wh <= 0.0)
            throw std::invalid_argument("generator: weights not normalizable");
        if (boundary_width <= 0.0 || boundary_height <= 0.0)
            throw std::invalid_argument("generator: empty boundary");
        if (d_neib < 0.0) throw std::invalid_argument("generator: negative d_neib");
    }
};

namespace detail {

// Distinct seed points for a Voronoi partition; duplicates are re-jittered.
inline std::vector<Point> sample_voronoi_seeds(const Polygon& boundary, int count,
                                               RngStream& rng) {
    std::vector<Point> seeds;
    seeds.reserve(static_cast<std::size_t>(count));
    int guard = 0;
    while (static_cast<int>(seeds.size()) < count) {
        Point p = sample_point_in_polygon(boundary, rng);
        bool ok = true;
        for (const Point& q : seeds) {
            if (distance(p, q) < 1e-6) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            p.x += rng.uniform(-1e-3, 1e-3);
            p.y += rng.uniform(-1e-3, 1e-3);
            ok = point_in_polygon(p, boundary);
            for (const Point& q : seeds) ok = ok && distance(p, q) >= 1e-6;
        }
        if (ok) seeds.push_back(p);
        if (++guard > 100 * count + 1000)
            throw std::runtime_error("voronoi seed sampling failed to converge");
    }
    return seeds;
}

}  // namespace detail

// Builds one synthetic configuration: a rectangle split into farms by Voronoi
// tessellation, each farm split into plots the same way, then labels and
// yields drawn per plot. Deterministic for a fixed seed.
inline LandscapeConfiguration generate_configuration(const GeneratorConfig& gen,
                                                     std::uint64_t seed, int config_id = 0) {
    gen.validate();
    RngStream rng(seed);
    const Polygon boundary{{0.0, 0.0},
                           {gen.boundary_width, 0.0},
                           {gen.boundary_width, gen.boundary_height},
                           {0.0, gen.boundary_height}};

    LandscapeConfiguration config;
    config.config_id = config_id;
    config.rng_seed = seed;

    const int n_farms = rng.uniform_int(gen.farms_min, gen.farms_max);
    const auto farm_seeds = detail::sample_voronoi_seeds(boundary, n_farms, rng);
    const auto farm_cells = voronoi_partition(boundary, farm_seeds);

    for (int f = 0; f < n_farms; ++f) {
        Farm farm;
        farm.id = f;
        farm.boundary = farm_cells[static_cast<std::size_t>(f)];

        const int n_plots = rng.uniform_int(gen.plots_min, gen.plots_max);
        const auto plot_seeds = detail::sample_voronoi_seeds(farm.boundary, n_plots, rng);
        const auto plot_cells = voronoi_partition(farm.boundary, plot_seeds);

        for (int p = 0; p < n_plots; ++p) {
            Plot plot;
            plot.id = static_cast<int>(config.plots.size());
            plot.farm_id = f;
            plot.geometry = plot_cells[static_cast<std::size_t>(p)];
            const bool agricultural = rng.uniform() < gen.p_agricultural;
            if (agricultural) {
                plot.kind = PlotKind::Agricultural;
                const std::size_t c = rng.weighted_choice(gen.crop_weights);
                plot.label = gen.crop_labels[c];
                const auto it = gen.yields.find(plot.label);
                const YieldDistribution dist =
                    it != gen.yields.end() ? it->second : YieldDistribution{};
                plot.base_yield = std::max(dist.floor, rng.normal(dist.mean, dist.sd));
            } else {
                plot.kind = PlotKind::Habitat;
                const std::size_t c = rng.weighted_choice(gen.habitat_weights);
                plot.label = gen.habitat_labels[c];
                plot.base_yield = 0.0;
            }
            finalize_plot(plot);
            farm.plot_ids.push_back(plot.id);
            config.plots.push_back(std::move(plot));
        }
        config.farms.push_back(std::move(farm));
    }

    refresh_spatial_index(config, gen.d_neib);
    return config;
}

inline std::vector<LandscapeConfiguration> generate_configurations(const GeneratorConfig& gen) {
    std::vector<LandscapeConfiguration> configs;
    configs.reserve(static_cast<std::size_t>(gen.n_configs));
    for (int k = 0; k < gen.n_configs; ++k) {
        const std::uint64_t seed = derive_seed(gen.seed, "generate", static_cast<std::uint64_t>(k));
        configs.push_back(generate_configuration(gen, seed, k));
    }
    return configs;
}

}  // namespace agriconn
