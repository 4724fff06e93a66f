#include <catch2/catch_amalgamated.hpp>

#include "agriconn/generator.hpp"
#include "agriconn/geojson.hpp"
#include "agriconn/landscape.hpp"

using namespace agriconn;

namespace {

Plot make_plot(int id, int farm_id, PlotKind kind, Polygon geom, double base_yield = 2.0) {
    Plot p;
    p.id = id;
    p.farm_id = farm_id;
    p.kind = kind;
    p.label = kind == PlotKind::Agricultural ? "Spring wheat" : "Grassland";
    p.geometry = std::move(geom);
    p.base_yield = base_yield;
    finalize_plot(p);
    return p;
}

Polygon square_at(double x, double y, double side) {
    return {{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}};
}

// A row of `n` touching unit-square farms, one plot each.
std::pair<std::vector<Farm>, std::vector<Plot>> farm_chain(int n) {
    std::vector<Farm> farms;
    std::vector<Plot> plots;
    for (int i = 0; i < n; ++i) {
        plots.push_back(make_plot(i, i, PlotKind::Agricultural, square_at(100.0 * i, 0, 100.0)));
        Farm f;
        f.id = i;
        f.plot_ids = {i};
        f.boundary = plots.back().geometry;
        farms.push_back(std::move(f));
    }
    return {farms, plots};
}

}  // namespace

TEST_CASE("generator determinism") {
    GeneratorConfig gen;
    gen.boundary_width = 3000.0;
    gen.boundary_height = 3000.0;
    const auto a = generate_configuration(gen, 1234u);
    const auto b = generate_configuration(gen, 1234u);
    REQUIRE(a.plots.size() == b.plots.size());
    CHECK(save_configuration(a) == save_configuration(b));
    const auto c = generate_configuration(gen, 1235u);
    CHECK(save_configuration(a) != save_configuration(c));
}

TEST_CASE("generator respects structural ranges") {
    GeneratorConfig gen;
    gen.boundary_width = 4000.0;
    gen.boundary_height = 4000.0;
    int total_plots = 0;
    int agricultural = 0;
    for (int k = 0; k < 60; ++k) {
        const auto config = generate_configuration(gen, derive_seed(9, "t", k));
        CHECK(config.farms.size() >= 5);
        CHECK(config.farms.size() <= 10);
        double covered = 0.0;
        for (const Farm& farm : config.farms) {
            CHECK(farm.plot_ids.size() >= 5);
            CHECK(farm.plot_ids.size() <= 10);
            covered += polygon_area(farm.boundary);
        }
        CHECK(covered == Catch::Approx(gen.boundary_width * gen.boundary_height).epsilon(1e-9));
        for (const Plot& plot : config.plots) {
            ++total_plots;
            if (plot.agricultural()) {
                ++agricultural;
                CHECK(plot.base_yield >= kMinCropYield);
                CHECK(is_crop_label(plot.label));
            } else {
                CHECK(plot.base_yield == 0.0);
                CHECK(is_habitat_label(plot.label));
            }
        }
    }
    const double frac = static_cast<double>(agricultural) / total_plots;
    CHECK(frac > 0.54);
    CHECK(frac < 0.66);
}

TEST_CASE("distance matrix sanity and neighbor symmetry") {
    GeneratorConfig gen;
    gen.boundary_width = 3000.0;
    gen.boundary_height = 3000.0;
    const auto config = generate_configuration(gen, 77u);
    const std::size_t n = config.plots.size();
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(config.dist(static_cast<int>(i), static_cast<int>(i)) == 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(config.dist(static_cast<int>(i), static_cast<int>(j)) >= 0.0);
            CHECK(config.dist(static_cast<int>(i), static_cast<int>(j)) ==
                  config.dist(static_cast<int>(j), static_cast<int>(i)));
        }
    }
    // Triangle inequality on sampled triples.
    RngStream rng(5);
    for (int s = 0; s < 200; ++s) {
        const int i = rng.uniform_int(0, static_cast<int>(n) - 1);
        const int j = rng.uniform_int(0, static_cast<int>(n) - 1);
        const int k = rng.uniform_int(0, static_cast<int>(n) - 1);
        CHECK(config.dist(i, k) <= config.dist(i, j) + config.dist(j, k) + 1e-9);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : config.neighbor_sets[i]) {
            const auto& back = config.neighbor_sets[static_cast<std::size_t>(j)];
            CHECK(std::find(back.begin(), back.end(), static_cast<int>(i)) != back.end());
        }
    }
}

TEST_CASE("compute_neighbors thresholds") {
    LandscapeConfiguration config;
    // Three collinear plots at x = 0, 800, 1600.
    for (int i = 0; i < 3; ++i) {
        config.plots.push_back(make_plot(i, 0, PlotKind::Agricultural,
                                         square_at(800.0 * i - 5.0, -5.0, 10.0)));
    }
    Farm f;
    f.id = 0;
    f.plot_ids = {0, 1, 2};
    config.farms.push_back(f);
    compute_distance_matrix(config);

    SECTION("zero distance yields empty sets") {
        const auto sets = compute_neighbors(config, 0.0);
        for (const auto& s : sets) CHECK(s.empty());
    }
    SECTION("huge distance yields complete sets") {
        const auto sets = compute_neighbors(config, 1e12);
        for (const auto& s : sets) CHECK(s.size() == 2);
    }
    SECTION("1000 m window on a 800 m chain") {
        const auto sets = compute_neighbors(config, 1000.0);
        CHECK(sets[0].size() == 1);
        CHECK(sets[1].size() == 2);
        CHECK(sets[2].size() == 1);
    }
    SECTION("negative threshold rejected") {
        CHECK_THROWS_AS(compute_neighbors(config, -1.0), std::invalid_argument);
    }
}

TEST_CASE("farm grouping by BFS over touching farms") {
    SECTION("four mutually touching farms form one configuration") {
        std::vector<Farm> farms;
        std::vector<Plot> plots;
        // 2x2 grid of touching squares.
        int id = 0;
        for (int gx = 0; gx < 2; ++gx) {
            for (int gy = 0; gy < 2; ++gy) {
                plots.push_back(make_plot(id, id, PlotKind::Agricultural,
                                          square_at(100.0 * gx, 100.0 * gy, 100.0)));
                Farm f;
                f.id = id;
                f.plot_ids = {id};
                f.boundary = plots.back().geometry;
                farms.push_back(f);
                ++id;
            }
        }
        const auto grouping = group_farms(farms, plots, 2, 10);
        REQUIRE(grouping.configurations.size() == 1);
        CHECK(grouping.configurations[0].farms.size() == 4);
        CHECK(grouping.undersized.empty());
    }

    SECTION("chain of 12 splits into 10 + 2") {
        auto [farms, plots] = farm_chain(12);
        const auto grouping = group_farms(farms, plots, 2, 10);
        REQUIRE(grouping.configurations.size() == 2);
        CHECK(grouping.configurations[0].farms.size() == 10);
        CHECK(grouping.configurations[1].farms.size() == 2);
    }

    SECTION("disjoint farms are reported as undersized, not dropped") {
        std::vector<Farm> farms;
        std::vector<Plot> plots;
        plots.push_back(make_plot(0, 0, PlotKind::Agricultural, square_at(0, 0, 100.0)));
        plots.push_back(make_plot(1, 1, PlotKind::Agricultural, square_at(500, 0, 100.0)));
        for (int i = 0; i < 2; ++i) {
            Farm f;
            f.id = i;
            f.plot_ids = {i};
            f.boundary = plots[static_cast<std::size_t>(i)].geometry;
            farms.push_back(f);
        }
        const auto grouping = group_farms(farms, plots, 2, 10);
        CHECK(grouping.configurations.empty());
        REQUIRE(grouping.undersized.size() == 2);
        CHECK(grouping.undersized[0].farms.size() == 1);
        CHECK(grouping.undersized[1].farms.size() == 1);
    }
}

TEST_CASE("geojson round trip") {
    GeneratorConfig gen;
    gen.boundary_width = 2500.0;
    gen.boundary_height = 2500.0;
    const auto config = generate_configuration(gen, 99u);
    const std::string text = save_configuration(config);
    const auto loaded = load_configuration(text, gen.d_neib, config.config_id);
    REQUIRE(loaded.plots.size() == config.plots.size());
    for (std::size_t i = 0; i < config.plots.size(); ++i) {
        const Plot& a = config.plots[i];
        const Plot& b = loaded.plots[i];
        CHECK(a.farm_id == b.farm_id);
        CHECK(a.kind == b.kind);
        CHECK(a.label == b.label);
        CHECK(a.base_yield == b.base_yield);
        REQUIRE(a.geometry.size() == b.geometry.size());
        for (std::size_t v = 0; v < a.geometry.size(); ++v)
            CHECK(distance(a.geometry[v], b.geometry[v]) < 1e-9);
    }
    // Serialization is stable end to end.
    CHECK(save_configuration(loaded) == text);
}

TEST_CASE("geojson loader schema rules") {
    SECTION("agricultural yield floor is applied") {
        const std::string text = R"({
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[0,0],[100,0],[100,100],[0,100],[0,0]]]},
            "properties": {"farm_id": 0, "kind": "agricultural",
                           "label": "Oats", "yield": 0.0}
          }]
        })";
        const auto config = load_configuration(text);
        REQUIRE(config.plots.size() == 1);
        CHECK(config.plots[0].base_yield == kMinCropYield);
    }

    SECTION("habitat yield forced to zero") {
        const std::string text = R"({
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[0,0],[100,0],[100,100],[0,100],[0,0]]]},
            "properties": {"farm_id": 0, "kind": "habitat",
                           "label": "Wetland", "yield": 3.0}
          }]
        })";
        const auto config = load_configuration(text);
        CHECK(config.plots[0].base_yield == 0.0);
    }

    SECTION("missing kind names the offending feature") {
        const std::string text = R"({
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[0,0],[100,0],[100,100],[0,100],[0,0]]]},
            "properties": {"farm_id": 0, "label": "Oats", "yield": 1.0}
          }]
        })";
        CHECK_THROWS_WITH(load_configuration(text),
                          Catch::Matchers::ContainsSubstring("feature 0"));
    }

    SECTION("self-intersecting polygon rejected") {
        const std::string text = R"({
          "type": "FeatureCollection",
          "features": [{
            "type": "Feature",
            "geometry": {"type": "Polygon",
                         "coordinates": [[[0,0],[100,100],[100,0],[0,100],[0,0]]]},
            "properties": {"farm_id": 0, "kind": "agricultural",
                           "label": "Oats", "yield": 1.0}
          }]
        })";
        CHECK_THROWS_AS(load_configuration(text), SchemaError);
    }

    SECTION("malformed JSON rejected") {
        CHECK_THROWS_AS(load_configuration("{not json"), SchemaError);
    }
}
