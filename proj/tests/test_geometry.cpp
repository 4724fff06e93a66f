#include <catch2/catch_amalgamated.hpp>

#include "agriconn/geometry.hpp"
#include "agriconn/rng.hpp"

using namespace agriconn;

namespace {

Polygon unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

}  // namespace

TEST_CASE("polygon basics") {
    const Polygon sq = unit_square();
    CHECK(polygon_area(sq) == Catch::Approx(1.0));
    CHECK(polygon_perimeter(sq) == Catch::Approx(4.0));
    const Point c = polygon_centroid(sq);
    CHECK(c.x == Catch::Approx(0.5));
    CHECK(c.y == Catch::Approx(0.5));
    CHECK(point_in_polygon({0.5, 0.5}, sq));
    CHECK(point_in_polygon({0.0, 0.5}, sq));  // border counts as inside
    CHECK_FALSE(point_in_polygon({1.5, 0.5}, sq));
}

TEST_CASE("voronoi partition of a unit square") {
    const Polygon sq = unit_square();

    SECTION("single seed returns the boundary itself") {
        const auto cells = voronoi_partition(sq, std::vector<Point>{{0.4, 0.6}});
        REQUIRE(cells.size() == 1);
        CHECK(polygon_area(cells[0]) == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("two symmetric seeds split at x = 0.5") {
        const std::vector<Point> seeds{{0.25, 0.5}, {0.75, 0.5}};
        const auto cells = voronoi_partition(sq, seeds);
        REQUIRE(cells.size() == 2);
        CHECK(polygon_area(cells[0]) == Catch::Approx(0.5).epsilon(1e-12));
        CHECK(polygon_area(cells[1]) == Catch::Approx(0.5).epsilon(1e-12));
        for (const Point& p : cells[0]) CHECK(p.x <= 0.5 + 1e-12);
        for (const Point& p : cells[1]) CHECK(p.x >= 0.5 - 1e-12);
    }

    SECTION("random seeds tile the square: area sums and seed containment") {
        RngStream rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Point> seeds;
            for (int k = 0; k < 5; ++k)
                seeds.push_back({rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)});
            const auto cells = voronoi_partition(sq, seeds);
            REQUIRE(cells.size() == 5);
            double total = 0.0;
            for (std::size_t k = 0; k < cells.size(); ++k) {
                REQUIRE(cells[k].size() >= 3);
                total += polygon_area(cells[k]);
                CHECK(point_in_polygon(seeds[k], cells[k]));
            }
            CHECK(total == Catch::Approx(1.0).epsilon(1e-9));
            // Interior disjointness: no cell centroid falls strictly inside another.
            for (std::size_t a = 0; a < cells.size(); ++a) {
                const Point c = polygon_centroid(cells[a]);
                for (std::size_t b = 0; b < cells.size(); ++b) {
                    if (a == b) continue;
                    CHECK_FALSE(point_in_polygon_strict(c, cells[b]));
                }
            }
        }
    }

    SECTION("invalid seeds are rejected") {
        CHECK_THROWS_AS(voronoi_partition(sq, std::vector<Point>{{2.0, 0.5}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            voronoi_partition(sq, std::vector<Point>{{0.5, 0.5}, {0.5, 0.5}}),
            std::invalid_argument);
    }
}

TEST_CASE("boundary arc splitting") {
    const Polygon sq{{0, 0}, {10, 0}, {10, 10}, {0, 10}};

    SECTION("square into four equal arcs") {
        const auto arcs = split_boundary_arcs(sq, 4);
        REQUIRE(arcs.size() == 4);
        for (const auto& arc : arcs) CHECK(polyline_length(arc) == Catch::Approx(10.0));
    }

    SECTION("arc lengths sum to the perimeter for odd counts") {
        for (int n : {1, 3, 5, 7}) {
            const auto arcs = split_boundary_arcs(sq, n);
            REQUIRE(arcs.size() == static_cast<std::size_t>(n));
            double total = 0.0;
            for (const auto& arc : arcs) total += polyline_length(arc);
            CHECK(total == Catch::Approx(polygon_perimeter(sq)).epsilon(1e-12));
        }
    }

    SECTION("irregular polygon conserves perimeter") {
        const Polygon tri{{0, 0}, {7, 1}, {2, 6}};
        const auto arcs = split_boundary_arcs(tri, 4);
        double total = 0.0;
        for (const auto& arc : arcs) total += polyline_length(arc);
        CHECK(total == Catch::Approx(polygon_perimeter(tri)).epsilon(1e-12));
    }
}

TEST_CASE("shape distances") {
    const Shape a = Shape::chain({{0, 0}, {1, 0}});
    const Shape b = Shape::chain({{1, 0}, {1, 1}});     // shares an endpoint
    const Shape c = Shape::chain({{0, 5}, {1, 5}});     // 5 away
    CHECK(shape_distance(a, b) == Catch::Approx(0.0).margin(1e-12));
    CHECK(shape_distance(a, c) == Catch::Approx(5.0));

    const Shape big = Shape::ring({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
    const Shape inner = Shape::ring({{4, 4}, {6, 4}, {6, 6}, {4, 6}});
    CHECK(shape_distance(big, inner) == 0.0);  // containment counts as contact
}

TEST_CASE("convex hull covers its input") {
    RngStream rng(7);
    std::vector<Point> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    const Polygon hull = convex_hull(pts);
    REQUIRE(hull.size() >= 3);
    for (const Point& p : pts) CHECK(point_in_polygon(p, hull));
}
