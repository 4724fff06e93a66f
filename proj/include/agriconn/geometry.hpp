#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "agriconn/rng.hpp"

namespace agriconn {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point p) { return std::sqrt(dot(p, p)); }
inline double distance(Point a, Point b) { return norm(a - b); }

// Vertex list; the closing edge back to the first vertex is implicit.
using Polygon = std::vector<Point>;
// Open chain of vertices.
using Polyline = std::vector<Point>;

inline double polygon_signed_area(const Polygon& poly) {
    double acc = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

inline double polygon_area(const Polygon& poly) { return std::abs(polygon_signed_area(poly)); }

inline double polygon_perimeter(const Polygon& poly) {
    double acc = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) acc += distance(poly[i], poly[(i + 1) % n]);
    return acc;
}

inline double polyline_length(const Polyline& line) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) acc += distance(line[i], line[i + 1]);
    return acc;
}

inline Point polygon_centroid(const Polygon& poly) {
    const std::size_t n = poly.size();
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double w = cross(p, q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::abs(a) < 1e-300) {
        // Degenerate ring: fall back to the vertex mean.
        Point m{0.0, 0.0};
        for (const Point& p : poly) m = m + p;
        return {m.x / static_cast<double>(n), m.y / static_cast<double>(n)};
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
}

inline Point polyline_centroid(const Polyline& line) {
    double len = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double l = distance(line[i], line[i + 1]);
        len += l;
        cx += 0.5 * (line[i].x + line[i + 1].x) * l;
        cy += 0.5 * (line[i].y + line[i + 1].y) * l;
    }
    if (len < 1e-300) return line.empty() ? Point{} : line.front();
    return {cx / len, cy / len};
}

// Even-odd rule; points on the border count as inside.
inline bool point_in_polygon(Point p, const Polygon& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        // Border check against this edge.
        const Point ab = b - a;
        const Point ap = p - a;
        const double c = cross(ab, ap);
        if (std::abs(c) < 1e-9 && dot(ap, p - b) <= 1e-9) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

inline double segment_point_distance(Point a, Point b, Point p);

// Inside and farther than eps from every edge.
inline bool point_in_polygon_strict(Point p, const Polygon& poly, double eps = 1e-9) {
    if (!point_in_polygon(p, poly)) return false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segment_point_distance(poly[i], poly[(i + 1) % n], p) <= eps) return false;
    }
    return true;
}

// Keeps the region where dot(normal, p) - offset <= 0 (Sutherland-Hodgman step).
inline Polygon clip_halfplane(const Polygon& poly, Point normal, double offset) {
    Polygon out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        const double fa = dot(normal, a) - offset;
        const double fb = dot(normal, b) - offset;
        if (fa <= 0.0) {
            out.push_back(a);
            if (fb > 0.0) {
                const double t = fa / (fa - fb);
                out.push_back(a + t * (b - a));
            }
        } else if (fb <= 0.0) {
            const double t = fa / (fa - fb);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

// Removes consecutive duplicates and collinear interior vertices.
inline Polygon simplify_ring(const Polygon& poly, double eps = 1e-9) {
    Polygon out;
    for (const Point& p : poly) {
        if (out.empty() || distance(out.back(), p) > eps) out.push_back(p);
    }
    while (out.size() > 1 && distance(out.front(), out.back()) <= eps) out.pop_back();
    return out;
}

// Voronoi cell of seeds[k] clipped to `boundary`: successive bisector half-plane cuts.
inline Polygon voronoi_cell(const Polygon& boundary, std::span<const Point> seeds, std::size_t k) {
    Polygon cell = boundary;
    const Point sk = seeds[k];
    for (std::size_t j = 0; j < seeds.size(); ++j) {
        if (j == k) continue;
        const Point sj = seeds[j];
        const Point n = sj - sk;
        const double offset = 0.5 * (dot(sj, sj) - dot(sk, sk));
        cell = clip_halfplane(cell, n, offset);
        if (cell.size() < 3) break;
    }
    return simplify_ring(cell);
}

// Partition `boundary` into one cell per seed. Throws std::invalid_argument on
// duplicate seeds or seeds outside the boundary.
inline std::vector<Polygon> voronoi_partition(const Polygon& boundary,
                                              std::span<const Point> seeds) {
    if (boundary.size() < 3) throw std::invalid_argument("voronoi_partition: degenerate boundary");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!point_in_polygon(seeds[i], boundary))
            throw std::invalid_argument("voronoi_partition: seed outside boundary");
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            if (distance(seeds[i], seeds[j]) < 1e-9)
                throw std::invalid_argument("voronoi_partition: duplicate seeds");
        }
    }
    std::vector<Polygon> cells(seeds.size());
    for (std::size_t k = 0; k < seeds.size(); ++k) cells[k] = voronoi_cell(boundary, seeds, k);
    return cells;
}

inline double segment_point_distance(Point a, Point b, Point p) {
    const Point ab = b - a;
    const double l2 = dot(ab, ab);
    if (l2 <= 0.0) return distance(a, p);
    const double t = std::clamp(dot(p - a, ab) / l2, 0.0, 1.0);
    return distance(a + t * ab, p);
}

inline bool segments_intersect(Point a, Point b, Point c, Point d) {
    const auto orient = [](Point p, Point q, Point r) { return cross(q - p, r - p); };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
        o4 != 0)
        return true;
    return false;
}

inline double segment_segment_distance(Point a, Point b, Point c, Point d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min(std::min(segment_point_distance(a, b, c), segment_point_distance(a, b, d)),
                    std::min(segment_point_distance(c, d, a), segment_point_distance(c, d, b)));
}

// A piece of geometry used for structural distance queries: a polygon ring
// (closed, filled) or an open chain.
struct Shape {
    std::vector<Point> pts;
    bool closed = false;

    static Shape ring(Polygon p) { return Shape{std::move(p), true}; }
    static Shape chain(Polyline p) { return Shape{std::move(p), false}; }

    std::size_t edge_count() const {
        if (pts.size() < 2) return 0;
        return closed ? pts.size() : pts.size() - 1;
    }
    std::pair<Point, Point> edge(std::size_t i) const {
        return {pts[i], pts[(i + 1) % pts.size()]};
    }
};

// Minimum Euclidean distance between two shapes; 0 when they touch or overlap.
inline double shape_distance(const Shape& a, const Shape& b) {
    if (a.pts.empty() || b.pts.empty()) return std::numeric_limits<double>::infinity();
    if (a.closed && a.pts.size() >= 3 && point_in_polygon(b.pts[0], a.pts)) return 0.0;
    if (b.closed && b.pts.size() >= 3 && point_in_polygon(a.pts[0], b.pts)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t ne_a = a.edge_count(), ne_b = b.edge_count();
    if (ne_a == 0 || ne_b == 0) {
        if (ne_a == 0 && ne_b == 0) return distance(a.pts[0], b.pts[0]);
        const Shape& seg = ne_a == 0 ? b : a;
        const Point p = ne_a == 0 ? a.pts[0] : b.pts[0];
        for (std::size_t i = 0; i < seg.edge_count(); ++i) {
            auto [s, t] = seg.edge(i);
            best = std::min(best, segment_point_distance(s, t, p));
        }
        return best;
    }
    for (std::size_t i = 0; i < ne_a; ++i) {
        auto [p1, p2] = a.edge(i);
        for (std::size_t j = 0; j < ne_b; ++j) {
            auto [q1, q2] = b.edge(j);
            best = std::min(best, segment_segment_distance(p1, p2, q1, q2));
            if (best == 0.0) return 0.0;
        }
    }
    return best;
}

// Splits the boundary of `poly` into `n` arcs of equal arc length, starting at
// vertex 0. Arc endpoints are interpolated along edges.
inline std::vector<Polyline> split_boundary_arcs(const Polygon& poly, int n) {
    if (n < 1) throw std::invalid_argument("split_boundary_arcs: n < 1");
    const std::size_t nv = poly.size();
    std::vector<double> cum(nv + 1, 0.0);
    for (std::size_t i = 0; i < nv; ++i)
        cum[i + 1] = cum[i] + distance(poly[i], poly[(i + 1) % nv]);
    const double total = cum[nv];
    if (total <= 0.0) throw std::invalid_argument("split_boundary_arcs: zero perimeter");

    const auto point_at = [&](double s) -> Point {
        s = std::clamp(s, 0.0, total);
        const std::size_t i = static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), s) - cum.begin());
        const std::size_t e = std::min(i == 0 ? 0 : i - 1, nv - 1);
        const double elen = cum[e + 1] - cum[e];
        const double t = elen > 0.0 ? (s - cum[e]) / elen : 0.0;
        return poly[e] + t * (poly[(e + 1) % nv] - poly[e]);
    };

    std::vector<Polyline> arcs;
    arcs.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double s0 = total * static_cast<double>(k) / static_cast<double>(n);
        const double s1 = total * static_cast<double>(k + 1) / static_cast<double>(n);
        Polyline arc;
        arc.push_back(point_at(s0));
        for (std::size_t v = 1; v < nv; ++v) {
            if (cum[v] > s0 + 1e-12 && cum[v] < s1 - 1e-12) arc.push_back(poly[v]);
        }
        arc.push_back(point_at(s1));
        arcs.push_back(std::move(arc));
    }
    return arcs;
}

inline Polygon convex_hull(std::vector<Point> pts) {
    if (pts.size() < 3) return pts;
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Uniform sample inside a polygon by rejection from its bounding box.
inline Point sample_point_in_polygon(const Polygon& poly, RngStream& rng, int max_tries = 10000) {
    double xmin = poly[0].x, xmax = poly[0].x, ymin = poly[0].y, ymax = poly[0].y;
    for (const Point& p : poly) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    for (int i = 0; i < max_tries; ++i) {
        const Point p{rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)};
        if (point_in_polygon(p, poly)) return p;
    }
    return polygon_centroid(poly);
}

}  // namespace agriconn
