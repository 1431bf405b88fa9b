#pragma once

#include "ppinv/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>
#include <vector>

namespace ppinv {

// Point of the ambient space, d in {1,2,3}.  Comparison is lexicographic so
// configurations have a canonical order.
struct point {
    int dim = 1;
    std::array<double, 3> c{0.0, 0.0, 0.0};

    point() = default;
    explicit point(double x) : dim(1), c{x, 0.0, 0.0} {}
    point(double x, double y) : dim(2), c{x, y, 0.0} {}
    point(double x, double y, double z) : dim(3), c{x, y, z} {}

    double x() const { return c[0]; }
    double y() const { return c[1]; }

    friend bool operator==(const point& a, const point& b) {
        return a.dim == b.dim && a.c == b.c;
    }
    friend bool operator!=(const point& a, const point& b) { return !(a == b); }
    friend bool operator<(const point& a, const point& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        return a.c < b.c;
    }

    bool finite() const {
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(c[i])) return false;
        return true;
    }
};

inline double dist2(const point& a, const point& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) {
        const double d = a.c[i] - b.c[i];
        s += d * d;
    }
    return s;
}

// ---- region descriptors --------------------------------------------------

struct box {
    int dim = 1;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};

    static box interval(double a, double b) {
        box r;
        r.dim = 1;
        r.lo = {a, 0, 0};
        r.hi = {b, 0, 0};
        return r;
    }
    static box rect(double ax, double bx, double ay, double by) {
        box r;
        r.dim = 2;
        r.lo = {ax, ay, 0};
        r.hi = {bx, by, 0};
        return r;
    }
};

struct ball {
    point center;
    double radius = 1.0;
    static ball disk(double radius = 1.0) {
        ball b;
        b.center = point(0.0, 0.0);
        b.radius = radius;
        return b;
    }
};

// Convex polygon in the plane, vertices in counter-clockwise order.
struct convex_polygon {
    std::vector<point> vertices;
};

using region = std::variant<box, ball, convex_polygon>;

inline double cross2(const point& o, const point& a, const point& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

inline double polygon_area(const convex_polygon& poly) {
    const auto& v = poly.vertices;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % v.size()];
        s += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * s;
}

// Strictly inside the open polygon: every edge turn strictly positive.
inline bool polygon_contains_open(const convex_polygon& poly, const point& p) {
    const auto& v = poly.vertices;
    if (v.size() < 3) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (cross2(v[i], v[(i + 1) % v.size()], p) <= 0.0) return false;
    return true;
}

inline bool polygon_contains_closed(const convex_polygon& poly, const point& p) {
    const auto& v = poly.vertices;
    if (v.size() < 3) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (cross2(v[i], v[(i + 1) % v.size()], p) < 0.0) return false;
    return true;
}

inline bool contains(const region& r, const point& p) {
    return std::visit(
        [&](const auto& shape) -> bool {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, box>) {
                for (int i = 0; i < shape.dim; ++i)
                    if (p.c[i] < shape.lo[i] || p.c[i] > shape.hi[i]) return false;
                return true;
            } else if constexpr (std::is_same_v<T, ball>) {
                return dist2(p, shape.center) <= shape.radius * shape.radius;
            } else {
                return polygon_contains_closed(shape, p);
            }
        },
        r);
}

inline int region_dim(const region& r) {
    return std::visit(
        [](const auto& shape) -> int {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, box>) return shape.dim;
            else if constexpr (std::is_same_v<T, ball>) return shape.center.dim;
            else return 2;
        },
        r);
}

inline box bounding_box(const region& r) {
    return std::visit(
        [](const auto& shape) -> box {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, box>) {
                return shape;
            } else if constexpr (std::is_same_v<T, ball>) {
                box b;
                b.dim = shape.center.dim;
                for (int i = 0; i < b.dim; ++i) {
                    b.lo[i] = shape.center.c[i] - shape.radius;
                    b.hi[i] = shape.center.c[i] + shape.radius;
                }
                return b;
            } else {
                box b;
                b.dim = 2;
                b.lo = {shape.vertices[0].x(), shape.vertices[0].y(), 0};
                b.hi = b.lo;
                for (const auto& v : shape.vertices) {
                    b.lo[0] = std::min(b.lo[0], v.x());
                    b.lo[1] = std::min(b.lo[1], v.y());
                    b.hi[0] = std::max(b.hi[0], v.x());
                    b.hi[1] = std::max(b.hi[1], v.y());
                }
                return b;
            }
        },
        r);
}

// Planar convex hull, Andrew's monotone chain.  Collinear non-vertex points
// are dropped, so the returned CCW vertex list holds exactly the extreme
// points of the input.
inline convex_polygon convex_hull_2d(std::vector<point> pts) {
    convex_polygon out;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) {
        out.vertices = pts;
        return out;
    }
    std::vector<point> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    out.vertices = std::move(h);
    return out;
}

} // namespace ppinv
