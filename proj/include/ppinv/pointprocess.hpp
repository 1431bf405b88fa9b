#pragma once

#include "ppinv/common.hpp"
#include "ppinv/geometry.hpp"
#include "ppinv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ppinv {

// ---- configurations --------------------------------------------------------

// Finite set of distinct points kept in canonical (lexicographic) order, so
// value equality is well defined and insert-then-remove round-trips exactly.
class configuration {
public:
    configuration() = default;
    explicit configuration(std::vector<point> pts) : pts_(std::move(pts)) {
        std::sort(pts_.begin(), pts_.end());
        pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
    }

    const std::vector<point>& points() const { return pts_; }
    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }

    bool contains(const point& p) const {
        return std::binary_search(pts_.begin(), pts_.end(), p);
    }

    // eps+ at the configuration level; adding an occupied point is a no-op.
    configuration with(const point& p) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
        if (it != pts_.end() && *it == p) return *this;
        configuration out;
        out.pts_.reserve(pts_.size() + 1);
        out.pts_.insert(out.pts_.end(), pts_.begin(), it);
        out.pts_.push_back(p);
        out.pts_.insert(out.pts_.end(), it, pts_.end());
        return out;
    }

    configuration without(const point& p) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
        if (it == pts_.end() || !(*it == p)) return *this;
        configuration out;
        out.pts_.reserve(pts_.size() - 1);
        out.pts_.insert(out.pts_.end(), pts_.begin(), it);
        out.pts_.insert(out.pts_.end(), it + 1, pts_.end());
        return out;
    }

    friend bool operator==(const configuration& a, const configuration& b) {
        return a.pts_ == b.pts_;
    }
    friend bool operator!=(const configuration& a, const configuration& b) {
        return !(a == b);
    }

private:
    std::vector<point> pts_;
};

inline long counting(const configuration& omega, const region& a) {
    long n = 0;
    for (const auto& p : omega.points())
        if (contains(a, p)) ++n;
    return n;
}

inline std::string to_csv(const configuration& omega) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& p : omega.points()) {
        os << p.c[0];
        for (int i = 1; i < p.dim; ++i) os << "," << p.c[i];
        os << "\n";
    }
    return os.str();
}

// ---- quadrature -------------------------------------------------------------

enum class quadrature_kind { gauss_legendre, midpoint, halton };

struct quadrature_scheme {
    quadrature_kind kind = quadrature_kind::gauss_legendre;
    int nodes_per_axis = 1024;

    std::string id() const {
        const char* k = kind == quadrature_kind::gauss_legendre ? "gauss_legendre"
                      : kind == quadrature_kind::midpoint       ? "midpoint"
                                                                : "halton";
        return std::string(k) + "/" + std::to_string(nodes_per_axis);
    }
};

struct weighted_node {
    point x;
    double w; // Lebesgue weight; the measure folds its density in separately
};

namespace detail {

// 16-point Gauss-Legendre rule on [-1, 1].
inline const std::array<double, 8> gl16_x = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline const std::array<double, 8> gl16_w = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// 1D nodes on [a,b]: composite 16-point GL panels or plain midpoints.
inline std::vector<std::pair<double, double>> axis_nodes(double a, double b,
                                                         const quadrature_scheme& s) {
    std::vector<std::pair<double, double>> out;
    if (s.kind == quadrature_kind::midpoint || s.kind == quadrature_kind::halton) {
        const int n = s.nodes_per_axis;
        const double h = (b - a) / n;
        out.reserve(n);
        for (int i = 0; i < n; ++i) out.emplace_back(a + (i + 0.5) * h, h);
        return out;
    }
    const int panels = std::max(1, s.nodes_per_axis / 16);
    const double h = (b - a) / panels;
    out.reserve(panels * 16);
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < 8; ++i) {
            const double dx = 0.5 * h * gl16_x[i];
            const double w = 0.5 * h * gl16_w[i];
            out.emplace_back(mid - dx, w);
            out.emplace_back(mid + dx, w);
        }
    }
    return out;
}

inline double van_der_corput(std::uint64_t n, std::uint64_t base) {
    double v = 0.0, denom = 1.0;
    while (n) {
        denom *= base;
        v += static_cast<double>(n % base) / denom;
        n /= base;
    }
    return v;
}

inline void append_triangle_nodes(const point& a, const point& b, const point& c,
                                  int per_axis, std::vector<weighted_node>& out) {
    // Collapsed-square map x(t,v) = (1-t) a + t ((1-v) b + v c), Jacobian
    // 2 area t; smooth product GL in (t, v).
    const double area2 = cross2(a, b, c); // 2 * signed area
    quadrature_scheme s;
    s.nodes_per_axis = per_axis;
    const auto tn = axis_nodes(0.0, 1.0, s);
    for (const auto& [t, wt] : tn) {
        for (const auto& [v, wv] : tn) {
            point x(a.x() + t * ((1 - v) * b.x() + v * c.x() - a.x()),
                    a.y() + t * ((1 - v) * b.y() + v * c.y() - a.y()));
            out.push_back({x, wt * wv * t * std::abs(area2)});
        }
    }
}

inline std::vector<weighted_node> build_nodes(const region& r, const quadrature_scheme& s) {
    std::vector<weighted_node> out;
    const int d = region_dim(r);

    if (s.kind == quadrature_kind::halton) {
        const box bb = bounding_box(r);
        std::uint64_t total = 1;
        for (int i = 0; i < d; ++i) total *= s.nodes_per_axis;
        double vol = 1.0;
        for (int i = 0; i < d; ++i) vol *= bb.hi[i] - bb.lo[i];
        const std::uint64_t bases[3] = {2, 3, 5};
        for (std::uint64_t k = 1; k <= total; ++k) {
            point x;
            x.dim = d;
            for (int i = 0; i < d; ++i)
                x.c[i] = bb.lo[i] + (bb.hi[i] - bb.lo[i]) * van_der_corput(k, bases[i]);
            if (contains(r, x)) out.push_back({x, vol / static_cast<double>(total)});
        }
        return out;
    }

    std::visit(
        [&](const auto& shape) {
            using T = std::decay_t<decltype(shape)>;
            if constexpr (std::is_same_v<T, box>) {
                if (shape.dim == 1) {
                    for (const auto& [x, w] : axis_nodes(shape.lo[0], shape.hi[0], s)) {
                        point p(x);
                        out.push_back({p, w});
                    }
                } else {
                    const auto xs = axis_nodes(shape.lo[0], shape.hi[0], s);
                    const auto ys = axis_nodes(shape.lo[1], shape.hi[1], s);
                    if (shape.dim == 2) {
                        for (const auto& [x, wx] : xs)
                            for (const auto& [y, wy] : ys)
                                out.push_back({point(x, y), wx * wy});
                    } else {
                        const auto zs = axis_nodes(shape.lo[2], shape.hi[2], s);
                        for (const auto& [x, wx] : xs)
                            for (const auto& [y, wy] : ys)
                                for (const auto& [z, wz] : zs)
                                    out.push_back({point(x, y, z), wx * wy * wz});
                    }
                }
            } else if constexpr (std::is_same_v<T, ball>) {
                if (shape.center.dim == 1) {
                    for (const auto& [x, w] : axis_nodes(shape.center.c[0] - shape.radius,
                                                         shape.center.c[0] + shape.radius, s))
                        out.push_back({point(x), w});
                    return;
                }
                if (shape.center.dim != 2)
                    throw config_error("quadrature: balls supported for d <= 2");
                // Area-true polar product grid: s = r^2, dA = (1/2) ds dtheta.
                const double r2 = shape.radius * shape.radius;
                const auto sn = axis_nodes(0.0, r2, s);
                const auto tn = axis_nodes(0.0, 2.0 * M_PI, s);
                for (const auto& [sv, ws] : sn) {
                    const double rr = std::sqrt(sv);
                    for (const auto& [th, wt] : tn) {
                        point p(shape.center.x() + rr * std::cos(th),
                                shape.center.y() + rr * std::sin(th));
                        out.push_back({p, 0.5 * ws * wt});
                    }
                }
            } else {
                const auto& v = shape.vertices;
                if (v.size() < 3) throw config_error("quadrature: degenerate polygon");
                double cx = 0, cy = 0;
                for (const auto& p : v) { cx += p.x(); cy += p.y(); }
                point centroid(cx / v.size(), cy / v.size());
                for (std::size_t i = 0; i < v.size(); ++i)
                    append_triangle_nodes(centroid, v[i], v[(i + 1) % v.size()],
                                          s.nodes_per_axis, out);
            }
        },
        r);
    return out;
}

} // namespace detail

// ---- intensity measures -----------------------------------------------------

// Diffuse intensity on a compact window: domain, density, cached quadrature
// nodes (density folded into the weights) and total mass.  Values are
// immutable and freely shareable; the cached node set guarantees that the two
// sides of any identity check integrate against identical nodes.
class intensity_measure {
public:
    intensity_measure() = default;

    intensity_measure(std::string name, region domain,
                      std::function<double(const point&)> density, double density_bound,
                      quadrature_scheme scheme)
        : name_(std::move(name)), domain_(std::move(domain)), density_(std::move(density)),
          density_bound_(density_bound), scheme_(scheme) {
        auto nodes = detail::build_nodes(domain_, scheme_);
        double mass = 0.0;
        for (auto& n : nodes) {
            const double rho = density_(n.x);
            if (!(rho >= 0.0) || !std::isfinite(rho))
                throw config_error("intensity_measure: density must be finite and >= 0");
            n.w *= rho;
            mass += n.w;
        }
        nodes_ = std::make_shared<const std::vector<weighted_node>>(std::move(nodes));
        total_mass_ = mass;
        if (!std::isfinite(total_mass_) || total_mass_ < 0.0)
            throw config_error("intensity_measure: total mass must be finite");
    }

    const std::string& name() const { return name_; }
    const region& domain() const { return domain_; }
    double total_mass() const { return total_mass_; }
    double density(const point& p) const { return density_(p); }
    double density_bound() const { return density_bound_; }
    const quadrature_scheme& scheme() const { return scheme_; }
    const std::vector<weighted_node>& nodes() const { return *nodes_; }

private:
    std::string name_;
    region domain_;
    std::function<double(const point&)> density_;
    double density_bound_ = 1.0;
    quadrature_scheme scheme_;
    std::shared_ptr<const std::vector<weighted_node>> nodes_;
    double total_mass_ = 0.0;
};

// Deterministic quadrature of f against the measure; scheme and node count
// come from the measure itself.
inline double integrate(const intensity_measure& m, const std::function<double(const point&)>& f) {
    double acc = 0.0, comp = 0.0; // Neumaier compensation
    for (const auto& n : m.nodes()) {
        const double v = n.w * f(n.x);
        if (!std::isfinite(v)) throw numeric_error("integrate: non-finite integrand value");
        const double t = acc + v;
        comp += (std::abs(acc) >= std::abs(v)) ? (acc - t) + v : (v - t) + acc;
        acc = t;
    }
    return acc + comp;
}

// Simultaneous quadrature of f, f^2, ..., f^maxpow with one f evaluation per
// node; out[k] = integral of f^{k} for k = 1..maxpow (out[0] = total mass).
inline std::vector<double> integrate_powers(const intensity_measure& m,
                                            const std::function<double(const point&)>& f,
                                            int maxpow) {
    std::vector<double> acc(maxpow + 1, 0.0);
    for (const auto& n : m.nodes()) {
        const double v = f(n.x);
        if (!std::isfinite(v)) throw numeric_error("integrate_powers: non-finite integrand");
        double pw = 1.0;
        for (int k = 0; k <= maxpow; ++k) {
            acc[k] += n.w * pw;
            pw *= v;
        }
    }
    return acc;
}

// Poisson sample: count ~ Poisson(total mass), locations i.i.d. from the
// normalized density via rejection from the bounding box.  Exact collisions
// (a probability-zero event under a diffuse intensity) are resampled.
inline configuration sample_poisson(const intensity_measure& m, rng_stream& rng) {
    if (!std::isfinite(m.total_mass()) || m.total_mass() < 0.0)
        throw numeric_error("sample_poisson: invalid total mass");
    if (m.total_mass() == 0.0) return {};

    const long n = rng.poisson(m.total_mass());
    const box bb = bounding_box(m.domain());
    std::vector<point> pts;
    pts.reserve(n);
    for (long i = 0; i < n; ++i) {
        for (;;) {
            point p;
            p.dim = bb.dim;
            for (int k = 0; k < bb.dim; ++k) p.c[k] = rng.uniform(bb.lo[k], bb.hi[k]);
            if (!contains(m.domain(), p)) continue;
            if (rng.uniform() * m.density_bound() > m.density(p)) continue;
            if (std::find(pts.begin(), pts.end(), p) != pts.end()) continue;
            pts.push_back(p);
            break;
        }
    }
    return configuration(std::move(pts));
}

// ---- measure catalog ----------------------------------------------------------

// Default node budget: 2^10 along the line, 2^6 per axis in the plane.
inline quadrature_scheme default_scheme(int dim) {
    quadrature_scheme s;
    s.nodes_per_axis = dim == 1 ? 1024 : 64;
    return s;
}

inline intensity_measure make_lebesgue_interval(double a, double b,
                                                quadrature_scheme s = default_scheme(1)) {
    return intensity_measure("lebesgue", box::interval(a, b),
                             [](const point&) { return 1.0; }, 1.0, s);
}

// sigma(dx) = dx / x on [a, b], 0 < a < b.
inline intensity_measure make_dx_over_x(double a, double b,
                                        quadrature_scheme s = default_scheme(1)) {
    if (a <= 0.0) throw config_error("dx_over_x: left endpoint must be positive");
    return intensity_measure("dx_over_x", box::interval(a, b),
                             [](const point& p) { return 1.0 / p.x(); }, 1.0 / a, s);
}

inline intensity_measure make_lebesgue_disk(double radius = 1.0,
                                            quadrature_scheme s = default_scheme(2)) {
    return intensity_measure("lebesgue_disk", ball::disk(radius),
                             [](const point&) { return 1.0; }, 1.0, s);
}

} // namespace ppinv
