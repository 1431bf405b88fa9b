#pragma once

#include "ppinv/common.hpp"
#include "ppinv/malliavin.hpp"
#include "ppinv/pointprocess.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ppinv {

// Random transformation tau : configurations x X -> Y.  prepare(omega) bakes
// the omega-dependent data once (hull, parity bit, maximum) and returns the
// pointwise map; apply is the one-shot form.
struct transformation {
    std::string name;
    intensity_measure source;
    intensity_measure target;
    std::function<std::function<point(const point&)>(const configuration&)> prepare;

    point apply(const configuration& omega, const point& x) const { return prepare(omega)(x); }
};

// Image configuration {tau(omega, x) : x in omega}.  Collisions between
// images signal a broken transformation (they are a.s. impossible under a
// diffuse intensity), as do images outside the target domain.
inline configuration pushforward(const transformation& tau, const configuration& omega) {
    auto map = tau.prepare(omega);
    std::vector<point> images;
    images.reserve(omega.size());
    for (const auto& x : omega.points()) {
        const point y = map(x);
        if (!contains(tau.target.domain(), y))
            throw numeric_error("pushforward: image outside the target domain");
        if (std::find(images.begin(), images.end(), y) != images.end())
            throw numeric_error("pushforward: image collision");
        images.push_back(y);
    }
    return configuration(std::move(images));
}

inline transformation make_identity(const intensity_measure& m) {
    transformation tau;
    tau.name = "identity";
    tau.source = m;
    tau.target = m;
    tau.prepare = [](const configuration&) {
        return [](const point& x) { return x; };
    };
    return tau;
}

// ---- predictable example: the half-interval block swap -----------------------

// Identity on [0, T/2); on [T/2, T) the two quarter blocks are swapped by
// translation iff the point count in [0, T/2) is odd.  The value at y never
// depends on points at or after y, so the map is predictable for the reversed
// order on the line and Lebesgue-preserving for every omega.
inline transformation make_halfswap(double period = 1.0) {
    if (period <= 0.0) throw config_error("halfswap: period must be positive");
    transformation tau;
    tau.name = "halfswap";
    tau.source = make_lebesgue_interval(0.0, period);
    tau.target = tau.source;
    tau.prepare = [period](const configuration& omega) {
        long lower = 0;
        for (const auto& p : omega.points())
            if (p.x() < period / 2.0) ++lower;
        const bool swap = (lower % 2) == 1;
        return [period, swap](const point& y) {
            if (!swap) return y;
            const double t = y.x();
            if (t >= period / 2.0 && t < 0.75 * period) return point(t + 0.25 * period);
            if (t >= 0.75 * period && t < period) return point(t - 0.25 * period);
            return y;
        };
    };
    return tau;
}

// ---- convex hull machinery -----------------------------------------------------

struct hull_data {
    configuration extreme_points;
    convex_polygon polygon;
    double area = 0.0;
    bool degenerate = true;
};

inline hull_data hull_of(const configuration& omega) {
    hull_data h;
    h.polygon = convex_hull_2d(omega.points());
    h.area = h.polygon.vertices.size() >= 3 ? polygon_area(h.polygon) : 0.0;
    h.degenerate = h.polygon.vertices.size() < 3 || h.area <= 0.0;
    h.extreme_points = configuration(h.polygon.vertices);
    return h;
}

// Triangular transport of the uniform law on a convex polygon to the uniform
// law on the unit square: u is the x-marginal CDF, v the conditional CDF
// along the vertical chord.  Both directions are closed-form per strip
// (piecewise-quadratic marginal); a guarded bisection refines the strip solve
// to cdf_tolerance.
class rosenblatt_map {
public:
    explicit rosenblatt_map(const convex_polygon& poly, double cdf_tolerance = 1e-12)
        : tol_(cdf_tolerance) {
        if (poly.vertices.size() < 3 || polygon_area(poly) <= 0.0)
            throw config_error("rosenblatt_map: degenerate polygon");
        std::vector<double> xs;
        for (const auto& v : poly.vertices) xs.push_back(v.x());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            strip s;
            s.xa = xs[i];
            s.xb = xs[i + 1];
            chord(poly, 0.5 * (s.xa + s.xb), s.xa, s.ylo_a, s.yhi_a);
            chord(poly, 0.5 * (s.xa + s.xb), s.xb, s.ylo_b, s.yhi_b);
            s.cum = total_;
            total_ += 0.5 * ((s.yhi_a - s.ylo_a) + (s.yhi_b - s.ylo_b)) * (s.xb - s.xa);
            strips_.push_back(s);
        }
    }

    double area() const { return total_; }

    // u-coordinates of the strip boundaries; the inverse map is smooth
    // strictly between consecutive values.
    std::vector<double> strip_u_boundaries() const {
        std::vector<double> out;
        out.reserve(strips_.size() + 1);
        for (const auto& s : strips_) out.push_back(s.cum / total_);
        out.push_back(1.0);
        return out;
    }

    // x-coordinates of the strip boundaries.
    std::vector<double> strip_x_boundaries() const {
        std::vector<double> out;
        out.reserve(strips_.size() + 1);
        for (const auto& s : strips_) out.push_back(s.xa);
        out.push_back(strips_.back().xb);
        return out;
    }

    // u of the x-marginal CDF at abscissa x.
    double marginal_u(double x) const {
        const strip& s = locate_x(x);
        const double dx = x - s.xa;
        const double wa = s.yhi_a - s.ylo_a;
        const double slope = (s.yhi_b - s.ylo_b - wa) / (s.xb - s.xa);
        return (s.cum + wa * dx + 0.5 * slope * dx * dx) / total_;
    }

    // vertical chord [ylo, yhi] at abscissa x.
    std::pair<double, double> chord_at(double x) const {
        const strip& s = locate_x(x);
        const double t = (x - s.xa) / (s.xb - s.xa);
        return {s.ylo_a + (s.ylo_b - s.ylo_a) * t, s.yhi_a + (s.yhi_b - s.yhi_a) * t};
    }

    // polygon interior -> (0,1)^2
    std::pair<double, double> forward(const point& p) const {
        const strip& s = locate_x(p.x());
        const double dx = p.x() - s.xa;
        const double wa = s.yhi_a - s.ylo_a;
        const double slope = (s.yhi_b - s.ylo_b - wa) / (s.xb - s.xa);
        const double partial = wa * dx + 0.5 * slope * dx * dx;
        const double u = (s.cum + partial) / total_;
        const double t = dx / (s.xb - s.xa);
        const double ylo = s.ylo_a + (s.ylo_b - s.ylo_a) * t;
        const double w = wa + slope * dx;
        const double v = w > 0.0 ? (p.y() - ylo) / w : 0.5;
        return {u, v};
    }

    // (0,1)^2 -> polygon
    point inverse(double u, double v) const {
        const double target = u * total_;
        const strip& s = locate_mass(target);
        const double wa = s.yhi_a - s.ylo_a;
        const double slope = (s.yhi_b - s.ylo_b - wa) / (s.xb - s.xa);
        const double rem = target - s.cum;
        double dx;
        if (std::abs(slope) < 1e-14 * std::max(1.0, wa)) {
            dx = wa > 0.0 ? rem / wa : 0.0;
        } else {
            const double disc = wa * wa + 2.0 * slope * rem;
            dx = (-wa + std::sqrt(std::max(0.0, disc))) / slope;
        }
        dx = std::clamp(dx, 0.0, s.xb - s.xa);
        // refine the strip mass equation to tolerance
        int iters = 0;
        double lo = 0.0, hi = s.xb - s.xa;
        auto mass_err = [&](double d) { return wa * d + 0.5 * slope * d * d - rem; };
        while (std::abs(mass_err(dx)) > tol_ * std::max(1.0, total_)) {
            if (++iters > 200)
                throw numeric_error("rosenblatt_map: inverse-CDF bisection did not converge");
            if (mass_err(dx) > 0.0) hi = dx; else lo = dx;
            dx = 0.5 * (lo + hi);
        }
        const double t = dx / (s.xb - s.xa);
        const double ylo = s.ylo_a + (s.ylo_b - s.ylo_a) * t;
        const double w = wa + slope * dx;
        return point(s.xa + dx, ylo + v * w);
    }

private:
    struct strip {
        double xa, xb;
        double ylo_a, yhi_a;
        double ylo_b, yhi_b;
        double cum;
    };

    // Vertical chord [ylo, yhi] of the polygon at abscissa x; mid resolves
    // which edges span the strip when x sits on a vertex.
    static void chord(const convex_polygon& poly, double mid, double x, double& ylo, double& yhi) {
        ylo = std::numeric_limits<double>::infinity();
        yhi = -std::numeric_limits<double>::infinity();
        const auto& v = poly.vertices;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const point& a = v[i];
            const point& b = v[(i + 1) % v.size()];
            const double x0 = std::min(a.x(), b.x());
            const double x1 = std::max(a.x(), b.x());
            if (mid < x0 || mid > x1 || x0 == x1) continue;
            const double t = (x - a.x()) / (b.x() - a.x());
            const double y = a.y() + t * (b.y() - a.y());
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
        if (!(ylo <= yhi)) { ylo = 0.0; yhi = 0.0; }
    }

    const strip& locate_x(double x) const {
        std::size_t lo = 0, hi = strips_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (x <= strips_[mid].xb) hi = mid; else lo = mid + 1;
        }
        return strips_[lo];
    }
    const strip& locate_mass(double target) const {
        std::size_t lo = 0, hi = strips_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            const double end = mid + 1 < strips_.size() ? strips_[mid + 1].cum : total_;
            if (target <= end) hi = mid; else lo = mid + 1;
        }
        return strips_[lo];
    }

    std::vector<strip> strips_;
    double total_ = 0.0;
    double tol_;
};

// ---- hull transformation ---------------------------------------------------------

// Shuffles the open hull interior through the Rosenblatt square with a fixed
// torus shift; extreme vertices and everything outside the open hull stay
// put, and the interior map depends on omega only through the hull polygon.
inline transformation make_hull_transform(double shift_u, double shift_v,
                                          double disk_radius = 1.0) {
    transformation tau;
    tau.name = "hull";
    tau.source = make_lebesgue_disk(disk_radius);
    tau.target = tau.source;
    tau.prepare = [shift_u, shift_v](const configuration& omega) -> std::function<point(const point&)> {
        hull_data h = hull_of(omega);
        if (h.degenerate) {
            return [](const point& x) { return x; };
        }
        auto rb = std::make_shared<rosenblatt_map>(h.polygon);
        auto poly = h.polygon;
        return [rb, poly, shift_u, shift_v](const point& x) -> point {
            if (!polygon_contains_open(poly, x)) return x;
            auto [u, v] = rb->forward(x);
            double su = u + shift_u - std::floor(u + shift_u);
            double sv = v + shift_v - std::floor(v + shift_v);
            return rb->inverse(su, sv);
        };
    };
    return tau;
}

// ---- negative control --------------------------------------------------------------

// Scales every point by the current maximum, pinning the largest image at 1;
// detectably non-Poisson even though each tau(omega, .) looks innocuous.
inline transformation make_negative_control(double a = 0.01) {
    transformation tau;
    tau.name = "negmax";
    tau.source = make_dx_over_x(a, 1.0);
    tau.target = tau.source;
    tau.prepare = [](const configuration& omega) -> std::function<point(const point&)> {
        if (omega.empty()) return [](const point& x) { return x; };
        const double mx = omega.points().back().x();
        return [mx](const point& x) { return point(x.x() / mx); };
    };
    return tau;
}

// ---- checkers ------------------------------------------------------------------------

// Draws a location from the normalized intensity by rejection.
inline point sample_point(const intensity_measure& m, rng_stream& rng) {
    const box bb = bounding_box(m.domain());
    for (;;) {
        point p;
        p.dim = bb.dim;
        for (int k = 0; k < bb.dim; ++k) p.c[k] = rng.uniform(bb.lo[k], bb.hi[k]);
        if (!contains(m.domain(), p)) continue;
        if (rng.uniform() * m.density_bound() > m.density(p)) continue;
        return p;
    }
}

struct cyclic_violation {
    configuration omega;
    std::vector<point> tuple;
};

// Samples (omega, t_1..t_k) and checks that some factor of the cyclic product
// D_{t_i} tau(omega, t_{i+1 mod k}) is the zero displacement.  "Zero" means
// exact equality of the two images, both branches computed from identical
// inputs.  k = 1 reads as the fixed-point-in-self condition D_t tau(omega,t) = 0.
inline std::optional<cyclic_violation> cyclic_check(const transformation& tau, int k, long trials,
                                                    rng_stream& rng) {
    if (k < 1 || k > 5) throw config_error("cyclic_check: need 1 <= k <= 5");
    for (long trial = 0; trial < trials; ++trial) {
        const configuration omega = sample_poisson(tau.source, rng);
        std::vector<point> t;
        while (static_cast<int>(t.size()) < k) {
            point p = sample_point(tau.source, rng);
            if (std::find(t.begin(), t.end(), p) == t.end() && !omega.contains(p)) t.push_back(p);
        }
        auto base = tau.prepare(omega);
        bool some_factor_zero = false;
        for (int i = 0; i < k && !some_factor_zero; ++i) {
            const point& ti = t[i];
            const point& tj = t[(i + 1) % k];
            auto shifted = tau.prepare(omega.with(ti));
            some_factor_zero = shifted(tj) == base(tj);
        }
        if (!some_factor_zero) return cyclic_violation{omega, t};
    }
    return std::nullopt;
}

struct preservation_report {
    std::vector<double> errors; // relative error per test function
    double tolerance = 0.0;
    bool preserved = false;
};

// Pointwise (per-omega) intensity preservation: integral of h(tau(omega, .))
// against sigma versus the integral of h against mu, by quadrature on the
// measures' own node sets.
inline preservation_report intensity_preservation_check(
    const transformation& tau, const configuration& omega,
    const std::vector<std::function<double(const point&)>>& test_functions, double tolerance) {
    auto map = tau.prepare(omega);
    preservation_report rep;
    rep.tolerance = tolerance;
    rep.preserved = true;
    for (const auto& h : test_functions) {
        const double lhs = integrate(tau.source, [&](const point& x) { return h(map(x)); });
        const double rhs = integrate(tau.target, h);
        const double err = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
        rep.errors.push_back(err);
        if (err > tolerance) rep.preserved = false;
    }
    return rep;
}

} // namespace ppinv
