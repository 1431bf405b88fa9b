#include "ppinv/transforms.hpp"

#include "ppinv/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace ppinv;

namespace {

// Brute-force extremality: p is extreme in omega iff p is not inside the
// closed hull of the other points (degenerate hulls handled by segment /
// point membership).
bool extreme_bruteforce(const configuration& omega, const point& p) {
    std::vector<point> others;
    for (const auto& q : omega.points())
        if (!(q == p)) others.push_back(q);
    if (others.size() < 2) return true;
    auto hull = convex_hull_2d(others);
    if (hull.vertices.size() >= 3) return !polygon_contains_closed(hull, p);
    // collinear others: p extreme unless it lies on the segment
    const point& a = hull.vertices.front();
    const point& b = hull.vertices.back();
    if (std::abs(cross2(a, b, p)) > 0.0) return true;
    const double t = std::abs(b.x() - a.x()) > std::abs(b.y() - a.y())
                         ? (p.x() - a.x()) / (b.x() - a.x())
                         : (p.y() - a.y()) / (b.y() - a.y());
    return t < 0.0 || t > 1.0;
}

point sample_in_polygon(const convex_polygon& poly, rng_stream& rng) {
    const box bb = bounding_box(convex_polygon(poly));
    for (;;) {
        point p(rng.uniform(bb.lo[0], bb.hi[0]), rng.uniform(bb.lo[1], bb.hi[1]));
        if (polygon_contains_open(poly, p)) return p;
    }
}

} // namespace

TEST_CASE("pushforward identity") {
    auto m = make_lebesgue_interval(0, 1);
    auto id = make_identity(m);
    rng_stream rng(3, 0);
    for (int i = 0; i < 20; ++i) {
        auto w = sample_poisson(m, rng);
        CHECK(pushforward(id, w) == w);
    }
}

TEST_CASE("halfswap pointwise behaviour") {
    auto tau = make_halfswap(1.0);

    configuration even({point(0.1), point(0.3)});
    for (double y : {0.1, 0.55, 0.8, 0.97})
        CHECK(tau.apply(even, point(y)) == point(y));

    configuration odd({point(0.1)});
    CHECK(tau.apply(odd, point(0.6)) == point(0.85));
    CHECK(tau.apply(odd, point(0.85)) == point(0.6));
    CHECK(tau.apply(odd, point(0.3)) == point(0.3));
}

TEST_CASE("halfswap predictability") {
    auto tau = make_halfswap(1.0);
    rng_stream rng(11, 0);
    // D_x tau(omega, y) = 0 whenever x >= y (the reversed order on the line)
    for (int trial = 0; trial < 10000; ++trial) {
        auto w = sample_poisson(tau.source, rng);
        const point y(rng.uniform());
        const point x(rng.uniform(y.x(), 1.0));
        if (w.contains(x)) continue;
        CHECK(tau.apply(w.with(x), y) == tau.apply(w, y));
    }
}

TEST_CASE("halfswap preserves lebesgue pathwise") {
    auto tau = make_halfswap(1.0);
    rng_stream rng(12, 0);
    auto h = [](const point& p) { return std::cos(3.0 * p.x()) + p.x() * p.x(); };
    for (int i = 0; i < 10; ++i) {
        auto w = sample_poisson(tau.source, rng);
        auto map = tau.prepare(w);
        const double lhs = integrate(tau.source, [&](const point& x) { return h(map(x)); });
        const double rhs = integrate(tau.source, h);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("halfswap cyclic condition") {
    auto tau = make_halfswap(1.0);
    rng_stream rng(13, 0);
    for (int k = 1; k <= 4; ++k)
        CHECK_FALSE(cyclic_check(tau, k, 2000, rng).has_value());
}

TEST_CASE("hull_of basics") {
    configuration tri({point(0.0, 0.0), point(1.0, 0.0), point(0.0, 1.0)});
    auto h = hull_of(tri);
    CHECK_FALSE(h.degenerate);
    CHECK(h.extreme_points == tri);
    CHECK(std::abs(h.area - 0.5) < 1e-12);

    configuration sq({point(0, 0), point(1, 0), point(1, 1), point(0, 1), point(0.5, 0.5)});
    auto hs = hull_of(sq);
    CHECK(hs.extreme_points.size() == 4);
    CHECK_FALSE(hs.extreme_points.contains(point(0.5, 0.5)));
    CHECK(std::abs(hs.area - 1.0) < 1e-12);

    // degenerate cases
    CHECK(hull_of(configuration({point(0.1, 0.2)})).degenerate);
    CHECK(hull_of(configuration({point(0, 0), point(1, 1)})).degenerate);
    CHECK(hull_of(configuration({point(0, 0), point(0.5, 0.5), point(1, 1)})).degenerate);
}

TEST_CASE("hull extreme points match the quadratic oracle") {
    auto disk = make_lebesgue_disk(1.0);
    rng_stream rng(21, 0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<point> pts;
        for (int i = 0; i < 20; ++i) pts.push_back(sample_point(disk, rng));
        configuration w(std::move(pts));
        auto h = hull_of(w);
        for (const auto& p : w.points())
            CHECK(h.extreme_points.contains(p) == extreme_bruteforce(w, p));
    }
}

TEST_CASE("rosenblatt round trip") {
    convex_polygon poly;
    poly.vertices = {point(0.0, 0.0), point(1.0, 0.1), point(0.8, 0.9), point(0.2, 0.7)};
    rosenblatt_map rb(poly);
    CHECK(std::abs(rb.area() - polygon_area(poly)) < 1e-12);

    rng_stream rng(31, 0);
    for (int i = 0; i < 10000; ++i) {
        const point x = sample_in_polygon(poly, rng);
        auto [u, v] = rb.forward(x);
        REQUIRE(u >= 0.0);
        REQUIRE(u <= 1.0);
        const point back = rb.inverse(u, v);
        CHECK(std::sqrt(dist2(back, x)) < 1e-9);
    }
}

TEST_CASE("rosenblatt uniformity through the torus shift") {
    convex_polygon tri;
    tri.vertices = {point(0.0, 0.0), point(1.0, 0.0), point(0.3, 0.9)};
    rosenblatt_map rb(tri);
    const double su = 0.37, sv = 0.61;

    rng_stream rng(41, 0);
    const long n = 100000;
    std::vector<long> counts(64, 0);
    for (long i = 0; i < n; ++i) {
        const point x = sample_in_polygon(tri, rng);
        auto [u, v] = rb.forward(x);
        const double wu = u + su - std::floor(u + su);
        const double wv = v + sv - std::floor(v + sv);
        const point y = rb.inverse(wu, wv);
        // classify the image in 64 equal-area cells via the square coordinates
        auto [iu, iv] = rb.forward(y);
        const int cu = std::min(7, static_cast<int>(iu * 8));
        const int cv = std::min(7, static_cast<int>(iv * 8));
        ++counts[cu * 8 + cv];
    }
    const double expected = static_cast<double>(n) / 64.0;
    double stat = 0.0;
    for (long c : counts) stat += (c - expected) * (c - expected) / expected;
    CHECK(chi_square_pvalue(stat, 63) > 0.01);
}

TEST_CASE("hull transform fixed points and conditioning") {
    auto tau = make_hull_transform(0.3, 0.7);
    auto disk = tau.source;
    rng_stream rng(51, 0);

    auto tau0 = make_hull_transform(0.0, 0.0);

    long tested = 0;
    for (int trial = 0; trial < 400 && tested < 1000; ++trial) {
        auto w = sample_poisson(disk, rng);
        auto h = hull_of(w);
        auto map = tau.prepare(w);

        // extreme vertices and outside points are fixed, exactly
        for (const auto& p : w.points())
            if (h.extreme_points.contains(p)) CHECK(map(p) == p);
        const point outside = sample_point(disk, rng);
        if (h.degenerate || !polygon_contains_open(h.polygon, outside))
            CHECK(map(outside) == outside);

        // zero shift is the identity
        auto map0 = tau0.prepare(w);
        const point x = sample_point(disk, rng);
        CHECK(std::sqrt(dist2(map0(x), x)) < 1e-9);

        // dependence on omega only through the extreme vertices
        auto map_e = tau.prepare(h.extreme_points);
        const point y = sample_point(disk, rng);
        CHECK(map(y) == map_e(y));
        ++tested;
    }
}

TEST_CASE("hull transform cyclic condition") {
    auto tau = make_hull_transform(0.3, 0.7);
    rng_stream rng(61, 0);
    for (int k = 1; k <= 4; ++k)
        CHECK_FALSE(cyclic_check(tau, k, 1000, rng).has_value());
}

TEST_CASE("hull transform preserves the intensity") {
    quadrature_scheme qmc;
    qmc.kind = quadrature_kind::halton;
    qmc.nodes_per_axis = 1024;
    auto tau = make_hull_transform(0.3, 0.7);
    tau.source = make_lebesgue_disk(1.0, qmc);
    tau.target = tau.source;

    std::vector<std::function<double(const point&)>> monomials;
    for (int dx = 0; dx <= 3; ++dx)
        for (int dy = 0; dx + dy <= 3; ++dy)
            monomials.push_back([dx, dy](const point& p) {
                return std::pow(p.x(), dx) * std::pow(p.y(), dy);
            });

    rng_stream rng(71, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto w = sample_poisson(tau.source, rng);
        auto rep = intensity_preservation_check(tau, w, monomials, 1e-3);
        CHECK(rep.preserved);
    }
}

TEST_CASE("identity transform preserves any intensity") {
    auto m = make_dx_over_x(0.01, 1.0);
    auto id = make_identity(m);
    auto rep = intensity_preservation_check(
        id, configuration({point(0.5)}),
        {[](const point& p) { return p.x(); }, [](const point& p) { return std::sin(p.x()); }},
        1e-10);
    CHECK(rep.preserved);
}

TEST_CASE("negative control") {
    auto tau = make_negative_control(0.01);

    configuration w({point(0.5)});
    CHECK(pushforward(tau, w) == configuration({point(1.0)}));

    rng_stream rng(81, 0);
    for (int i = 0; i < 200; ++i) {
        auto omega = sample_poisson(tau.source, rng);
        if (omega.empty()) continue;
        auto img = pushforward(tau, omega);
        CHECK(img.points().back() == point(1.0));
    }

    // the cyclic condition is violated quickly
    CHECK(cyclic_check(tau, 2, 1000, rng).has_value());

    // intensity preservation fails for h(x) = x
    auto rep = intensity_preservation_check(tau, configuration({point(0.4)}),
                                            {[](const point& p) { return p.x(); }}, 1e-3);
    CHECK_FALSE(rep.preserved);
}

TEST_CASE("degenerate hull means identity everywhere") {
    auto tau = make_hull_transform(0.3, 0.7);
    configuration two({point(0.1, 0.2), point(-0.3, 0.4)});
    auto map = tau.prepare(two);
    for (double t : {0.0, 0.2, 0.5}) {
        const point x(t, -t / 2);
        CHECK(map(x) == x);
    }
}
