#include "ppinv/pointprocess.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace ppinv;

TEST_CASE("configuration canonical order") {
    configuration w({point(0.7), point(0.2), point(0.5)});
    REQUIRE(w.size() == 3);
    CHECK(w.points()[0] == point(0.2));

    const point p(0.33);
    CHECK(w.with(p).without(p) == w);
    CHECK(w.with(point(0.2)) == w); // idempotent union
    CHECK(w.without(point(0.99)) == w);
}

TEST_CASE("counting") {
    configuration empty;
    CHECK(counting(empty, box::interval(0, 1)) == 0);

    configuration w({point(0.2), point(0.7)});
    CHECK(counting(w, box::interval(0, 0.5)) == 1);
    CHECK(counting(w, box::interval(0, 1)) == 2);

    // additivity over disjoint regions, pathwise
    rng_stream rng(7, 0);
    auto m = make_lebesgue_interval(0, 1);
    for (int i = 0; i < 200; ++i) {
        auto omega = sample_poisson(m, rng);
        CHECK(counting(omega, box::interval(0, 0.3)) + counting(omega, box::interval(0.3, 1.0)) >=
              static_cast<long>(omega.size())); // boundary points may double count; a.s. equal
        CHECK(counting(omega, box::interval(0, 0.5)) + counting(omega, box::interval(0.5, 1.0)) ==
              static_cast<long>(omega.size()) +
                  counting(omega, box::interval(0.5, 0.5)));
    }
}

TEST_CASE("integrate examples") {
    auto m = make_lebesgue_interval(0, 1);
    CHECK(std::abs(m.total_mass() - 1.0) < 1e-12);
    CHECK(std::abs(integrate(m, [](const point&) { return 1.0; }) - 1.0) < 1e-12);
    CHECK(std::abs(integrate(m, [](const point& p) { return p.x(); }) - 0.5) < 1e-10);

    auto mx = make_dx_over_x(0.01, 1.0);
    CHECK(std::abs(mx.total_mass() - std::log(100.0)) < 1e-9);
    CHECK(std::abs(integrate(mx, [](const point& p) { return 1.0 / p.x(); }) - 99.0) < 1e-6);

    CHECK_THROWS_AS(integrate(m, [](const point& p) { return 1.0 / (p.x() - p.x()); }),
                    numeric_error);
}

TEST_CASE("disk quadrature") {
    auto disk = make_lebesgue_disk(1.0);
    CHECK(std::abs(disk.total_mass() - M_PI) < 1e-9);
    // smooth integrand: x^2 over unit disk = pi/4
    const double v = integrate(disk, [](const point& p) { return p.x() * p.x(); });
    CHECK(std::abs(v - M_PI / 4) < 1e-8);
}

TEST_CASE("sampling determinism") {
    auto m = make_dx_over_x(0.01, 1.0);
    rng_stream a(123, 5), b(123, 5), c(123, 6);
    auto wa = sample_poisson(m, a);
    auto wb = sample_poisson(m, b);
    CHECK(wa == wb);
    auto wc = sample_poisson(m, c);
    // different stream almost surely differs
    bool same = wa == wc;
    CHECK_FALSE(same);
}

TEST_CASE("zero mass samples empty") {
    auto m = intensity_measure("null", box::interval(0, 1),
                               [](const point&) { return 0.0; }, 1.0, default_scheme(1));
    rng_stream rng(1, 1);
    for (int i = 0; i < 10; ++i) CHECK(sample_poisson(m, rng).empty());
}

TEST_CASE("poisson count mean and variance") {
    auto m = make_lebesgue_interval(0, 1);
    rng_stream rng(2024, 0);
    const long samples = 1000000;
    double s1 = 0, s2 = 0;
    for (long i = 0; i < samples; ++i) {
        const double n = static_cast<double>(sample_poisson(m, rng).size());
        s1 += n;
        s2 += n * n;
    }
    const double mean = s1 / samples;
    const double var = (s2 - samples * mean * mean) / (samples - 1);
    // Poisson(1): mean 1, variance 1.  SE(mean) = 1/sqrt(M); the variance
    // estimator's SE is sqrt((mu4 - var^2)/M) with mu4 = 3 lambda^2 + lambda.
    const double se_mean = 1.0 / std::sqrt(static_cast<double>(samples));
    const double se_var = std::sqrt(3.0 / samples);
    CHECK(std::abs(mean - 1.0) < 3 * se_mean);
    CHECK(std::abs(var - 1.0) < 3 * se_var);
}

TEST_CASE("counts in disjoint cells are uncorrelated") {
    auto m = make_lebesgue_interval(0, 1);
    rng_stream rng(99, 0);
    const long samples = 100000;
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (long i = 0; i < samples; ++i) {
        auto w = sample_poisson(m, rng);
        const double x = counting(w, box::interval(0.0, 0.5));
        const double y = counting(w, box::interval(0.5, 1.0));
        sx += x; sy += y; sxy += x * y; sxx += x * x; syy += y * y;
    }
    const double mx = sx / samples, my = sy / samples;
    const double cov = sxy / samples - mx * my;
    const double vx = sxx / samples - mx * mx, vy = syy / samples - my * my;
    const double se = std::sqrt(vx * vy / samples);
    CHECK(std::abs(cov) < 3 * se);
}

TEST_CASE("points land in the domain with the right law") {
    auto m = make_dx_over_x(0.01, 1.0);
    rng_stream rng(5, 0);
    const long samples = 20000;
    long total = 0, low = 0;
    for (long i = 0; i < samples; ++i) {
        auto w = sample_poisson(m, rng);
        for (const auto& p : w.points()) {
            REQUIRE(contains(m.domain(), p));
            ++total;
            if (p.x() < 0.1) ++low;
        }
    }
    // P(point < 0.1) = log(10)/log(100) = 1/2 for the normalized density
    const double frac = static_cast<double>(low) / total;
    CHECK(std::abs(frac - 0.5) < 3 * 0.5 / std::sqrt(static_cast<double>(total)));
}

TEST_CASE("halton scheme integrates smooth functions") {
    quadrature_scheme qs;
    qs.kind = quadrature_kind::halton;
    qs.nodes_per_axis = 1 << 14;
    auto m = make_lebesgue_interval(0, 1, qs);
    CHECK(std::abs(integrate(m, [](const point& p) { return p.x(); }) - 0.5) < 1e-3);
    CHECK(m.scheme().id() == "halton/16384");
}

TEST_CASE("configuration csv serialization") {
    configuration w({point(0.5, 0.25), point(-0.125, 0.75)});
    CHECK(to_csv(w) == "-0.125,0.75\n0.5,0.25\n");
    CHECK(to_csv(configuration{}).empty());
}
