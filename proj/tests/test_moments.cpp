#include "ppinv/moments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

using namespace ppinv;

namespace {
random_functional one_functional() {
    return {"one", [](const configuration&) { return 1.0; }, 1.0};
}
random_functional count_functional() {
    return {"count", [](const configuration& w) { return static_cast<double>(w.size()); },
            std::nullopt};
}
} // namespace

TEST_CASE("mc_moment basics") {
    auto m = make_lebesgue_interval(0, 1);
    random_functional c{"const", [](const configuration&) { return 2.0; }, 2.0};
    auto est = mc_moment(c, m, 3, 1000, 1);
    CHECK(est.mean == 8.0);
    CHECK(est.std_error == 0.0);

    auto cnt = mc_moment(count_functional(), m, 1, 1000000, 2);
    CHECK(std::abs(cnt.mean - 1.0) < 3 * cnt.std_error);

    random_functional centered{"count_minus_1", [](const configuration& w) {
                                   return static_cast<double>(w.size()) - 1.0;
                               },
                               std::nullopt};
    auto c4 = mc_moment(centered, m, 4, 1000000, 3);
    CHECK(std::abs(c4.mean - 4.0) < 3 * c4.std_error);

    CHECK_THROWS_AS(mc_moment(c, m, 1, 1, 1), config_error);
}

TEST_CASE("touchard recurrence sequence") {
    // constant powers: exact agreement with the centered Touchard values
    const exact_scalar lam(2);
    std::vector<exact_scalar> powers(10, lam);
    auto m = touchard_recurrence_sequence(powers, 8);
    for (int n = 0; n <= 8; ++n) CHECK(m[n] == centered_touchard(n).eval(lam));

    // f(t) = t on [0,1]: m2 = 1/3, m3 = 1/4
    std::vector<double> pw = {0, 0.5, 1.0 / 3, 0.25};
    auto md = touchard_recurrence_sequence(pw, 3);
    CHECK(std::abs(md[2] - 1.0 / 3) < 1e-15);
    CHECK(std::abs(md[3] - 0.25) < 1e-15);

    // MC of the compensated integral of t matches the third target
    auto meas = make_lebesgue_interval(0, 1);
    rng_stream rng(4, 0);
    running_stats s;
    for (long i = 0; i < 200000; ++i) {
        auto w = sample_poisson(meas, rng);
        const double x = compensated_integral([](const point& p) { return p.x(); }, w, meas);
        s.add(x * x * x);
    }
    CHECK(std::abs(s.mean() - 0.25) < 3 * s.std_error());
}

TEST_CASE("isometry check") {
    auto m = make_lebesgue_interval(0, 1);

    auto r1 = isometry_check(make_u1(), m, 50000, 11);
    CHECK(r1.pass);
    // deterministic process: the cross term vanishes pathwise
    CHECK(r1.terms[1].value.mean == 0.0);
    CHECK(r1.terms[1].value.std_error == 0.0);

    auto r3 = isometry_check(make_u3(), m, 50000, 12);
    CHECK(r3.pass);
    CHECK(r3.terms[1].value.mean == 0.0); // predictable: cross term zero pathwise

    auto r2 = isometry_check(make_u2(), m, 200000, 13);
    CHECK(r2.pass);
    // anticipating: the cross term is significantly nonzero
    CHECK(std::abs(r2.terms[1].value.mean) > 5 * r2.terms[1].value.std_error);
}

TEST_CASE("third moment check") {
    auto m = make_lebesgue_interval(0, 1);

    auto r1 = third_moment_check(make_u1(), m, 50000, 21);
    CHECK(r1.pass);
    CHECK(r1.terms[2].value.mean == 0.0);
    CHECK(r1.terms[3].value.mean == 0.0);

    auto r3 = third_moment_check(make_u3(), m, 50000, 22);
    CHECK(r3.pass);
    CHECK(r3.terms[2].value.mean == 0.0);
    CHECK(r3.terms[2].value.std_error == 0.0);
    CHECK(r3.terms[3].value.mean == 0.0);
    CHECK(r3.terms[3].value.std_error == 0.0);

    auto r2 = third_moment_check(make_u2(), m, 200000, 23);
    CHECK(r2.pass);
}

TEST_CASE("theorem l22 check") {
    auto m = make_lebesgue_interval(0, 1);
    auto one = one_functional();

    auto r2 = theorem_l22_check(make_u2(), one, 2, m, 100000, 31);
    CHECK(r2.pass);

    // order 2 with F = 1 matches the isometry right side
    auto iso = isometry_check(make_u2(), m, 100000, 31);
    const double comb =
        std::sqrt(r2.rhs.std_error * r2.rhs.std_error + iso.rhs.std_error * iso.rhs.std_error);
    CHECK(std::abs(r2.rhs.mean - iso.rhs.mean) < 4 * comb);

    auto r3 = theorem_l22_check(make_u2(), one, 3, m, 150000, 32);
    CHECK(r3.pass);

    // a genuine random F exercises the eps+ shifts of F
    random_functional f{"clipped", [](const configuration& w) {
                            return 1.0 + std::min<double>(static_cast<double>(w.size()), 2.0);
                        },
                        3.0};
    auto rf = theorem_l22_check(make_u2(), f, 2, m, 100000, 33);
    CHECK(rf.pass);

    CHECK_THROWS_AS(theorem_l22_check(make_u2(), one, 5, m, 100, 1), config_error);
}

TEST_CASE("exact indicator specializations") {
    for (int n = 0; n <= 6; ++n) {
        const polynomial expect = centered_touchard(n);
        CHECK(exact_indicator_l22(n) == expect);
        CHECK(exact_indicator_recursive(n) == expect);
        for (exact_scalar lam : {exact_scalar(1, 2), exact_scalar(1), exact_scalar(2)})
            CHECK(exact_indicator_l22(n).eval(lam) == expect.eval(lam));
    }
}

TEST_CASE("prop p01 check") {
    auto m = make_lebesgue_interval(0, 1);

    auto r1 = prop_p01_check(make_u2(), 1, m, 100000, 41);
    CHECK(r1.pass);

    auto r2 = prop_p01_check(make_u2(), 2, m, 100000, 42);
    CHECK(r2.pass);

    // predictable process: every Delta term vanishes pathwise, not just on average
    for (int n = 1; n <= 3; ++n) {
        auto r = prop_p01_check(make_u3(), n, m, 20000, 43 + n);
        CHECK(r.pass);
        CHECK(r.terms[1].value.mean == 0.0);
        CHECK(r.terms[1].value.std_error == 0.0);
    }

    CHECK_THROWS_AS(prop_p01_check(make_u2(), 5, m, 100, 1), config_error);
}

TEST_CASE("prop c1 check") {
    auto m = make_lebesgue_interval(0, 1);

    // deterministic process: identical to the recurrence targets
    auto r1 = prop_c1_check(make_u1(), 2, m, 100000, 51);
    CHECK(r1.pass);
    CHECK(r1.terms[1].value.mean == 0.0);

    const auto pw = integrate_powers(m, [](const point& p) { return 1.0 + p.x(); }, 4);
    const auto targets = touchard_recurrence_sequence(pw, 3);
    CHECK(std::abs(r1.lhs.mean - targets[3]) < 4 * r1.lhs.std_error);

    // anticipating process: the deterministic-integral precondition fails
    CHECK_THROWS_AS(prop_c1_check(make_u2(), 2, m, 1000, 52), numeric_error);
}

TEST_CASE("prop pr1 check") {
    auto m = make_lebesgue_interval(0, 1);

    // k = 0: both sides estimate E[int v]; the Delta part is exactly zero
    auto r0 = prop_pr1_check(make_u2(), make_u1(), 0, m, 20000, 61);
    CHECK(r0.pass);
    CHECK(r0.terms[1].value.mean == 0.0);
    CHECK(r0.terms[1].value.std_error == 0.0);

    // deterministic u: all gradient corrections vanish pathwise
    auto rd = prop_pr1_check(make_u1(), make_u2(), 2, m, 20000, 62);
    CHECK(rd.pass);
    CHECK(rd.terms[1].value.mean == 0.0);

    auto r2 = prop_pr1_check(make_u2(), make_u1(), 2, m, 100000, 63);
    CHECK(r2.pass);

    CHECK_THROWS_AS(prop_pr1_check(make_u2(), make_u1(), 4, m, 100, 1), config_error);
}

TEST_CASE("worker count does not change results") {
    auto m = make_lebesgue_interval(0, 1);
    setenv("PPINV_WORKERS", "3", 1);
    auto r3 = isometry_check(make_u2(), m, 20000, 71);
    setenv("PPINV_WORKERS", "1", 1);
    auto r1 = isometry_check(make_u2(), m, 20000, 71);
    unsetenv("PPINV_WORKERS");
    CHECK(r1.lhs.mean == r3.lhs.mean);
    CHECK(r1.rhs.mean == r3.rhs.mean);
    CHECK(r1.diff.std_error == r3.diff.std_error);
}
