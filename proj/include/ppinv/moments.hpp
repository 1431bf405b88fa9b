#pragma once

#include "ppinv/combinatorics.hpp"
#include "ppinv/malliavin.hpp"
#include "ppinv/mc.hpp"
#include "ppinv/stats.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ppinv {

// ---- estimates and reports -----------------------------------------------------

struct moment_estimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    std::uint64_t seed = 0;
};

inline moment_estimate to_estimate(const running_stats& s, std::uint64_t seed) {
    return {s.mean(), s.std_error(), s.n, seed};
}

struct term_estimate {
    std::string label;
    moment_estimate value;
};

struct identity_report {
    std::string identity;
    std::string process;
    moment_estimate lhs;
    moment_estimate rhs;
    moment_estimate diff; // paired per-sample difference (common random numbers)
    double z_score = 0.0;
    double threshold = 3.0;
    bool pass = false;
    bool exact_path = false;
    std::vector<term_estimate> terms;
};

namespace detail {

inline double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

inline long long binom_ll(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

inline void finalize(identity_report& rep) {
    const double se = rep.diff.std_error;
    if (se > 0.0) {
        rep.z_score = std::abs(rep.diff.mean) / se;
        rep.pass = rep.z_score <= rep.threshold;
    } else {
        // both sides collapsed to the same deterministic value pathwise
        rep.z_score = 0.0;
        rep.pass = std::abs(rep.diff.mean) <= 1e-9 * std::max(1.0, std::abs(rep.lhs.mean));
        rep.exact_path = rep.diff.n_samples > 0;
    }
}

// Quadrature points for the X^b integrals: i.i.d. draws from the normalized
// intensity, pairwise distinct and avoiding the atoms of omega.
inline std::vector<point> draw_points(const intensity_measure& m, rng_stream& rng, int count,
                                      const configuration& omega) {
    const box bb = bounding_box(m.domain());
    std::vector<point> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        point p;
        p.dim = bb.dim;
        for (int k = 0; k < bb.dim; ++k) p.c[k] = rng.uniform(bb.lo[k], bb.hi[k]);
        if (!contains(m.domain(), p)) continue;
        if (rng.uniform() * m.density_bound() > m.density(p)) continue;
        if (omega.contains(p)) continue;
        if (std::find(out.begin(), out.end(), p) != out.end()) continue;
        out.push_back(p);
    }
    return out;
}

// Skorohod integral with the compensator taken from a precomputed powers
// vector (powers[1] = integral of u(omega, .)).
inline double skorohod_atoms(const point_process& u, const configuration& omega) {
    double atoms = 0.0;
    for (const auto& t : omega.points()) atoms += u.eval(omega.without(t), t);
    return atoms;
}

} // namespace detail

// ---- basic estimators ------------------------------------------------------------

// Sample mean and standard error of F(omega)^n under the Poisson law of m.
inline moment_estimate mc_moment(const random_functional& f, const intensity_measure& m, int n,
                                 long samples, std::uint64_t seed) {
    if (samples < 2) throw config_error("mc_moment: need at least 2 samples");
    struct acc {
        running_stats s;
        void merge(const acc& o) { s.merge(o.s); }
    };
    auto a = mc_chunked<acc>(samples, seed, 0,
                             [&](long i, rng_stream& cfg, rng_stream&, acc& out) {
                                 const auto w = sample_poisson(m, cfg);
                                 const double v = detail::ipow(f.eval(w), n);
                                 if (!std::isfinite(v))
                                     throw numeric_error("mc_moment: non-finite sample at index " +
                                                         std::to_string(i));
                                 out.s.add(v);
                             });
    return to_estimate(a.s, seed);
}

// Moment targets of a compensated Poisson integral with power integrals
// powers[k] = integral of f^k (indices 0 and 1 are not read):
// m_0 = 1, m_1 = 0, m_{n+1} = sum_{k<=n-1} C(n,k) powers[n-k+1] m_k.
template <typename Scalar>
std::vector<Scalar> touchard_recurrence_sequence(const std::vector<Scalar>& powers, int n_max) {
    std::vector<Scalar> m(n_max + 1, Scalar(0));
    m[0] = Scalar(1);
    for (int n = 0; n < n_max; ++n) {
        Scalar acc(0);
        for (int k = 0; k <= n - 1; ++k) {
            if (n - k + 1 >= static_cast<int>(powers.size()))
                throw config_error("touchard_recurrence_sequence: powers vector too short");
            acc += Scalar(detail::binom_ll(n, k)) * powers[n - k + 1] * m[k];
        }
        m[n + 1] = acc;
    }
    return m;
}

// ---- expansion term tables --------------------------------------------------------

namespace detail {

struct expansion_term {
    int a = 0;
    int j = 0; // number of Delta shifts minus one; unused by the l22 table
    int b = 0;
    std::vector<int> powers; // per-factor exponents
    double coeff = 0.0;
};

// Terms of the general moment identity E[delta(u)^n F]: positions 1..b carry
// exponents 1+l_p (l_p = 0 past a), coefficient (-1)^{b-a} C_{L_a,b}.
inline std::vector<expansion_term> build_l22_terms(int n) {
    std::vector<expansion_term> out;
    for (int a = 0; a <= n; ++a) {
        for (int b = a; b <= n; ++b) {
            for (const auto& L : compositions_of(n - b, a)) {
                expansion_term t;
                t.a = a;
                t.b = b;
                t.powers.assign(b, 1);
                for (int p = 0; p < a; ++p) t.powers[p] += static_cast<int>(L.parts[p]);
                const exact_int c = coeff_c(L, b);
                t.coeff = ((b - a) % 2 == 0 ? 1.0 : -1.0) * c.convert_to<double>();
                if (t.coeff != 0.0) out.push_back(std::move(t));
            }
        }
    }
    return out;
}

// Delta-correction terms of the recursive moment identity for E[delta(u)^{n+1}]:
// factors at positions 0..b with exponents (1+l_0 .. 1+l_a, 1 .. 1), shifts
// s_0..s_j, coefficient C(a,j) C^{l_0,n}_{L_a,b}.
inline std::vector<expansion_term> build_p01_terms(int n) {
    std::vector<expansion_term> out;
    for (int a = 0; a <= n; ++a) {
        for (int b = a; b <= n; ++b) {
            for (const auto& L0 : compositions_of(n - b, a + 1)) {
                // L0 = (l_0, l_1, ..., l_a)
                composition tail;
                tail.parts.assign(L0.parts.begin() + 1, L0.parts.end());
                const long l0 = L0.parts[0];
                const exact_int signed_c = coeff_c_signed(l0, n, tail, b);
                for (int j = 0; j <= a; ++j) {
                    expansion_term t;
                    t.a = a;
                    t.j = j;
                    t.b = b;
                    t.powers.assign(b + 1, 1);
                    for (int p = 0; p <= a; ++p) t.powers[p] += static_cast<int>(L0.parts[p]);
                    t.coeff = static_cast<double>(binom_ll(a, j)) * signed_c.convert_to<double>();
                    if (t.coeff != 0.0) out.push_back(std::move(t));
                }
            }
        }
    }
    return out;
}

// Same enumeration with the v factor at position 0 and exponents l_1..l_a on
// the u factors; coefficient C(a,j) (-1)^{b-a} C_{L_a,b}.
inline std::vector<expansion_term> build_pr1_terms(int k) {
    std::vector<expansion_term> out;
    for (int a = 0; a <= k; ++a) {
        for (int b = a; b <= k; ++b) {
            for (const auto& L : compositions_of(k - b, a)) {
                const exact_int c = coeff_c(L, b);
                for (int j = 0; j <= a; ++j) {
                    expansion_term t;
                    t.a = a;
                    t.j = j;
                    t.b = b;
                    t.powers.assign(b + 1, 1); // powers[0] belongs to v
                    for (int p = 0; p < a; ++p) t.powers[p + 1] += static_cast<int>(L.parts[p]);
                    t.coeff = static_cast<double>(binom_ll(a, j)) *
                              ((b - a) % 2 == 0 ? 1.0 : -1.0) * c.convert_to<double>();
                    if (t.coeff != 0.0) out.push_back(std::move(t));
                }
            }
        }
    }
    return out;
}

struct paired_acc {
    running_stats lhs, rhs, diff;
    std::vector<running_stats> terms;
    void merge(const paired_acc& o) {
        lhs.merge(o.lhs);
        rhs.merge(o.rhs);
        diff.merge(o.diff);
        if (terms.size() < o.terms.size()) terms.resize(o.terms.size());
        for (std::size_t i = 0; i < o.terms.size(); ++i) terms[i].merge(o.terms[i]);
    }
    void record(double l, double r, std::initializer_list<double> term_values) {
        lhs.add(l);
        rhs.add(r);
        diff.add(l - r);
        if (terms.size() < term_values.size()) terms.resize(term_values.size());
        std::size_t i = 0;
        for (double v : term_values) terms[i++].add(v);
    }
};

} // namespace detail

// ---- identity checks ----------------------------------------------------------------

// Skorohod isometry: E[delta(u)^2] against E[int u^2 dsigma] plus the
// gradient cross term, the double integral estimated from one point pair per
// sample.
inline identity_report isometry_check(const point_process& u, const intensity_measure& m,
                                      long samples, std::uint64_t seed) {
    const double mass = m.total_mass();
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pw = process_power_integrals(u, m, w, 2);
            const double d = detail::skorohod_atoms(u, w) - pw[1];
            const auto st = detail::draw_points(m, quad, 2, w);
            const double dsut = u.eval(w.with(st[0]), st[1]) - u.eval(w, st[1]);
            const double dtus = u.eval(w.with(st[1]), st[0]) - u.eval(w, st[0]);
            const double cross = mass * mass * dsut * dtus;
            out.record(d * d, pw[2] + cross, {pw[2], cross});
        });
    identity_report rep;
    rep.identity = "isometry";
    rep.process = u.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    rep.terms = {{"int_u2", to_estimate(a.terms[0], seed)},
                 {"cross", to_estimate(a.terms[1], seed)}};
    detail::finalize(rep);
    return rep;
}

// Third moment of the Skorohod integral: four-term right side with the X^2
// and X^3 Delta terms estimated from per-sample point tuples.
inline identity_report third_moment_check(const point_process& u, const intensity_measure& m,
                                          long samples, std::uint64_t seed) {
    const double mass = m.total_mass();
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pw = process_power_integrals(u, m, w, 3);
            const double d = detail::skorohod_atoms(u, w) - pw[1];
            const auto s = detail::draw_points(m, quad, 3, w);
            const double t1 = pw[3];
            const double t2 = 3.0 * d * pw[2];
            const double t3 =
                3.0 * mass * mass *
                delta_multi_powers(u, {s[0], s[1]}, {1, 2}, 1, w);
            const double t4 = mass * mass * mass * delta_multi(u, {s[0], s[1], s[2]}, 2, w);
            out.record(d * d * d, t1 + t2 + t3 + t4, {t1, t2, t3, t4});
        });
    identity_report rep;
    rep.identity = "third";
    rep.process = u.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    rep.terms = {{"int_u3", to_estimate(a.terms[0], seed)},
                 {"3_delta_int_u2", to_estimate(a.terms[1], seed)},
                 {"3_delta2_term", to_estimate(a.terms[2], seed)},
                 {"delta3_term", to_estimate(a.terms[3], seed)}};
    detail::finalize(rep);
    return rep;
}

// General moment identity for E[delta(u)^n F]: the right side sums the
// eps+-shifted product terms over the composition table, with the X^b
// integrals estimated by one i.i.d. point tuple per sample.
inline identity_report theorem_l22_check(const point_process& u, const random_functional& f,
                                         int n, const intensity_measure& m, long samples,
                                         std::uint64_t seed) {
    if (n > 4) throw config_error("theorem_l22_check: n must be <= 4");
    const double mass = m.total_mass();
    const auto terms = detail::build_l22_terms(n);
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pw = process_power_integrals(u, m, w, 1);
            const double d = detail::skorohod_atoms(u, w) - pw[1];
            const auto s = detail::draw_points(m, quad, n, w);

            // prefix configurations omega u {s_1..s_a}
            std::vector<configuration> cfgs(n + 1);
            cfgs[0] = w;
            for (int i = 1; i <= n; ++i) cfgs[i] = cfgs[i - 1].with(s[i - 1]);

            double rhs = 0.0;
            double massb = 1.0;
            int cur_b = 0;
            for (const auto& t : terms) {
                while (cur_b < t.b) { massb *= mass; ++cur_b; }
                while (cur_b > t.b) { massb /= mass; --cur_b; }
                double prod = f.eval(cfgs[t.a]);
                for (int p = 1; p <= t.b && prod != 0.0; ++p) {
                    const double v = p <= t.a ? u.eval(cfgs[t.a].without(s[p - 1]), s[p - 1])
                                              : u.eval(cfgs[t.a], s[p - 1]);
                    prod *= detail::ipow(v, t.powers[p - 1]);
                }
                rhs += t.coeff * massb * prod;
            }
            out.record(detail::ipow(d, n) * f.eval(w), rhs, {});
        });
    identity_report rep;
    rep.identity = "l22";
    rep.process = u.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    detail::finalize(rep);
    return rep;
}

// Recursive moment identity for E[delta(u)^{n+1}] with the Delta-correction
// sum; the Delta terms are reported separately so the pathwise-zero cases are
// visible in the output.
inline identity_report prop_p01_check(const point_process& u, int n, const intensity_measure& m,
                                      long samples, std::uint64_t seed) {
    if (n > 4) throw config_error("prop_p01_check: n must be <= 4");
    const double mass = m.total_mass();
    const auto terms = detail::build_p01_terms(n);
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pw = process_power_integrals(u, m, w, n + 2);
            const double d = detail::skorohod_atoms(u, w) - pw[1];
            const auto s = detail::draw_points(m, quad, n + 1, w);

            double ksum = 0.0;
            for (int k = 0; k <= n - 1; ++k)
                ksum += static_cast<double>(detail::binom_ll(n, k)) * detail::ipow(d, k) *
                        pw[n - k + 1];

            double dsum = 0.0;
            for (const auto& t : terms) {
                std::vector<point> pts(s.begin(), s.begin() + t.b + 1);
                const double dv = delta_multi_powers(u, pts, t.powers, t.j, w);
                dsum += t.coeff * detail::ipow(mass, t.b + 1) * dv;
            }
            out.record(detail::ipow(d, n + 1), ksum + dsum, {ksum, dsum});
        });
    identity_report rep;
    rep.identity = "p01";
    rep.process = u.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    rep.terms = {{"recurrence_part", to_estimate(a.terms[0], seed)},
                 {"delta_part", to_estimate(a.terms[1], seed)}};
    detail::finalize(rep);
    return rep;
}

// Variant for processes with deterministic power integrals: the integrals
// factor out of the expectations.  The precondition (integral of u^k
// constant across configurations) is verified on a hundred sampled
// configurations before any estimation happens.
inline identity_report prop_c1_check(const point_process& u, int n, const intensity_measure& m,
                                     long samples, std::uint64_t seed) {
    if (n > 4) throw config_error("prop_c1_check: n must be <= 4");
    const double mass = m.total_mass();

    std::vector<double> fixed;
    {
        rng_stream pre(seed, 1000000);
        for (int i = 0; i < 100; ++i) {
            const auto w = sample_poisson(m, pre);
            const auto pw = process_power_integrals(u, m, w, n + 2);
            if (fixed.empty()) {
                fixed = pw;
                continue;
            }
            for (int k = 1; k <= n + 2; ++k)
                if (std::abs(pw[k] - fixed[k]) > 1e-6 * mass)
                    throw numeric_error(
                        "prop_c1_check: integral of u^" + std::to_string(k) +
                        " is not deterministic; the process is outside this identity's scope");
        }
    }

    const auto terms = detail::build_p01_terms(n);
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pw = process_power_integrals(u, m, w, 1);
            const double d = detail::skorohod_atoms(u, w) - pw[1];
            const auto s = detail::draw_points(m, quad, n + 1, w);

            double ksum = 0.0;
            for (int k = 0; k <= n - 1; ++k)
                ksum += static_cast<double>(detail::binom_ll(n, k)) * detail::ipow(d, k) *
                        fixed[n - k + 1];

            double dsum = 0.0;
            for (const auto& t : terms) {
                std::vector<point> pts(s.begin(), s.begin() + t.j + 1);
                std::vector<int> powers(t.powers.begin(), t.powers.begin() + t.j + 1);
                double outer = 1.0;
                for (int q = t.j + 1; q <= t.b; ++q) outer *= fixed[t.powers[q]];
                const double dv = delta_multi_powers(u, pts, powers, t.j, w);
                dsum += t.coeff * detail::ipow(mass, t.j + 1) * outer * dv;
            }
            out.record(detail::ipow(d, n + 1), ksum + dsum, {ksum, dsum});
        });
    identity_report rep;
    rep.identity = "c1";
    rep.process = u.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    rep.terms = {{"recurrence_part", to_estimate(a.terms[0], seed)},
                 {"delta_part", to_estimate(a.terms[1], seed)}};
    detail::finalize(rep);
    return rep;
}

// E[int v_s delta(eps+_s u)^k sigma(ds)] against E[delta(u)^k int v] plus the
// Delta corrections; the outer integral is estimated with the s_0 draw.
inline identity_report prop_pr1_check(const point_process& u, const point_process& v, int k,
                                      const intensity_measure& m, long samples,
                                      std::uint64_t seed) {
    if (k > 3) throw config_error("prop_pr1_check: k must be <= 3");
    const double mass = m.total_mass();
    const auto terms = detail::build_pr1_terms(k);
    auto a = mc_chunked<detail::paired_acc>(
        samples, seed, 0,
        [&](long, rng_stream& cfg, rng_stream& quad, detail::paired_acc& out) {
            const auto w = sample_poisson(m, cfg);
            const auto pu = process_power_integrals(u, m, w, 1);
            const double du = detail::skorohod_atoms(u, w) - pu[1];
            const double vint = integrate(m, [&](const point& t) { return v.eval(w, t); });
            const auto s = detail::draw_points(m, quad, k + 1, w);

            // delta(eps+_{s0} u) evaluated pathwise
            const auto w_s0 = w.with(s[0]);
            double atoms = 0.0;
            for (const auto& t : w.points()) atoms += u.eval(w.without(t).with(s[0]), t);
            const double comp = integrate(m, [&](const point& t) { return u.eval(w_s0, t); });
            const double d_shift = atoms - comp;

            const double lhs = mass * v.eval(w, s[0]) * detail::ipow(d_shift, k);

            double dsum = 0.0;
            for (const auto& t : terms) {
                std::vector<std::function<double(const configuration&)>> factors;
                factors.reserve(t.b + 1);
                const point s0 = s[0];
                factors.push_back([&v, s0](const configuration& c) { return v.eval(c, s0); });
                for (int p = 1; p <= t.b; ++p) {
                    const point sp = s[p];
                    const int e = t.powers[p];
                    factors.push_back([&u, sp, e](const configuration& c) {
                        return detail::ipow(u.eval(c, sp), e);
                    });
                }
                std::vector<int> shifts(t.j + 1);
                for (int i = 0; i <= t.j; ++i) shifts[i] = i;
                std::vector<point> pts(s.begin(), s.begin() + t.b + 1);
                const double dv = detail::delta_multi_core(factors, pts, shifts, w);
                dsum += t.coeff * detail::ipow(mass, t.b + 1) * dv;
            }
            const double rhs = detail::ipow(du, k) * vint + dsum;
            out.record(lhs, rhs, {detail::ipow(du, k) * vint, dsum});
        });
    identity_report rep;
    rep.identity = "pr1";
    rep.process = u.name + "," + v.name;
    rep.lhs = to_estimate(a.lhs, seed);
    rep.rhs = to_estimate(a.rhs, seed);
    rep.diff = to_estimate(a.diff, seed);
    rep.terms = {{"uncorrected", to_estimate(a.terms[0], seed)},
                 {"delta_part", to_estimate(a.terms[1], seed)}};
    detail::finalize(rep);
    return rep;
}

// ---- rhs-only views (the spec's operation surface) ---------------------------------

inline moment_estimate rhs_theorem_l22(const point_process& u, const random_functional& f, int n,
                                       const intensity_measure& m, long samples,
                                       std::uint64_t seed) {
    return theorem_l22_check(u, f, n, m, samples, seed).rhs;
}
inline moment_estimate rhs_prop_p01(const point_process& u, int n, const intensity_measure& m,
                                    long samples, std::uint64_t seed) {
    return prop_p01_check(u, n, m, samples, seed).rhs;
}
inline moment_estimate rhs_prop_c1(const point_process& u, int n, const intensity_measure& m,
                                   long samples, std::uint64_t seed) {
    return prop_c1_check(u, n, m, samples, seed).rhs;
}
inline identity_report rhs_prop_pr1(const point_process& u, const point_process& v, int k,
                                    const intensity_measure& m, long samples, std::uint64_t seed) {
    return prop_pr1_check(u, v, k, m, samples, seed);
}

// ---- exact indicator specializations -------------------------------------------------

// For u = 1_A and F = 1 every expectation collapses to a polynomial in
// lambda = sigma(A); all three identities reduce to the centered Touchard
// values, exactly in rational arithmetic.

inline polynomial exact_indicator_l22(int n) { return central_moment_coeff_c_form(n); }

inline polynomial exact_indicator_recursive(int n_top) {
    std::vector<polynomial> m(n_top + 1);
    m[0] = polynomial::constant(1);
    for (int n = 0; n < n_top; ++n) {
        polynomial acc;
        for (int k = 0; k <= n - 1; ++k)
            acc += m[k] * exact_scalar(exact_binomial(n, k));
        m[n + 1] = acc.shifted(1); // each power integral of an indicator is lambda
    }
    return m[n_top];
}

} // namespace ppinv
