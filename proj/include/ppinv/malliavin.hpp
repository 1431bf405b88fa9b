#pragma once

#include "ppinv/common.hpp"
#include "ppinv/pointprocess.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ppinv {

// Random variable F : configurations -> reals.  eval must be pure.
struct random_functional {
    std::string name;
    std::function<double(const configuration&)> eval;
    std::optional<double> bound;
};

// Measurable process u : configurations x X -> reals, zero outside support.
// deterministic marks processes whose value ignores the configuration, which
// switches the moment engines onto their exact path.  power_integrals, when
// set, computes {integral of u(omega,.)^k, k = 0..maxpow} by a
// structure-aware route; the default is plain quadrature of the integrand.
struct point_process {
    std::string name;
    std::function<double(const configuration&, const point&)> eval;
    region support;
    double bound = 0.0;
    bool deterministic = false;
    std::function<std::vector<double>(const intensity_measure&, const configuration&, int)>
        power_integrals;
};

inline std::vector<double> process_power_integrals(const point_process& u,
                                                   const intensity_measure& m,
                                                   const configuration& omega, int maxpow) {
    if (u.power_integrals) return u.power_integrals(m, omega, maxpow);
    return integrate_powers(m, [&](const point& t) { return u.eval(omega, t); }, maxpow);
}

// ---- first order operators --------------------------------------------------

inline double eps_plus(const random_functional& f, const point& x, const configuration& omega) {
    const double v = f.eval(omega.with(x));
    if (!std::isfinite(v)) throw numeric_error("eps_plus: non-finite functional value");
    return v;
}

inline double gradient_d(const random_functional& f, const point& x, const configuration& omega) {
    const double v = f.eval(omega.with(x)) - f.eval(omega);
    if (!std::isfinite(v)) throw numeric_error("gradient_d: non-finite functional value");
    return v;
}

// Iterated difference D_Theta F = sum over A subset Theta of
// (-1)^{|Theta \ A|} F(omega u A); symmetric in the points of Theta.
inline double gradient_iterated(const random_functional& f, const std::vector<point>& theta,
                                const configuration& omega) {
    for (std::size_t i = 0; i < theta.size(); ++i)
        for (std::size_t j = i + 1; j < theta.size(); ++j)
            if (theta[i] == theta[j])
                throw config_error("gradient_iterated: duplicated point in Theta");
    const std::size_t k = theta.size();
    double acc = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        configuration shifted = omega;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (1u << i)) shifted = shifted.with(theta[i]);
        const int missing = static_cast<int>(k) - __builtin_popcount(mask);
        const double v = f.eval(shifted);
        acc += (missing % 2 == 0) ? v : -v;
    }
    return acc;
}

// ---- the multi-point Delta operator ------------------------------------------

// Assignment of factor positions to shift points: shift i receives a
// non-empty set S_i of positions not containing i; Theta_p collects the shift
// points whose S contains p.
struct theta_assignment {
    std::vector<std::uint32_t> position_sets; // one bitmask over positions per shift
};

namespace detail {

// Core evaluator for Delta_{s_i : i in shifts} prod_p f_p, with f_p attached
// to the point s_p.  Enumerates every assignment of non-empty position sets
// S_i (i excluded) and sums the products of iterated gradients, looked up in
// per-factor tables indexed by subsets of the shift set.
// allow_self_assignment exists only so the oracle suite can run the corrupted
// enumeration (S_i allowed to contain i) and prove it is detected.
inline double delta_multi_core(const std::vector<std::function<double(const configuration&)>>& factors,
                               const std::vector<point>& s,
                               const std::vector<int>& shifts,
                               const configuration& omega,
                               bool allow_self_assignment = false) {
    const int n_fac = static_cast<int>(factors.size());
    const int n_shift = static_cast<int>(shifts.size());
    if (s.size() != factors.size())
        throw config_error("delta_multi: one point per factor required");
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
            if (s[i] == s[j]) throw config_error("delta_multi: points must be distinct");
    for (int i : shifts)
        if (i < 0 || i >= n_fac) throw config_error("delta_multi: shift index out of range");
    if (n_shift == 0) {
        double prod = 1.0;
        for (const auto& f : factors) prod *= f(omega);
        return prod;
    }

    // f-value tables: val[p][mask] = f_p(omega u {s_i : i in mask}), mask over
    // the shift list.
    const std::uint32_t full = (1u << n_shift) - 1;
    std::vector<std::vector<double>> val(n_fac, std::vector<double>(full + 1));
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
        configuration shifted = omega;
        for (int i = 0; i < n_shift; ++i)
            if (mask & (1u << i)) shifted = shifted.with(s[shifts[i]]);
        for (int p = 0; p < n_fac; ++p) val[p][mask] = factors[p](shifted);
    }
    // grad[p][mask] = D_{Theta} f_p with Theta = {s_i : i in mask}.
    std::vector<std::vector<double>> grad(n_fac, std::vector<double>(full + 1));
    for (int p = 0; p < n_fac; ++p) {
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            double acc = 0.0;
            const int bits = __builtin_popcount(mask);
            for (std::uint32_t sub = mask;; sub = (sub - 1) & mask) {
                const int missing = bits - __builtin_popcount(sub);
                acc += (missing % 2 == 0) ? val[p][sub] : -val[p][sub];
                if (sub == 0) break;
            }
            grad[p][mask] = acc;
        }
    }

    // Non-empty position choices per shift.
    std::vector<std::vector<std::uint32_t>> choices(n_shift);
    for (int i = 0; i < n_shift; ++i) {
        for (std::uint32_t ps = 1; ps < (1u << n_fac); ++ps) {
            if (!allow_self_assignment && (ps & (1u << shifts[i]))) continue;
            choices[i].push_back(ps);
        }
        if (choices[i].empty()) return 0.0;
    }

    double total = 0.0;
    std::vector<std::size_t> idx(n_shift, 0);
    std::vector<std::uint32_t> theta(n_fac);
    for (;;) {
        std::fill(theta.begin(), theta.end(), 0u);
        for (int i = 0; i < n_shift; ++i) {
            const std::uint32_t ps = choices[i][idx[i]];
            for (int p = 0; p < n_fac; ++p)
                if (ps & (1u << p)) theta[p] |= (1u << i);
        }
        double prod = 1.0;
        for (int p = 0; p < n_fac && prod != 0.0; ++p) prod *= grad[p][theta[p]];
        total += prod;

        int k = 0;
        while (k < n_shift && ++idx[k] == choices[k].size()) idx[k++] = 0;
        if (k == n_shift) break;
    }
    return total;
}

} // namespace detail

// Delta_{s_0} ... Delta_{s_j} prod_{p=0}^{n} u_{s_p} evaluated pathwise.
inline double delta_multi(const point_process& u, const std::vector<point>& s, int j,
                          const configuration& omega) {
    const int n = static_cast<int>(s.size()) - 1;
    if (j < 0 || j > n) throw config_error("delta_multi: need 0 <= j <= n");
    std::vector<std::function<double(const configuration&)>> factors;
    factors.reserve(s.size());
    for (const auto& sp : s)
        factors.push_back([&u, sp](const configuration& w) { return u.eval(w, sp); });
    std::vector<int> shifts(j + 1);
    for (int i = 0; i <= j; ++i) shifts[i] = i;
    return detail::delta_multi_core(factors, s, shifts, omega);
}

// Same with per-factor integer powers (the moment identities apply Delta to
// products of powers of u).
inline double delta_multi_powers(const point_process& u, const std::vector<point>& s,
                                 const std::vector<int>& powers, int j,
                                 const configuration& omega) {
    if (powers.size() != s.size()) throw config_error("delta_multi_powers: size mismatch");
    std::vector<std::function<double(const configuration&)>> factors;
    factors.reserve(s.size());
    for (std::size_t p = 0; p < s.size(); ++p) {
        const point sp = s[p];
        const int e = powers[p];
        factors.push_back([&u, sp, e](const configuration& w) {
            double v = u.eval(w, sp), r = 1.0;
            for (int k = 0; k < e; ++k) r *= v;
            return r;
        });
    }
    std::vector<int> shifts(j + 1);
    for (int i = 0; i <= j; ++i) shifts[i] = i;
    return detail::delta_multi_core(factors, s, shifts, omega);
}

// ---- Skorohod integral -------------------------------------------------------

// delta(u)(omega) = sum_{t in omega} u(omega \ {t}, t) - int u(omega, t) dsigma.
// The compensator integrates u(omega, .) since quadrature nodes are a.s. not
// atoms of omega under a diffuse intensity.
inline double skorohod(const point_process& u, const configuration& omega,
                       const intensity_measure& m) {
    double atoms = 0.0;
    for (const auto& t : omega.points()) atoms += u.eval(omega.without(t), t);
    const double comp = u.power_integrals
                            ? u.power_integrals(m, omega, 1)[1]
                            : integrate(m, [&](const point& t) { return u.eval(omega, t); });
    return atoms - comp;
}

inline double compensated_integral(const std::function<double(const point&)>& f,
                                   const configuration& omega, const intensity_measure& m) {
    double atoms = 0.0;
    for (const auto& t : omega.points()) atoms += f(t);
    return atoms - integrate(m, f);
}

// Both sides of the commutation relation eps+_t delta(u) = delta(eps+_t u) + u_t.
inline std::pair<double, double> commutation_check(const point_process& u, const point& t,
                                                   const configuration& omega,
                                                   const intensity_measure& m) {
    const double lhs = skorohod(u, omega.with(t), m);
    double atoms = 0.0;
    for (const auto& x : omega.points()) atoms += u.eval(omega.without(x).with(t), x);
    const double comp = integrate(m, [&](const point& x) { return u.eval(omega.with(t), x); });
    const double rhs = atoms - comp + u.eval(omega, t);
    return {lhs, rhs};
}

// ---- lookup-table processes ---------------------------------------------------

// Process on a discrete support: the value at a support point is a table
// entry indexed by the occupied subset of the support.  Triangular tables
// read only the strictly-larger part of the support at each point, so
// D_x u_y = 0 whenever x <= y and every cyclic gradient product vanishes by
// construction.  Off the support the process is zero, so its sigma-integrals
// vanish and operator identities can be checked exactly pathwise.
class lookup_table_process {
public:
    lookup_table_process(std::vector<point> support, std::vector<double> table, bool triangular)
        : support_(std::move(support)), table_(std::move(table)), triangular_(triangular) {
        std::sort(support_.begin(), support_.end());
        if (table_.size() != support_.size() << support_.size())
            throw config_error("lookup_table_process: table size must be n * 2^n");
    }

    static lookup_table_process random(rng_stream& rng, int n_points, bool triangular) {
        std::vector<point> sup;
        while (static_cast<int>(sup.size()) < n_points) {
            point p(rng.uniform());
            if (std::find(sup.begin(), sup.end(), p) == sup.end()) sup.push_back(p);
        }
        std::vector<double> table;
        table.resize(static_cast<std::size_t>(n_points) << n_points);
        for (auto& v : table) v = 2.0 * rng.uniform() - 1.0;
        return lookup_table_process(std::move(sup), std::move(table), triangular);
    }

    const std::vector<point>& support() const { return support_; }

    double eval(const configuration& omega, const point& t) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), t);
        if (it == support_.end() || !(*it == t)) return 0.0;
        const std::size_t idx = static_cast<std::size_t>(it - support_.begin());
        std::uint32_t mask = 0;
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (omega.contains(support_[i])) mask |= (1u << i);
        if (triangular_) mask &= ~((2u << idx) - 1u); // keep strictly-larger points only
        return table_[(mask * support_.size()) + idx];
    }

    point_process as_process(region support_region, double bound = 1.0) const {
        point_process u;
        u.name = triangular_ ? "lookup_triangular" : "lookup";
        auto self = *this;
        u.eval = [self](const configuration& w, const point& t) { return self.eval(w, t); };
        u.support = std::move(support_region);
        u.bound = bound;
        return u;
    }

private:
    std::vector<point> support_;
    std::vector<double> table_;
    bool triangular_;
};

// ---- built-in catalog (U1..U3; U4 lives with the transforms) -----------------

inline point_process make_u1(double a = 0.0, double b = 1.0) {
    point_process u;
    u.name = "U1";
    u.eval = [](const configuration&, const point& t) { return 1.0 + t.x(); };
    u.support = box::interval(a, b);
    u.bound = 1.0 + std::max(std::abs(a), std::abs(b));
    u.deterministic = true;
    return u;
}

// Anticipating: depends on the total count, clipped at K = 3.
inline point_process make_u2(double a = 0.0, double b = 1.0) {
    point_process u;
    u.name = "U2";
    u.eval = [](const configuration& w, const point& t) {
        const double clipped = static_cast<double>(std::min<std::size_t>(w.size(), 3));
        return (1.0 + t.x()) * (1.0 + clipped);
    };
    u.support = box::interval(a, b);
    u.bound = (1.0 + std::max(std::abs(a), std::abs(b))) * 4.0;
    return u;
}

// Predictable: reads only the points strictly before t.
inline point_process make_u3(double a = 0.0, double b = 1.0) {
    point_process u;
    u.name = "U3";
    u.eval = [](const configuration& w, const point& t) {
        long before = 0;
        for (const auto& p : w.points())
            if (p.x() < t.x()) ++before;
        return (1.0 + t.x()) * static_cast<double>(std::min<long>(before, 1));
    };
    u.support = box::interval(a, b);
    u.bound = 1.0 + std::max(std::abs(a), std::abs(b));
    return u;
}

} // namespace ppinv
