#pragma once

#include "ppinv/exact.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ppinv {

// Ordered tuple of non-negative integer exponents (l_1, ..., l_a).  The empty
// composition is a valid value; symmetrization over compositions is the
// caller's responsibility.
struct composition {
    std::vector<long> parts;
    std::size_t length() const { return parts.size(); }
    long sum() const { return std::accumulate(parts.begin(), parts.end(), 0L); }
};

// Enumerates all compositions of m into exactly a parts >= 0.  For a == 0 the
// result is a single empty composition when m == 0, nothing otherwise.
inline std::vector<composition> compositions_of(long m, std::size_t a) {
    std::vector<composition> out;
    if (m < 0) return out;
    if (a == 0) {
        if (m == 0) out.push_back(composition{});
        return out;
    }
    composition cur;
    cur.parts.assign(a, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t idx, long rem) {
        if (idx + 1 == a) {
            cur.parts[idx] = rem;
            out.push_back(cur);
            return;
        }
        for (long v = 0; v <= rem; ++v) {
            cur.parts[idx] = v;
            rec(idx + 1, rem - v);
        }
    };
    rec(0, m);
    return out;
}

// Visits every set partition of {0..n-1} as a vector of blocks (restricted
// growth enumeration).  n <= 12 or so keeps this tractable; callers stay well
// below that.
inline void for_each_set_partition(int n,
                                   const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
    std::vector<std::vector<int>> blocks;
    std::function<void(int)> rec = [&](int elem) {
        if (elem == n) {
            visit(blocks);
            return;
        }
        const std::size_t existing = blocks.size();
        for (std::size_t bi = 0; bi < existing; ++bi) {
            blocks[bi].push_back(elem);
            rec(elem + 1);
            blocks[bi].pop_back();
        }
        blocks.push_back({elem});
        rec(elem + 1);
        blocks.pop_back();
    };
    if (n == 0) {
        visit(blocks);
        return;
    }
    rec(0);
}

inline exact_int bell_number_bruteforce(int n) {
    exact_int count = 0;
    for_each_set_partition(n, [&](const std::vector<std::vector<int>>&) { ++count; });
    return count;
}

// Touchard polynomial T_n: T_0 = 1, T_{n+1} = L * sum_{k<=n} C(n,k) T_k.
// T_n evaluated at the intensity gives the n-th raw Poisson moment.
inline polynomial touchard(int n) {
    if (n < 0) throw std::invalid_argument("touchard: n must be >= 0");
    std::vector<polynomial> t;
    t.reserve(n + 1);
    t.push_back(polynomial::constant(1));
    for (int m = 0; m < n; ++m) {
        polynomial s;
        for (int k = 0; k <= m; ++k) s += t[k] * exact_scalar(exact_binomial(m, k));
        t.push_back(s.shifted(1));
    }
    return t[n];
}

// Centered variant: T~_0 = 1, T~_{n+1} = L * sum_{k<=n-1} C(n,k) T~_k; gives
// the central Poisson moments E[(Z - lambda)^n].
inline polynomial centered_touchard(int n) {
    if (n < 0) throw std::invalid_argument("centered_touchard: n must be >= 0");
    std::vector<polynomial> t;
    t.reserve(n + 1);
    t.push_back(polynomial::constant(1));
    for (int m = 0; m < n; ++m) {
        polynomial s;
        for (int k = 0; k <= m - 1; ++k) s += t[k] * exact_scalar(exact_binomial(m, k));
        t.push_back(s.shifted(1));
    }
    return t[n];
}

// Stirling number of the second kind: partitions of an n-set into k non-empty
// blocks; S(0,0) = 1, S(n,k) = 0 for k > n.
inline exact_int stirling_second(int n, int k) {
    if (n < 0 || k < 0) throw std::invalid_argument("stirling_second: negative argument");
    if (k > n) return 0;
    std::vector<std::vector<exact_int>> s(n + 1, std::vector<exact_int>(k + 1, 0));
    s[0][0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= std::min(i, k); ++j)
            s[i][j] = exact_int(j) * s[i - 1][j] + s[i - 1][j - 1];
    return s[n][k];
}

// Partitions of an n-set into a blocks all of size >= 2, via the binomial
// dual sum_{c<=a} (-1)^c C(n,c) S(n-c, a-c).
inline exact_int stirling_no_singleton(int n, int a) {
    if (n < 0 || a < 0) throw std::invalid_argument("stirling_no_singleton: negative argument");
    exact_int acc = 0;
    for (int c = 0; c <= a; ++c) {
        if (n - c < 0 || a - c > n - c) continue;
        exact_int term = exact_binomial(n, c) * stirling_second(n - c, a - c);
        acc += (c % 2 == 0) ? term : -term;
    }
    return acc;
}

namespace detail {

// One chain term of the C coefficient: given 0 = r_{c+1} < ... < r_0 = a+c+1,
// the double product over q = 0..c and p in a q-dependent window of
// C(l_1+..+l_p + p + (c-q) - 1, l_1+..+l_{p-1} + p + (c-q) - 1).  The two
// display conventions for the p-window differ only by the rewrite
// r + 1 - (c - q) = r + q - c + 1; both are implemented literally so callers
// can assert their agreement.
//
// The binomial offset is c-q: an offset of plain q reproduces the same values
// on every low-order case but contradicts both the moment recurrence and the
// aggregated partition count once a = 2, c = 1, l_1 + l_2 = 2 is reached,
// while c-q matches both at every order tested.
enum class c_window { theorem, proposition };

inline exact_int coeff_c_chain_term(const composition& L, long c,
                                    const std::vector<long>& r, c_window w) {
    // prefix[p] = l_1 + ... + l_p
    std::vector<long> prefix(L.length() + 1, 0);
    for (std::size_t i = 0; i < L.length(); ++i) prefix[i + 1] = prefix[i] + L.parts[i];

    exact_int term = 1;
    for (long q = 0; q <= c; ++q) {
        long lo, hi;
        if (w == c_window::theorem) {
            lo = r[q + 1] + q - c + 1;
            hi = r[q] + q - c - 1;
        } else {
            lo = r[q + 1] + 1 - (c - q);
            hi = r[q] - 1 - (c - q);
        }
        const long off = c - q;
        for (long p = lo; p <= hi; ++p) {
            term *= exact_binomial(prefix[p] + p + off - 1, prefix[p - 1] + p + off - 1);
        }
    }
    return term;
}

inline exact_int coeff_c_impl(const composition& L, long b, c_window w) {
    const long a = static_cast<long>(L.length());
    const long c = b - a;
    if (c < 0) throw std::invalid_argument("coeff_c: b must be >= length(L)");
    // chains 0 = r_{c+1} < r_c < ... < r_1 < r_0 = a+c+1, stored as
    // r[0..c+1]; the c interior values are chosen from {1..a+c}.
    std::vector<long> r(c + 2);
    r[0] = a + c + 1;
    r[c + 1] = 0;
    exact_int acc = 0;
    std::function<void(long)> rec = [&](long q) {
        if (q == c + 1) {
            acc += coeff_c_chain_term(L, c, r, w);
            return;
        }
        for (long v = c + 1 - q; v < r[q - 1]; ++v) {
            r[q] = v;
            rec(q + 1);
        }
    };
    if (c == 0) {
        acc = coeff_c_chain_term(L, 0, r, w);
    } else {
        rec(1);
    }
    return acc;
}

} // namespace detail

// C_{L_a, b}: the coefficient family of the general moment identity, as the
// chain sum over 0 = r_{c+1} < ... < r_0 = a+c+1 with c = b - length(L).
// For c = 0 this reduces to prod_p C(l_1+..+l_p+p-1, l_1+..+l_{p-1}+p-1).
inline exact_int coeff_c(const composition& L, long b) {
    return detail::coeff_c_impl(L, b, detail::c_window::theorem);
}

// Signed variant (-1)^{b-a} C(n, l0) C_{L_a,b}.  Evaluates the standalone
// chain-sum display as well and asserts the two index conventions agree.
inline exact_int coeff_c_signed(long l0, long n, const composition& L, long b) {
    if (l0 > n) throw std::invalid_argument("coeff_c_signed: l0 must be <= n");
    const exact_int via_theorem = detail::coeff_c_impl(L, b, detail::c_window::theorem);
    const exact_int via_prop = detail::coeff_c_impl(L, b, detail::c_window::proposition);
    if (via_theorem != via_prop)
        throw std::logic_error("coeff_c_signed: index-shifted chain displays disagree");
    const long c = b - static_cast<long>(L.length());
    exact_int v = exact_binomial(n, l0) * via_theorem;
    return (c % 2 == 0) ? v : -v;
}

// Brute-force count of pairs (P, S): P a set partition of {1..n_total} into
// exactly a+c non-empty blocks and S a choice of c of the blocks, each chosen
// block a singleton.  Validates the aggregated identity
//   sum over compositions L of n_total-a-c into a parts of C_{L, a+c} == this
// (the per-composition reading of the count does not hold; only the sum over
// ordered compositions matches).
inline exact_int partition_count_oracle(long n_total, long a, long c) {
    if (n_total < 0 || a < 0 || c < 0)
        throw std::invalid_argument("partition_count_oracle: negative argument");
    if (a + c > n_total && n_total > 0) return 0;
    exact_int acc = 0;
    for_each_set_partition(static_cast<int>(n_total),
                           [&](const std::vector<std::vector<int>>& blocks) {
        if (static_cast<long>(blocks.size()) != a + c) return;
        long singles = 0;
        for (const auto& blk : blocks)
            if (blk.size() == 1) ++singles;
        acc += exact_binomial(singles, c);
    });
    return acc;
}

// Central Poisson moment as sum_a L^a S2(n,a) over no-singleton Stirling
// numbers; equal to centered_touchard(n) coefficient by coefficient.
inline polynomial compensated_poisson_moment(int n) {
    if (n < 0) throw std::invalid_argument("compensated_poisson_moment: n must be >= 0");
    std::vector<exact_scalar> coeffs(n + 1, exact_scalar(0));
    for (int a = 0; a <= n; ++a) coeffs[a] = exact_scalar(stirling_no_singleton(n, a));
    return polynomial(std::move(coeffs));
}

// The Stirling-form specialization of the general moment identity at a
// deterministic indicator integrand: E[(Z-lambda)^n] =
// sum_a lambda^a sum_c (-1)^c C(n,c) S(n-c, a-c).
inline polynomial central_moment_stirling_form(int n) {
    std::vector<exact_scalar> coeffs(n + 1, exact_scalar(0));
    for (int a = 0; a <= n; ++a) {
        exact_int v = 0;
        for (int c = 0; c <= a; ++c) {
            if (a - c > n - c) continue;
            exact_int term = exact_binomial(n, c) * stirling_second(n - c, a - c);
            v += (c % 2 == 0) ? term : -term;
        }
        coeffs[a] = exact_scalar(v);
    }
    return polynomial(std::move(coeffs));
}

// Full indicator specialization of the general moment identity, grouped by
// the number of integration variables b:
//   E[(Z-lambda)^n] = sum_b lambda^b sum_{a<=b} (-1)^{b-a}
//                     sum_{L composition of n-b into a parts} C_{L, b}.
inline polynomial central_moment_coeff_c_form(int n) {
    std::vector<exact_scalar> coeffs(n + 1, exact_scalar(0));
    for (int b = 0; b <= n; ++b) {
        exact_int v = 0;
        for (int a = 0; a <= b; ++a) {
            for (const auto& L : compositions_of(n - b, a)) {
                exact_int cc = coeff_c(L, b);
                v += ((b - a) % 2 == 0) ? cc : -cc;
            }
        }
        coeffs[b] = exact_scalar(v);
    }
    return polynomial(std::move(coeffs));
}

} // namespace ppinv
