#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppinv {

// Arbitrary-precision rational scalar. Every combinatorial quantity in this
// library is computed in exact arithmetic; floating point never enters the
// combinatorics layer.
using exact_scalar = boost::multiprecision::cpp_rational;
using exact_int = boost::multiprecision::cpp_int;

inline exact_int exact_binomial(long n, long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    exact_int r = 1;
    for (long i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

inline exact_int exact_factorial(long n) {
    exact_int r = 1;
    for (long i = 2; i <= n; ++i) r *= i;
    return r;
}

// Renders a rational exactly: as a plain decimal string when the reduced
// denominator is of the form 2^a 5^b, otherwise as "num/den".
inline std::string render_exact(const exact_scalar& q) {
    exact_int num = boost::multiprecision::numerator(q);
    exact_int den = boost::multiprecision::denominator(q);
    if (den == 1) return num.str();

    exact_int d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return num.str() + "/" + den.str();

    int digits = std::max(twos, fives);
    exact_int scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    exact_int scaled = num * (scale / den);
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string s = scaled.str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
    if (neg) s.insert(0, "-");
    return s;
}

inline double to_double(const exact_scalar& q) {
    return q.template convert_to<double>();
}

// Polynomial in the intensity parameter with exact rational coefficients,
// c[0] + c[1] x + ... ; trailing zero coefficients are trimmed so equality
// of values implies equality of representations.
class polynomial {
public:
    polynomial() = default;
    explicit polynomial(std::vector<exact_scalar> coeffs) : c_(std::move(coeffs)) { trim(); }
    static polynomial constant(const exact_scalar& v) { return polynomial({v}); }

    const std::vector<exact_scalar>& coeffs() const { return c_; }
    std::size_t size() const { return c_.size(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    exact_scalar coeff(std::size_t k) const { return k < c_.size() ? c_[k] : exact_scalar(0); }

    exact_scalar eval(const exact_scalar& x) const {
        exact_scalar acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    double eval(double x) const {
        double acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + to_double(*it);
        return acc;
    }

    polynomial& operator+=(const polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), exact_scalar(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    friend polynomial operator+(polynomial a, const polynomial& b) { return a += b; }

    polynomial& operator*=(const exact_scalar& s) {
        for (auto& v : c_) v *= s;
        trim();
        return *this;
    }
    friend polynomial operator*(polynomial a, const exact_scalar& s) { return a *= s; }

    // Multiplication by x^k (shift in the intensity variable).
    polynomial shifted(std::size_t k) const {
        if (c_.empty()) return {};
        std::vector<exact_scalar> r(c_.size() + k, exact_scalar(0));
        for (std::size_t i = 0; i < c_.size(); ++i) r[i + k] = c_[i];
        return polynomial(std::move(r));
    }

    friend bool operator==(const polynomial& a, const polynomial& b) { return a.c_ == b.c_; }
    friend bool operator!=(const polynomial& a, const polynomial& b) { return !(a == b); }

    std::string str() const {
        if (c_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            if (!first) os << " + ";
            os << render_exact(c_[i]);
            if (i >= 1) os << "*L";
            if (i >= 2) os << "^" << i;
            first = false;
        }
        if (first) return "0";
        return os.str();
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<exact_scalar> c_;
};

} // namespace ppinv
