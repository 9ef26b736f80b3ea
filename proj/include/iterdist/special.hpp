#pragma once

// Special functions shared by every module: log-gamma, regularized
// incomplete gamma, binomial coefficients (exact wide-integer and log-space),
// the hockey-stick combinatorial sum, and stable summation helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace iterdist {

inline constexpr double half_log_two_pi = 0.9189385332046727418;  // log(2*pi)/2

// log Gamma(x) for x > 0.
//
// Stirling's asymptotic series, applied for x >= 10; smaller arguments are
// shifted up through log Gamma(x) = log Gamma(x+1) - log(x).  The series
// coefficients are B_{2n}/(2n(2n-1)) for n = 1..8:
//   1/12, -1/360, 1/1260, -1/1680, 1/1188, -691/360360, 1/156, -3617/122400.
// Truncation error after the x^{-15} term is below 3e-17 at x = 10, so the
// result is dominated by double rounding (~1e-15 absolute), i.e. ~1e-15
// relative error on Gamma itself.
inline double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("log_gamma: requires finite x > 0");
    static constexpr double coef[8] = {
        1.0 / 12.0,        -1.0 / 360.0,     1.0 / 1260.0, -1.0 / 1680.0,
        1.0 / 1188.0, -691.0 / 360360.0,     1.0 / 156.0,  -3617.0 / 122400.0,
    };
    double shift = 0.0;
    while (x < 10.0) {
        shift += std::log(x);
        x += 1.0;
    }
    const double inv  = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power  = inv;
    for (double c : coef) {
        series += c * power;
        power *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + half_log_two_pi + series - shift;
}

namespace detail {

// log of P(a,x) by the classical power series; intended for x < a + 1.
inline double log_gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 600; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-17)
            return a * std::log(x) - x - log_gamma(a) + std::log(sum);
    }
    throw std::runtime_error("log_gamma_p_series: no convergence");
}

// log of Q(a,x) by the continued fraction (modified Lentz); for x >= a + 1.
inline double log_gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 600; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            return a * std::log(x) - x - log_gamma(a) + std::log(h);
    }
    throw std::runtime_error("log_gamma_q_cf: no convergence");
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a), in log
// form.  Stable down to log values around -745 and beyond (the log form has
// no underflow floor).
inline double log_gamma_q(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0 || !std::isfinite(x) || x < 0.0)
        throw std::domain_error("log_gamma_q: requires a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        const double log_p = detail::log_gamma_p_series(a, x);
        if (log_p >= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log1p(-std::exp(log_p));
    }
    return detail::log_gamma_q_cf(a, x);
}

inline double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }
inline double gamma_p(double a, double x) {
    if (!std::isfinite(a) || a <= 0.0 || !std::isfinite(x) || x < 0.0)
        throw std::domain_error("gamma_p: requires a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return std::exp(detail::log_gamma_p_series(a, x));
    return -std::expm1(detail::log_gamma_q_cf(a, x));
}

using uint128 = unsigned __int128;

// C(n,k) in 128-bit integer arithmetic.  The running product stays integral
// after each division; throws std::overflow_error when the value does not
// fit in 128 bits.
inline uint128 binomial_exact(unsigned n, unsigned k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    const uint128 maxv = ~uint128{0};
    uint128 c = 1;
    for (unsigned i = 1; i <= k; ++i) {
        const uint128 num = n - k + i;
        if (c > maxv / num)
            throw std::overflow_error("binomial_exact: value exceeds 128 bits");
        c = c * num / i;
    }
    return c;
}

// log C(n,k) through log-gamma differences; n may exceed the exact-integer
// range and may be non-integral as long as n >= k >= 0.
inline double log_binomial(double n, double k) {
    if (!(k >= 0.0) || !(n >= k))
        throw std::domain_error("log_binomial: requires n >= k >= 0");
    if (k == 0.0 || k == n) return 0.0;
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

// Sum_{j=0}^{m} C(k+j, k), evaluated term by term and checked against the
// collapsed form C(k+m+1, m).  Exact while the values fit in 128 bits.
inline uint128 hockey_stick_exact(unsigned k, unsigned m) {
    const uint128 maxv = ~uint128{0};
    uint128 sum = 0;
    uint128 term = 1;  // C(k, k)
    for (unsigned j = 0; j <= m; ++j) {
        if (j > 0) {
            const uint128 num = k + j;
            if (term > maxv / num)
                throw std::overflow_error("hockey_stick_exact: term exceeds 128 bits");
            term = term * num / j;
        }
        if (sum > maxv - term)
            throw std::overflow_error("hockey_stick_exact: sum exceeds 128 bits");
        sum += term;
    }
    if (sum != binomial_exact(k + m + 1, m))
        throw std::logic_error("hockey_stick_exact: identity check failed");
    return sum;
}

// log-space variant for arguments beyond the exact range.
inline double log_hockey_stick(unsigned k, unsigned m) {
    return log_binomial(static_cast<double>(k) + m + 1.0, static_cast<double>(m));
}

// Streaming log-sum-exp: maintains log(sum_i exp(l_i)) without overflow.
class LogSumAccumulator {
  public:
    void add(double log_term) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }
    double log_sum() const {
        if (sum_ <= 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }
    bool empty() const { return sum_ <= 0.0; }

  private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

// Pairwise (cascade) summation; keeps rounding error at O(log n) ulps.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace iterdist
