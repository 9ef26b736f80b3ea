#pragma once

// Adaptive quadrature over [lower, inf) in linear and log space.
//
// Scheme: the semi-infinite range is truncated at a point chosen from the
// decay hint (tail quantile at the neglected-mass target, extended
// geometrically until the integrand has fallen far below its running
// maximum), then covered by panels carrying fixed-order Gauss-Legendre
// nodes.  Panels are split adaptively, worst estimated error first; the
// per-panel error estimate compares the whole-panel rule against its two
// halves.  The log-space driver keeps every panel as log(integral) and
// combines them by log-sum-exp, so integrands like (t-x)^199 f(t) never
// overflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "iterdist/distribution.hpp"
#include "iterdist/special.hpp"

namespace iterdist {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_panels = 4096;
    double truncation_mass = 1e-16;

    void validate() const {
        auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
        if (!in_unit(rel_tol) || !in_unit(abs_tol) || !in_unit(truncation_mass))
            throw std::invalid_argument(
                "QuadratureConfig: tolerances must lie in (0, 1)");
        if (max_panels < 8)
            throw std::invalid_argument("QuadratureConfig: max_panels must be >= 8");
    }
};

struct IntegralResult {
    double value = 0.0;
    double log_value = -std::numeric_limits<double>::infinity();
    double error_estimate = 0.0;
    int panels_used = 0;
};

class quadrature_error : public std::runtime_error {
  public:
    quadrature_error(const std::string& what, IntegralResult best)
        : std::runtime_error(what), best_(best) {}
    const IntegralResult& best() const { return best_; }

  private:
    IntegralResult best_;
};

namespace detail {

constexpr int gl_order = 15;

struct GaussLegendreTable {
    std::array<double, gl_order> node;        // on [-1, 1]
    std::array<double, gl_order> weight;
    std::array<double, gl_order> log_weight;
};

// Nodes and weights by Newton iteration on the Legendre recurrence.
inline const GaussLegendreTable& gauss_legendre_15() {
    static const GaussLegendreTable table = [] {
        GaussLegendreTable t{};
        constexpr int n = gl_order;
        constexpr double pi = 3.14159265358979323846;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 64; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::fabs(dz) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - z * z) * pp * pp);
            t.node[i] = -z;
            t.node[n - 1 - i] = z;
            t.weight[i] = w;
            t.weight[n - 1 - i] = w;
        }
        for (int i = 0; i < n; ++i) t.log_weight[i] = std::log(t.weight[i]);
        return t;
    }();
    return table;
}

inline double gl15(const std::function<double(double)>& f, double a, double b) {
    const auto& t = gauss_legendre_15();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < gl_order; ++i) s += t.weight[i] * f(mid + half * t.node[i]);
    return s * half;
}

inline double gl15_log(const std::function<double(double)>& log_f, double a, double b) {
    const auto& t = gauss_legendre_15();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double log_half = std::log(half);
    LogSumAccumulator acc;
    for (int i = 0; i < gl_order; ++i)
        acc.add(log_f(mid + half * t.node[i]) + t.log_weight[i] + log_half);
    return acc.log_sum();
}

inline double log_sum_two(double la, double lb) {
    const double inf = std::numeric_limits<double>::infinity();
    if (la == -inf) return lb;
    if (lb == -inf) return la;
    const double hi = std::max(la, lb);
    return hi + std::log1p(std::exp(std::min(la, lb) - hi));
}

inline double log_abs_diff(double la, double lb) {
    const double inf = std::numeric_limits<double>::infinity();
    if (la == lb) return -inf;
    const double hi = std::max(la, lb);
    const double lo = std::min(la, lb);
    const double d = -std::expm1(lo - hi);
    return d > 0.0 ? hi + std::log(d) : -inf;
}

// Truncation point for integrating log_f over [lower, inf): start at the
// hint's tail quantile for the neglected-mass target, then extend until the
// integrand sits well below the largest value seen.
inline double choose_truncation(const std::function<double(double)>& log_f,
                                double lower, const DistributionSpec& hint,
                                double truncation_mass) {
    double t0 = tail_quantile(hint, truncation_mass);
    t0 = std::max(t0, lower + std::max(1.0, 0.5 * lower));
    double max_log = -std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 24; ++i) {
        const double v = log_f(lower + (t0 - lower) * i / 24.0);
        if (std::isfinite(v)) max_log = std::max(max_log, v);
    }
    const double drop = -std::log(truncation_mass) + 25.0;
    double t = t0;
    for (int it = 0; it < 400; ++it) {
        const double v = log_f(t);
        if (std::isfinite(v)) max_log = std::max(max_log, v);
        if (v < max_log - drop) break;
        if (t > 1e280) break;  // nowhere-positive integrands never trip the drop test
        t *= 1.5;
    }
    return t;
}

inline std::vector<double> initial_breakpoints(double lower, double upper,
                                               int max_panels) {
    const int k = std::clamp(max_panels / 2, 2, 16);
    std::vector<double> pts;
    pts.reserve(k + 2);
    pts.push_back(lower);
    const bool geometric =
        (lower > 0.0 && upper / lower >= 64.0) || (lower == 0.0 && upper >= 64.0);
    if (geometric) {
        const double start = lower > 0.0 ? lower : std::min(1.0, upper / 1024.0);
        if (lower == 0.0) pts.push_back(start);
        const double ratio = std::pow(upper / start, 1.0 / k);
        double p = start;
        for (int i = 1; i < k; ++i) {
            p *= ratio;
            pts.push_back(p);
        }
    } else {
        for (int i = 1; i < k; ++i) pts.push_back(lower + (upper - lower) * i / k);
    }
    pts.push_back(upper);
    return pts;
}

struct LinPanel {
    double a, b;
    double whole, left, right, err;
};

inline LinPanel make_lin_panel(const std::function<double(double)>& f, double a,
                               double b, double whole) {
    const double m = 0.5 * (a + b);
    LinPanel p{a, b, whole, gl15(f, a, m), gl15(f, m, b), 0.0};
    p.err = std::fabs(p.whole - (p.left + p.right));
    return p;
}

inline IntegralResult adaptive_linear(const std::function<double(double)>& f,
                                      double a, double b,
                                      const QuadratureConfig& cfg) {
    std::vector<LinPanel> panels;
    const auto bp = initial_breakpoints(a, b, cfg.max_panels);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        panels.push_back(make_lin_panel(f, bp[i], bp[i + 1], gl15(f, bp[i], bp[i + 1])));

    auto totals = [&panels] {
        std::vector<double> vals, errs;
        vals.reserve(panels.size());
        errs.reserve(panels.size());
        for (const auto& p : panels) {
            vals.push_back(p.left + p.right);
            errs.push_back(p.err);
        }
        return std::pair{pairwise_sum(vals), pairwise_sum(errs)};
    };

    while (true) {
        auto [total, err] = totals();
        const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total));
        if (err <= tol)
            return {total, total > 0.0 ? std::log(total)
                                       : -std::numeric_limits<double>::infinity(),
                    err, static_cast<int>(panels.size())};
        if (static_cast<int>(panels.size()) + 1 > cfg.max_panels)
            throw quadrature_error(
                "integrate: tolerance not reached within max_panels",
                {total, total > 0.0 ? std::log(total)
                                    : -std::numeric_limits<double>::infinity(),
                 err, static_cast<int>(panels.size())});
        auto worst = std::max_element(
            panels.begin(), panels.end(),
            [](const LinPanel& x, const LinPanel& y) { return x.err < y.err; });
        const LinPanel old = *worst;
        const double m = 0.5 * (old.a + old.b);
        *worst = make_lin_panel(f, old.a, m, old.left);
        panels.push_back(make_lin_panel(f, m, old.b, old.right));
    }
}

struct LogPanel {
    double a, b;
    double log_whole, log_left, log_right, log_err;
};

inline LogPanel make_log_panel(const std::function<double(double)>& log_f, double a,
                               double b, double log_whole) {
    const double m = 0.5 * (a + b);
    LogPanel p{a, b, log_whole, gl15_log(log_f, a, m), gl15_log(log_f, m, b), 0.0};
    p.log_err = log_abs_diff(p.log_whole, log_sum_two(p.log_left, p.log_right));
    return p;
}

inline IntegralResult adaptive_log(const std::function<double(double)>& log_f,
                                   double a, double b, const QuadratureConfig& cfg) {
    std::vector<LogPanel> panels;
    const auto bp = initial_breakpoints(a, b, cfg.max_panels);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        panels.push_back(
            make_log_panel(log_f, bp[i], bp[i + 1], gl15_log(log_f, bp[i], bp[i + 1])));

    auto totals = [&panels] {
        LogSumAccumulator val, err;
        for (const auto& p : panels) {
            val.add(log_sum_two(p.log_left, p.log_right));
            err.add(p.log_err);
        }
        return std::pair{val.log_sum(), err.log_sum()};
    };
    auto result = [](double log_total, double log_err, int n) {
        IntegralResult r;
        r.log_value = log_total;
        r.value = std::exp(log_total);  // 0 or inf when unrepresentable
        r.error_estimate = std::exp(log_err);
        r.panels_used = n;
        return r;
    };

    while (true) {
        auto [log_total, log_err] = totals();
        const double log_tol =
            std::max(std::log(cfg.abs_tol), std::log(cfg.rel_tol) + log_total);
        if (log_err <= log_tol)
            return result(log_total, log_err, static_cast<int>(panels.size()));
        if (static_cast<int>(panels.size()) + 1 > cfg.max_panels)
            throw quadrature_error(
                "integrate_logspace: tolerance not reached within max_panels",
                result(log_total, log_err, static_cast<int>(panels.size())));
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const LogPanel& x, const LogPanel& y) {
                                          return x.log_err < y.log_err;
                                      });
        const LogPanel old = *worst;
        const double m = 0.5 * (old.a + old.b);
        *worst = make_log_panel(log_f, old.a, m, old.log_left);
        panels.push_back(make_log_panel(log_f, m, old.b, old.log_right));
    }
}

inline bool wants_origin_substitution(const DistributionSpec& hint, double lower) {
    return lower == 0.0 && hint.family() == Family::gamma && hint.shape() < 1.0;
}

}  // namespace detail

// Integral of a nonnegative integrand over the finite interval [a, b].
inline IntegralResult integrate_interval(const std::function<double(double)>& f,
                                         double a, double b,
                                         const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(a) || !std::isfinite(b) || b < a)
        throw std::domain_error("integrate_interval: bad interval");
    if (a == b) return {0.0, -std::numeric_limits<double>::infinity(), 0.0, 0};
    return detail::adaptive_linear(f, a, b, cfg);
}

// Integral of a nonnegative integrand over [lower, inf).  The decay hint
// drives the truncation point; when the hint is a Gamma with shape < 1 and
// lower == 0, the substitution u = t^shape removes the origin singularity
// before any panel is laid down.
inline IntegralResult integrate_tail(const std::function<double(double)>& f,
                                     double lower, const DistributionSpec& decay_hint,
                                     const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(lower) || lower < 0.0)
        throw std::domain_error("integrate_tail: lower must be finite and >= 0");
    auto log_f = [&f](double t) {
        const double v = f(t);
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    };
    const double upper =
        detail::choose_truncation(log_f, lower, decay_hint, cfg.truncation_mass);
    if (detail::wants_origin_substitution(decay_hint, lower)) {
        const double alpha = decay_hint.shape();
        auto g = [&f, alpha](double u) {
            const double t = std::pow(u, 1.0 / alpha);
            return f(t) * std::pow(u, 1.0 / alpha - 1.0) / alpha;
        };
        return detail::adaptive_linear(g, 0.0, std::pow(upper, alpha), cfg);
    }
    return detail::adaptive_linear(f, lower, upper, cfg);
}

// Log-space companion of integrate_tail: takes log(integrand), returns
// log(integral) without ever leaving log space.
inline IntegralResult integrate_logspace(const std::function<double(double)>& log_f,
                                         double lower,
                                         const DistributionSpec& decay_hint,
                                         const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(lower) || lower < 0.0)
        throw std::domain_error("integrate_logspace: lower must be finite and >= 0");
    const double upper =
        detail::choose_truncation(log_f, lower, decay_hint, cfg.truncation_mass);
    if (detail::wants_origin_substitution(decay_hint, lower)) {
        const double alpha = decay_hint.shape();
        auto g = [&log_f, alpha](double u) {
            const double t = std::pow(u, 1.0 / alpha);
            return log_f(t) + (1.0 / alpha - 1.0) * std::log(u) - std::log(alpha);
        };
        return detail::adaptive_log(g, 0.0, std::pow(upper, alpha), cfg);
    }
    return detail::adaptive_log(log_f, lower, upper, cfg);
}

}  // namespace iterdist
