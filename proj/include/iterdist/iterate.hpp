#pragma once

// The s-iterated distribution engine.
//
// The tail of the s-iterate is E(X-x)_+^{s-1} / E X^{s-1}; its density is
// (s-1) E(X-x)_+^{s-2} / E X^{s-1}.  Stop-loss transforms are computed in
// log space: integer-shape Gamma specs use the exact binomial-expansion
// closed form, everything else goes through log-space quadrature.  A
// separate explicit closed form evaluates the integer-shape Gamma tail as
// the normalized polynomial-times-exponential expression, giving a second
// algebraic route the tests can cross-check.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "iterdist/distribution.hpp"
#include "iterdist/quadrature.hpp"
#include "iterdist/special.hpp"

namespace iterdist {

enum class IterationMethod { closed_form_gamma, stop_loss_quadrature, reference_recursion };

struct IteratedEvaluation {
    DistributionSpec spec;
    int s;
    IterationMethod method;
    double value;
    double log_value;
};

namespace detail {

inline void require_iteration_index(int s, int min_s, const char* who) {
    if (s < min_s)
        throw std::domain_error(std::string(who) + ": iteration index too small");
}

// log E(X-x)_+^r for X ~ Gamma(m, 1) with integer m >= 1, via the binomial
// expansion of (u+x)^{m-1} under the shifted integral:
//   E(X-x)_+^r = e^{-x} sum_{k=0}^{m-1} [Gamma(r+m-k)/Gamma(m-k)] x^k / k!
inline double log_stop_loss_gamma_unit(int m, double y, unsigned r) {
    LogSumAccumulator acc;
    const double log_y = std::log(y);  // y > 0 here
    for (int k = 0; k < m; ++k) {
        const double mk = static_cast<double>(m - k);
        acc.add(log_gamma(r + mk) - log_gamma(mk) + k * log_y - log_gamma(k + 1.0));
    }
    return -y + acc.log_sum();
}

}  // namespace detail

// log E(X-x)_+^order.  Order 0 is the plain tail; x = 0 is the raw moment.
// Scale is factored out before any quadrature (E(X-x)_+^r = scale^r times
// the unit-scale transform at x/scale), so scale equivariance holds exactly.
inline double log_stop_loss(const DistributionSpec& spec, double x, unsigned order,
                            const QuadratureConfig& cfg = {}) {
    detail::require_nonnegative_finite(x, "log_stop_loss");
    if (order == 0) return log_tail(spec, x);
    if (x == 0.0) return log_raw_moment(spec, order);
    if (spec.has_integer_shape()) {
        const double y = x / spec.scale();
        return order * std::log(spec.scale()) +
               detail::log_stop_loss_gamma_unit(spec.integer_shape(), y, order);
    }
    if (spec.scale() != 1.0) {
        const DistributionSpec unit = spec.family() == Family::gamma
                                          ? DistributionSpec::gamma(spec.shape(), 1.0)
                                          : DistributionSpec::weibull(spec.shape(), 1.0);
        return order * std::log(spec.scale()) +
               log_stop_loss(unit, x / spec.scale(), order, cfg);
    }
    auto log_f = [&spec, x, order](double t) {
        return order * std::log(t - x) + log_density(spec, t);
    };
    return integrate_logspace(log_f, x, spec, cfg).log_value;
}

inline double stop_loss(const DistributionSpec& spec, double x, unsigned order,
                        const QuadratureConfig& cfg = {}) {
    return std::exp(log_stop_loss(spec, x, order, cfg));
}

// Tail of the s-iterate of a unit-scale Gamma with integer shape >= 2:
//   e^{-x} (1 + (1/C(shape+s-2, shape-1))
//               sum_{l=1}^{shape-1} C(s+shape-l-2, shape-l-1) x^l / l!)
// All binomials go through log-gamma; the terms are positive so the
// accumulation is cancellation-free.
inline double log_iterated_tail_gamma_closed(int shape, int s, double x) {
    if (shape < 2) throw std::domain_error("iterated_tail_gamma_closed: shape must be >= 2");
    if (s < 2) throw std::domain_error("iterated_tail_gamma_closed: s must be >= 2");
    detail::require_nonnegative_finite(x, "iterated_tail_gamma_closed");
    const double log_x =
        x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
    const double log_norm = log_binomial(shape + s - 2.0, shape - 1.0);
    LogSumAccumulator acc;
    acc.add(0.0);
    for (int l = 1; l <= shape - 1; ++l)
        acc.add(log_binomial(s + shape - l - 2.0, shape - l - 1.0) - log_norm +
                l * log_x - log_gamma(l + 1.0));
    return -x + acc.log_sum();
}

inline double iterated_tail_gamma_closed(int shape, int s, double x) {
    return std::exp(log_iterated_tail_gamma_closed(shape, s, x));
}

// log of the s-iterated tail.  Dispatch: exponential specs are fixed points
// (exact); integer-shape Gamma uses the explicit closed form; everything
// else evaluates the normalized stop-loss transform by quadrature.
inline double iterated_log_tail(const DistributionSpec& spec, int s, double x,
                                const QuadratureConfig& cfg = {}) {
    detail::require_iteration_index(s, 1, "iterated_log_tail");
    detail::require_nonnegative_finite(x, "iterated_log_tail");
    if (spec.integer_shape() == 1) return -x / spec.scale();
    if (s == 1) return log_tail(spec, x);
    if (spec.has_integer_shape())
        return log_iterated_tail_gamma_closed(spec.integer_shape(), s, x / spec.scale());
    if (spec.scale() != 1.0) {
        // the tail is a pure function of x/scale; rescale before anything
        // else so equivariance holds bit for bit
        const DistributionSpec unit = spec.family() == Family::gamma
                                          ? DistributionSpec::gamma(spec.shape(), 1.0)
                                          : DistributionSpec::weibull(spec.shape(), 1.0);
        return iterated_log_tail(unit, s, x / spec.scale(), cfg);
    }
    return log_stop_loss(spec, x, s - 1, cfg) - log_raw_moment(spec, s - 1);
}

inline double iterated_tail(const DistributionSpec& spec, int s, double x,
                            const QuadratureConfig& cfg = {}) {
    return std::exp(iterated_log_tail(spec, s, x, cfg));
}

inline IteratedEvaluation evaluate_iterated_tail(const DistributionSpec& spec, int s,
                                                 double x,
                                                 const QuadratureConfig& cfg = {}) {
    const double lt = iterated_log_tail(spec, s, x, cfg);
    const IterationMethod method = spec.has_integer_shape()
                                       ? IterationMethod::closed_form_gamma
                                       : IterationMethod::stop_loss_quadrature;
    return {spec, s, method, std::exp(lt), lt};
}

// Density of the s-iterate, s >= 2: (s-1) E(X-x)_+^{s-2} / E X^{s-1}.
inline double log_iterated_density(const DistributionSpec& spec, int s, double x,
                                   const QuadratureConfig& cfg = {}) {
    detail::require_iteration_index(s, 2, "iterated_density");
    detail::require_nonnegative_finite(x, "iterated_density");
    if (spec.integer_shape() == 1) return log_density(spec, x);
    return std::log(s - 1.0) + log_stop_loss(spec, x, s - 2, cfg) -
           log_raw_moment(spec, s - 1);
}

inline double iterated_density(const DistributionSpec& spec, int s, double x,
                               const QuadratureConfig& cfg = {}) {
    return std::exp(log_iterated_density(spec, s, x, cfg));
}

// Mean of the s-iterate: (1/s) E X^s / E X^{s-1}.
inline double iterated_mean(const DistributionSpec& spec, int s) {
    detail::require_iteration_index(s, 1, "iterated_mean");
    return std::exp(log_raw_moment(spec, s) - log_raw_moment(spec, s - 1) -
                    std::log(static_cast<double>(s)));
}

// Order-m moment of the s-iterate: C(m+s-1, m)^{-1} E X^{m+s-1} / E X^{s-1}.
// At s = 1 the same expression degenerates to the raw moment E X^m, which is
// the convention adopted here for the base case.
inline double iterated_moment(const DistributionSpec& spec, int s, unsigned m) {
    detail::require_iteration_index(s, 1, "iterated_moment");
    if (m == 0) return 1.0;
    return std::exp(log_raw_moment(spec, m + s - 1) - log_raw_moment(spec, s - 1) -
                    log_binomial(static_cast<double>(m) + s - 1.0,
                                 static_cast<double>(m)));
}

// Variance of the s-iterate.
inline double iterated_variance(const DistributionSpec& spec, int s) {
    detail::require_iteration_index(s, 1, "iterated_variance");
    const double a = std::exp(log_raw_moment(spec, s) - log_raw_moment(spec, s - 1) -
                              std::log(static_cast<double>(s)));
    const double b = std::exp(log_raw_moment(spec, s + 1) - log_raw_moment(spec, s) +
                              std::log(2.0) - std::log(s + 1.0));
    return a * (b - a);
}

// Level-by-level evaluation of the defining recursion on a dense uniform
// grid: level 1 is the closed-form tail, level k integrates level k-1 from
// the right and renormalizes by its mass.  This path never touches the
// stop-loss representation; it exists to break circularity in tests and is
// capped at depth 8.
class ReferenceIterator {
  public:
    static constexpr int max_depth = 8;

    ReferenceIterator(const DistributionSpec& spec, int max_s, double grid_step = 1e-3,
                      double x_max = 0.0)
        : spec_(spec), max_s_(max_s) {
        if (max_s < 1 || max_s > max_depth)
            throw std::domain_error("ReferenceIterator: unsupported depth (s must be <= 8)");
        if (x_max <= 0.0)
            x_max = tail_quantile(spec, 1e-22) * (1.0 + 0.35 * (max_s - 1));
        h_ = grid_step;
        if (x_max / h_ > 2e6) h_ = x_max / 2e6;  // cap memory for heavy tails
        n_ = static_cast<std::size_t>(std::ceil(x_max / h_)) + 1;
        if (n_ < 8) n_ = 8;
        levels_.resize(max_s_);
        auto& base = levels_[0];
        base.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            base[i] = iterdist::tail(spec, h_ * static_cast<double>(i));
        for (int k = 2; k <= max_s_; ++k) {
            const std::vector<double> cum = cumulative_from_right(levels_[k - 2]);
            const double mass = cum[0];
            masses_.push_back(mass);
            auto& lvl = levels_[k - 1];
            lvl.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) lvl[i] = cum[i] / mass;
        }
    }

    double tail_at(int s, double x) const {
        if (s < 1 || s > max_s_) throw std::domain_error("ReferenceIterator: bad s");
        detail::require_nonnegative_finite(x, "ReferenceIterator::tail_at");
        const auto& lvl = levels_[s - 1];
        const double pos = x / h_;
        if (pos >= static_cast<double>(n_ - 1)) return 0.0;
        // cubic Lagrange interpolation on the 4 nodes around x
        std::size_t j = static_cast<std::size_t>(pos);
        j = std::clamp<std::size_t>(j, 1, n_ - 3);
        const double u = pos - static_cast<double>(j);
        const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        return w0 * lvl[j - 1] + w1 * lvl[j] + w2 * lvl[j + 1] + w3 * lvl[j + 2];
    }

    // Mass of level k (the normalizer consumed when building level k+1);
    // equals the mean of the k-iterate.
    double level_mass(int k) const {
        if (k < 1 || k > max_s_ - 1)
            throw std::domain_error("ReferenceIterator: bad mass index");
        return masses_[k - 1];
    }

    double grid_step() const { return h_; }
    double grid_max() const { return h_ * static_cast<double>(n_ - 1); }

  private:
    // Right-to-left cumulative integral with per-interval Simpson, midpoints
    // supplied by 4-point interpolation; the mass beyond the grid is added
    // from an exponential fit of the last two values.
    std::vector<double> cumulative_from_right(const std::vector<double>& y) const {
        const std::size_t n = y.size();
        std::vector<double> cum(n);
        double rem = 0.0;
        if (y[n - 1] > 0.0 && y[n - 2] > y[n - 1]) {
            const double rate = std::log(y[n - 2] / y[n - 1]) / h_;
            rem = y[n - 1] / rate;
        }
        cum[n - 1] = rem;
        for (std::size_t i = n - 1; i-- > 0;) {
            double mid;
            if (i == 0)
                mid = 0.3125 * y[0] + 0.9375 * y[1] - 0.3125 * y[2] + 0.0625 * y[3];
            else if (i >= n - 2)
                mid = 0.0625 * y[n - 4] - 0.3125 * y[n - 3] + 0.9375 * y[n - 2] +
                      0.3125 * y[n - 1];
            else
                mid = (-y[i - 1] + 9.0 * y[i] + 9.0 * y[i + 1] - y[i + 2]) / 16.0;
            cum[i] = cum[i + 1] + h_ / 6.0 * (y[i] + 4.0 * mid + y[i + 1]);
        }
        return cum;
    }

    DistributionSpec spec_;
    int max_s_;
    double h_;
    std::size_t n_;
    std::vector<std::vector<double>> levels_;
    std::vector<double> masses_;
};

// Convenience wrapper; builds the full grid for a single query.
inline double reference_iterated_tail(const DistributionSpec& spec, int s, double x,
                                      double grid_step = 1e-3) {
    ReferenceIterator ref(spec, s, grid_step);
    return ref.tail_at(s, x);
}

}  // namespace iterdist
