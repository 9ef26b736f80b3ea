#pragma once

// Parametric distribution primitives for the three supported families:
// Gamma(shape, scale), Weibull(shape, scale) with tail exp(-(x/scale)^shape),
// and Exponential parameterized by rate (stored as scale = mean = 1/rate).
// Everything is evaluated in log space first; linear values are produced by
// exponentiation on demand.

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterdist/special.hpp"

namespace iterdist {

enum class Family { gamma, weibull, exponential };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::gamma: return "gamma";
        case Family::weibull: return "weibull";
        case Family::exponential: return "exponential";
    }
    return "?";
}

// A member of one of the three families.
//
// Whether a Gamma shape is an exact integer is tracked explicitly: the flag
// is set only by the gamma_int factory (or exponential, which is Gamma with
// shape 1), never inferred by rounding a floating-point shape.  Closed-form
// fast paths key off this flag.
class DistributionSpec {
  public:
    static DistributionSpec gamma(double shape, double scale) {
        return DistributionSpec(Family::gamma, shape, scale, 0);
    }
    static DistributionSpec gamma_int(int shape, double scale) {
        if (shape < 1) throw std::invalid_argument("gamma_int: shape must be >= 1");
        return DistributionSpec(Family::gamma, static_cast<double>(shape), scale, shape);
    }
    static DistributionSpec weibull(double shape, double scale) {
        return DistributionSpec(Family::weibull, shape, scale, 0);
    }
    static DistributionSpec exponential(double rate) {
        if (!std::isfinite(rate) || rate <= 0.0)
            throw std::invalid_argument("exponential: rate must be finite and > 0");
        return DistributionSpec(Family::exponential, 1.0, 1.0 / rate, 1);
    }

    Family family() const { return family_; }
    double shape() const { return shape_; }
    double scale() const { return scale_; }
    double rate() const { return 1.0 / scale_; }
    bool has_integer_shape() const { return integer_shape_ > 0; }
    int integer_shape() const { return integer_shape_; }

    std::string description() const {
        char buf[128];
        if (family_ == Family::exponential)
            std::snprintf(buf, sizeof buf, "exponential rate=%.12g", rate());
        else
            std::snprintf(buf, sizeof buf, "%s shape=%.12g scale=%.12g",
                          family_name(family_), shape_, scale_);
        return buf;
    }

    friend bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
        return a.family_ == b.family_ && a.shape_ == b.shape_ && a.scale_ == b.scale_;
    }

  private:
    DistributionSpec(Family family, double shape, double scale, int integer_shape)
        : family_(family), shape_(shape), scale_(scale), integer_shape_(integer_shape) {
        if (!std::isfinite(shape) || shape <= 0.0)
            throw std::invalid_argument("DistributionSpec: shape must be finite and > 0");
        if (!std::isfinite(scale) || scale <= 0.0)
            throw std::invalid_argument("DistributionSpec: scale must be finite and > 0");
        switch (family_) {
            case Family::gamma:
                log_density_norm_ = -log_gamma(shape_) - shape_ * std::log(scale_);
                break;
            case Family::weibull:
                log_density_norm_ = std::log(shape_) - shape_ * std::log(scale_);
                break;
            case Family::exponential:
                log_density_norm_ = -std::log(scale_);
                break;
        }
    }

    Family family_;
    double shape_;
    double scale_;
    int integer_shape_;
    double log_density_norm_;

    friend double log_density(const DistributionSpec&, double);
};

namespace detail {
inline void require_nonnegative_finite(double x, const char* who) {
    if (!std::isfinite(x) || x < 0.0)
        throw std::domain_error(std::string(who) + ": x must be finite and >= 0");
}
}  // namespace detail

inline double log_density(const DistributionSpec& spec, double x) {
    detail::require_nonnegative_finite(x, "log_density");
    const double inf = std::numeric_limits<double>::infinity();
    switch (spec.family()) {
        case Family::gamma: {
            if (x == 0.0) {
                if (spec.shape() > 1.0) return -inf;
                if (spec.shape() == 1.0) return spec.log_density_norm_;
                return inf;  // integrable singularity at the origin
            }
            return (spec.shape() - 1.0) * std::log(x) - x / spec.scale() +
                   spec.log_density_norm_;
        }
        case Family::weibull: {
            if (x == 0.0) {
                if (spec.shape() > 1.0) return -inf;
                if (spec.shape() == 1.0) return spec.log_density_norm_;
                return inf;
            }
            return (spec.shape() - 1.0) * std::log(x) -
                   std::pow(x / spec.scale(), spec.shape()) + spec.log_density_norm_;
        }
        case Family::exponential:
            return -x / spec.scale() + spec.log_density_norm_;
    }
    return -inf;
}

inline double density(const DistributionSpec& spec, double x) {
    return std::exp(log_density(spec, x));
}

inline double log_tail(const DistributionSpec& spec, double x) {
    detail::require_nonnegative_finite(x, "log_tail");
    switch (spec.family()) {
        case Family::gamma:
            return log_gamma_q(spec.shape(), x / spec.scale());
        case Family::weibull:
            return -std::pow(x / spec.scale(), spec.shape());
        case Family::exponential:
            return -x / spec.scale();
    }
    return 0.0;
}

inline double tail(const DistributionSpec& spec, double x) {
    return std::exp(log_tail(spec, x));
}

// log E X^k.  Finite for every k >= 0 in all three families.
inline double log_raw_moment(const DistributionSpec& spec, unsigned k) {
    const double kd = static_cast<double>(k);
    switch (spec.family()) {
        case Family::gamma:
            return kd * std::log(spec.scale()) + log_gamma(spec.shape() + kd) -
                   log_gamma(spec.shape());
        case Family::weibull:
            return kd * std::log(spec.scale()) + log_gamma(1.0 + kd / spec.shape());
        case Family::exponential:
            return kd * std::log(spec.scale()) + log_gamma(kd + 1.0);
    }
    return 0.0;
}

// E X^k; refuses to return a silent infinity when the value overflows.
inline double raw_moment(const DistributionSpec& spec, unsigned k) {
    const double lm = log_raw_moment(spec, k);
    if (lm > 709.0)
        throw std::overflow_error(
            "raw_moment: value overflows double; use log_raw_moment");
    return std::exp(lm);
}

// Hazard f(x)/tail(x) for x > 0; errors out when the tail has underflowed
// past the usable range instead of dividing junk.
inline double failure_rate(const DistributionSpec& spec, double x) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("failure_rate: x must be finite and > 0");
    const double lt = log_tail(spec, x);
    if (lt < -700.0)
        throw std::range_error("failure_rate: tail underflow, x beyond usable range");
    return std::exp(log_density(spec, x) - lt);
}

// Smallest x with tail(spec, x) <= p.  Closed form except for Gamma, which
// bisects on the log tail.
inline double tail_quantile(const DistributionSpec& spec, double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("tail_quantile: requires 0 < p < 1");
    const double target = std::log(p);
    switch (spec.family()) {
        case Family::exponential:
            return -spec.scale() * target;
        case Family::weibull:
            return spec.scale() * std::pow(-target, 1.0 / spec.shape());
        case Family::gamma: {
            double lo = 0.0;
            double hi = spec.scale() * (spec.shape() + 1.0);
            while (log_tail(spec, hi) > target) {
                lo = hi;
                hi *= 2.0;
                if (hi > 1e300) throw std::runtime_error("tail_quantile: no bracket");
            }
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (log_tail(spec, mid) > target ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

// Cached log-moments log E X^k for k = 0..max_order.
struct MomentTable {
    DistributionSpec spec;
    std::vector<double> log_moments;

    static MomentTable build(const DistributionSpec& spec, unsigned max_order) {
        MomentTable t{spec, {}};
        t.log_moments.reserve(max_order + 1);
        for (unsigned k = 0; k <= max_order; ++k)
            t.log_moments.push_back(log_raw_moment(spec, k));
        return t;
    }

    // Second differences of the log-moment sequence; all >= 0 up to rounding
    // (log-moments of a nonnegative variable are convex in the order).
    double min_second_difference() const {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t k = 2; k < log_moments.size(); ++k)
            worst = std::min(worst,
                             log_moments[k] - 2.0 * log_moments[k - 1] + log_moments[k - 2]);
        return worst;
    }
};

}  // namespace iterdist
