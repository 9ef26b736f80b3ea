#pragma once

// Monte-Carlo oracle for the iterated distributions.
//
// Representation used for s >= 2: the s-iterate equals in law B * W, where W
// is the (s-1)-power-size-biased version of X (density proportional to
// t^{s-1} f(t)) and B ~ Beta(1, s-1) independent, because
// E[(1 - x/W)_+^{s-1}] = E(X-x)_+^{s-1} / E X^{s-1}.  For Gamma specs W is
// Gamma(shape+s-1, scale) exactly; for Weibull specs W is scale * G^{1/shape}
// with G ~ Gamma(1+(s-1)/shape, 1), since P(G^{1/shape} > t) matches the
// weighted tail Q(1+(s-1)/shape, t^shape).  The weighted-tail inversion
// (bracketed bisection with Newton acceleration, 1e-12 on the log tail) is
// also provided so tests can cross-check the two routes.
//
// RNG: Philox4x32-10 keyed by the seed, with the counter laid out as
// (sample_lo, sample_hi, stream, draw#).  Each sample owns its counter
// space, so batches are reproducible bit-for-bit no matter how the work is
// chunked or threaded.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "iterdist/distribution.hpp"
#include "iterdist/iterate.hpp"
#include "iterdist/special.hpp"

namespace iterdist {

struct Philox4x32 {
    static constexpr std::uint32_t mult0 = 0xD2511F53u;
    static constexpr std::uint32_t mult1 = 0xCD9E8D57u;
    static constexpr std::uint32_t weyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t weyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(mult0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(mult1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += weyl0;
            key[1] += weyl1;
        }
        return ctr;
    }
};

// Deterministic substream of uniforms for one sample index.
class SampleStream {
  public:
    SampleStream(std::uint64_t seed, std::uint64_t sample_index, std::uint32_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(sample_index),
                static_cast<std::uint32_t>(sample_index >> 32), stream_id, 0} {}

    // uniform in the open interval (0, 1); never 0 or 1
    double next_uniform() {
        if (!have_buffered_) {
            auto ctr = base_;
            ctr[3] = draw_++;
            const auto out = Philox4x32::block(ctr, key_);
            const std::uint64_t a =
                (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
            const std::uint64_t b =
                (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
            buffered_ = (static_cast<double>(b >> 11) + 0.5) * 0x1p-53;
            have_buffered_ = true;
            return (static_cast<double>(a >> 11) + 0.5) * 0x1p-53;
        }
        have_buffered_ = false;
        return buffered_;
    }

    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::uint32_t draw_ = 0;
    double buffered_ = 0.0;
    bool have_buffered_ = false;
};

namespace detail {

// Marsaglia-Tsang squeeze; shape < 1 boosted through shape + 1.
inline double gamma_draw(SampleStream& st, double shape, double scale) {
    if (shape < 1.0) {
        const double u = st.next_uniform();
        return gamma_draw(st, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    while (true) {
        const double z = st.next_normal();
        const double t = 1.0 + c * z;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = st.next_uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) return scale * d * v;
        if (std::log(u) < 0.5 * z2 + d - d * v + d * std::log(v)) return scale * d * v;
    }
}

inline double beta_one(SampleStream& st, double b) {
    // Beta(1, b): 1 - (1-U)^{1/b}; U uniform, so use U directly
    return -std::expm1(std::log(st.next_uniform()) / b);
}

inline double base_draw(SampleStream& st, const DistributionSpec& spec) {
    switch (spec.family()) {
        case Family::gamma: return gamma_draw(st, spec.shape(), spec.scale());
        case Family::weibull:
            return spec.scale() *
                   std::pow(-std::log(st.next_uniform()), 1.0 / spec.shape());
        case Family::exponential: return -spec.scale() * std::log(st.next_uniform());
    }
    return 0.0;
}

// Draw from the (s-1)-power-size-biased version of the spec.
inline double power_weighted_draw(SampleStream& st, const DistributionSpec& spec, int s) {
    switch (spec.family()) {
        case Family::gamma:
            return gamma_draw(st, spec.shape() + (s - 1.0), spec.scale());
        case Family::exponential:
            return gamma_draw(st, static_cast<double>(s), spec.scale());
        case Family::weibull:
            return spec.scale() *
                   std::pow(gamma_draw(st, 1.0 + (s - 1.0) / spec.shape(), 1.0),
                            1.0 / spec.shape());
    }
    return 0.0;
}

}  // namespace detail

// Tail of the (s-1)-power-size-biased version of the spec, in log form:
// P(W > t) = Q(a, m(t)) for the family-specific shape a and map m.
inline double log_weighted_tail(const DistributionSpec& spec, int s, double t) {
    detail::require_nonnegative_finite(t, "log_weighted_tail");
    switch (spec.family()) {
        case Family::gamma:
            return log_gamma_q(spec.shape() + (s - 1.0), t / spec.scale());
        case Family::exponential:
            return log_gamma_q(static_cast<double>(s), t / spec.scale());
        case Family::weibull:
            return log_gamma_q(1.0 + (s - 1.0) / spec.shape(),
                               std::pow(t / spec.scale(), spec.shape()));
    }
    return 0.0;
}

// Inverse of the weighted tail at probability u: bracketed bisection with a
// Newton step inside the bracket, to 1e-12 on the log tail.
inline double invert_weighted_tail(const DistributionSpec& spec, int s, double u) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("invert_weighted_tail: requires 0 < u < 1");
    double a;
    switch (spec.family()) {
        case Family::gamma: a = spec.shape() + (s - 1.0); break;
        case Family::exponential: a = static_cast<double>(s); break;
        case Family::weibull: a = 1.0 + (s - 1.0) / spec.shape(); break;
        default: a = 1.0; break;
    }
    const double target = std::log(u);
    double lo = 0.0;
    double hi = std::max(a, 1.0);
    int guard = 0;
    while (log_gamma_q(a, hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 300)
            throw std::runtime_error("invert_weighted_tail: bracketing failed at u=" +
                                     std::to_string(u));
    }
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double lq = log_gamma_q(a, v);
        const double g = lq - target;
        if (std::fabs(g) < 1e-12) break;
        (g > 0.0 ? lo : hi) = v;
        const double slope = -std::exp((a - 1.0) * std::log(v) - v - log_gamma(a) - lq);
        const double newton = v - g / slope;
        v = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * v) break;
    }
    switch (spec.family()) {
        case Family::weibull:
            return spec.scale() * std::pow(v, 1.0 / spec.shape());
        default:
            return spec.scale() * v;
    }
}

struct SampleBatch {
    DistributionSpec spec;
    int s;
    std::uint64_t seed;
    std::vector<double> values;

    std::size_t count() const { return values.size(); }
};

// Seed-deterministic batch from the s-iterate of the spec; s = 1 samples the
// spec itself.
inline SampleBatch sample_iterated(const DistributionSpec& spec, int s,
                                   std::size_t count, std::uint64_t seed) {
    if (s < 1) throw std::domain_error("sample_iterated: s must be >= 1");
    if (count < 1) throw std::domain_error("sample_iterated: count must be >= 1");
    SampleBatch batch{spec, s, seed, {}};
    batch.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        SampleStream st(seed, i, 0);
        if (s == 1) {
            batch.values[i] = detail::base_draw(st, spec);
        } else {
            const double w = detail::power_weighted_draw(st, spec, s);
            const double b = detail::beta_one(st, s - 1.0);
            batch.values[i] = b * w;
        }
    }
    return batch;
}

// Cubic-interpolated iterated tail on a dense grid, for evaluating the
// analytic CDF at many points without re-running quadrature.
class IteratedTailCurve {
  public:
    IteratedTailCurve(const DistributionSpec& spec, int s, double x_max,
                      std::size_t points = 4097, const QuadratureConfig& cfg = {})
        : values_(points) {
        if (points < 8 || !(x_max > 0.0))
            throw std::invalid_argument("IteratedTailCurve: bad grid");
        h_ = x_max / static_cast<double>(points - 1);
        for (std::size_t i = 0; i < points; ++i)
            values_[i] = iterated_tail(spec, s, h_ * static_cast<double>(i), cfg);
    }

    double tail_at(double x) const {
        if (x <= 0.0) return 1.0;
        const double pos = x / h_;
        const std::size_t n = values_.size();
        if (pos >= static_cast<double>(n - 1)) return values_[n - 1];
        std::size_t j = static_cast<std::size_t>(pos);
        j = std::clamp<std::size_t>(j, 1, n - 3);
        const double t = pos - static_cast<double>(j);
        const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        return w0 * values_[j - 1] + w1 * values_[j] + w2 * values_[j + 1] +
               w3 * values_[j + 2];
    }

  private:
    double h_;
    std::vector<double> values_;
};

// Kolmogorov-Smirnov distance between the batch and an arbitrary tail
// function: sup over the sorted sample of |empirical CDF - (1 - tail)|.
template <typename TailFn>
double ks_distance_against(const SampleBatch& batch, TailFn&& tail_fn) {
    if (batch.values.empty()) throw std::invalid_argument("ks_distance: empty batch");
    std::vector<double> sorted = batch.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = 1.0 - tail_fn(sorted[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::fabs(cdf - lo), std::fabs(cdf - hi)});
    }
    return d;
}

// KS distance against the batch's own analytic s-iterate.  Closed-form specs
// evaluate the tail directly; quadrature specs go through an interpolated
// curve so the per-sample cost stays flat.
inline double ks_distance(const SampleBatch& batch, const QuadratureConfig& cfg = {}) {
    if (batch.values.empty()) throw std::invalid_argument("ks_distance: empty batch");
    if (batch.spec.has_integer_shape())
        return ks_distance_against(batch, [&](double x) {
            return iterated_tail(batch.spec, batch.s, x, cfg);
        });
    const double x_max =
        *std::max_element(batch.values.begin(), batch.values.end()) * 1.0000001;
    const IteratedTailCurve curve(batch.spec, batch.s, x_max, 4097, cfg);
    return ks_distance_against(batch, [&](double x) { return curve.tail_at(x); });
}

}  // namespace iterdist
