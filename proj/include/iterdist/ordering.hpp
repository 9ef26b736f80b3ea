#pragma once

// Numerical checks of the iterated-tail-ratio stochastic order: is
// tail_Y,s / tail_X,s nondecreasing over a grid?  Verdicts are grid-based
// numerical evidence, never proofs; ratios are formed in log space and grid
// points where either tail has underflowed are dropped and counted.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iterdist/distribution.hpp"
#include "iterdist/iterate.hpp"

namespace iterdist {

struct OrderCheckResult {
    DistributionSpec spec_x;
    DistributionSpec spec_y;
    int s;
    std::vector<double> grid;       // points actually evaluated
    std::vector<double> log_ratio;  // log tail_Y,s - log tail_X,s
    int dropped_points;             // underflowed grid points, excluded
    double max_violation;           // largest decrease between consecutive ratios
    bool monotone_nondecreasing;
    double tolerance;
};

inline constexpr double order_log_tail_floor = -700.0;

inline OrderCheckResult sfr_check(const DistributionSpec& spec_x,
                                  const DistributionSpec& spec_y, int s,
                                  const std::vector<double>& grid, double tol = 1e-9,
                                  const QuadratureConfig& cfg = {}) {
    if (grid.empty()) throw std::invalid_argument("sfr_check: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("sfr_check: grid must be positive");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw std::invalid_argument("sfr_check: grid must be strictly increasing");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("sfr_check: tolerance must be positive");
    OrderCheckResult r{spec_x, spec_y, s, {}, {}, 0, 0.0, true, tol};
    for (double x : grid) {
        const double lx = iterated_log_tail(spec_x, s, x, cfg);
        const double ly = iterated_log_tail(spec_y, s, x, cfg);
        if (lx < order_log_tail_floor || ly < order_log_tail_floor) {
            ++r.dropped_points;
            continue;
        }
        r.grid.push_back(x);
        r.log_ratio.push_back(ly - lx);
    }
    for (std::size_t i = 1; i < r.log_ratio.size(); ++i)
        r.max_violation = std::max(r.max_violation, r.log_ratio[i - 1] - r.log_ratio[i]);
    r.monotone_nondecreasing = r.max_violation <= tol;
    return r;
}

struct HeredityProbe {
    OrderCheckResult at_s;
    OrderCheckResult at_next;
    bool implication_holds;  // monotone at s implies monotone at s+1
};

inline HeredityProbe sfr_heredity_probe(const DistributionSpec& spec_x,
                                        const DistributionSpec& spec_y, int s,
                                        const std::vector<double>& grid,
                                        double tol = 1e-9,
                                        const QuadratureConfig& cfg = {}) {
    HeredityProbe p{sfr_check(spec_x, spec_y, s, grid, tol, cfg),
                    sfr_check(spec_x, spec_y, s + 1, grid, tol, cfg), true};
    p.implication_holds = !p.at_s.monotone_nondecreasing || p.at_next.monotone_nondecreasing;
    return p;
}

// Hazard of the s-iterate: density_s(x) / tail_s(x), with the density taken
// from the normalized lower-level tail.
inline double iterated_failure_rate(const DistributionSpec& spec, int s, double x,
                                    const QuadratureConfig& cfg = {}) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("iterated_failure_rate: x must be finite and > 0");
    if (s == 1) return failure_rate(spec, x);
    const double lt = iterated_log_tail(spec, s, x, cfg);
    if (lt < order_log_tail_floor)
        throw std::range_error("iterated_failure_rate: tail underflow");
    return std::exp(log_iterated_density(spec, s, x, cfg) - lt);
}

}  // namespace iterdist
