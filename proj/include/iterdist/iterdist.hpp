#pragma once

#include "iterdist/convolve.hpp"
#include "iterdist/csv.hpp"
#include "iterdist/distribution.hpp"
#include "iterdist/iterate.hpp"
#include "iterdist/limits.hpp"
#include "iterdist/ordering.hpp"
#include "iterdist/quadrature.hpp"
#include "iterdist/sampler.hpp"
#include "iterdist/special.hpp"

namespace iterdist {
inline constexpr const char* version = "0.1.0";
}
