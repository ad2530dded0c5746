#pragma once

#include "fixprice/detail/pieces.hpp"
#include "fixprice/dist.hpp"

namespace fixprice {

/// r = Pr[v >= w] for independent v ~ buyer, w ~ seller, computed exactly for
/// every combination of discrete and piecewise-uniform laws.
inline Probability trade_probability(const Distribution& buyer, const Distribution& seller) {
    return std::clamp(detail::pair_moments(buyer, seller).probability, 0.0, 1.0);
}

} // namespace fixprice
