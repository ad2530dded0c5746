#pragma once

#include <algorithm>
#include <vector>

#include "fixprice/dist.hpp"

namespace fixprice::detail {

inline constexpr Money kPriceTolerance = 1e-10;

struct Crossing {
    Money price;
    double level; // min(buyer_weight * F̄(price), seller_weight * G(price))
};

inline bool improves(double candidate, double best) { return candidate > best + 1e-12 * std::max(1.0, best); }

// Price maximizing min(buyer_weight * F̄(p), seller_weight * G(p)); ties go to
// the smallest price.
//
// Both atomless: the gap buyer_weight * F̄ - seller_weight * G is continuous and
// nonincreasing, so bisection brackets its first zero and a final secant step
// inside the bracket (where both functions are affine) removes the residual.
// Otherwise the optimum sits on a support point/breakpoint or on the affine
// crossing inside one of the open intervals between them.
inline Crossing balanced_crossing(const Distribution& buyer, const Distribution& seller, double buyer_weight,
                                  double seller_weight) {
    const auto level = [&](Money p) { return std::min(buyer_weight * buyer.survival(p), seller_weight * seller.cdf(p)); };
    const auto gap = [&](Money p) { return buyer_weight * buyer.survival(p) - seller_weight * seller.cdf(p); };

    if (buyer.atomless() && seller.atomless()) {
        Money lo = std::min(buyer.values().front(), seller.values().front());
        Money hi = std::max(buyer.values().back(), seller.values().back());
        if (gap(lo) <= 0) return {lo, level(lo)};
        for (int iter = 0; iter < 200 && hi - lo > kPriceTolerance; ++iter) {
            const Money mid = lo + (hi - lo) / 2;
            if (gap(mid) <= 0) hi = mid;
            else lo = mid;
        }
        const double g_lo = gap(lo);
        const double g_hi = gap(hi);
        Money p = hi;
        if (g_lo > 0 && g_hi < 0) p = std::clamp(lo + g_lo / (g_lo - g_hi) * (hi - lo), lo, hi);
        return {p, level(p)};
    }

    std::vector<Money> grid(buyer.values().begin(), buyer.values().end());
    grid.insert(grid.end(), seller.values().begin(), seller.values().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<Money> candidates = grid;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const Money a = grid[i];
        const Money b = grid[i + 1];
        const Money t1 = a + (b - a) / 3;
        const Money t2 = a + 2 * (b - a) / 3;
        const double g1 = gap(t1);
        const double g2 = gap(t2);
        if (g1 == g2) continue;
        const Money t = t1 - g1 * (t2 - t1) / (g2 - g1);
        if (t > a && t < b) candidates.push_back(t);
    }
    std::sort(candidates.begin(), candidates.end());

    Crossing best{candidates.front(), level(candidates.front())};
    for (const Money p : candidates) {
        const double v = level(p);
        if (improves(v, best.level)) best = {p, v};
    }
    return best;
}

} // namespace fixprice::detail
