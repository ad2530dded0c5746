#pragma once

#include <algorithm>
#include <vector>

#include "fixprice/dist.hpp"

namespace fixprice::detail {

// A sub-probability piece of a distribution: an atom (lo == hi) or a uniform
// cell on [lo, hi]. Masses are not renormalized.
struct Piece {
    Money lo;
    Money hi;
    double mass;

    bool atom() const { return lo == hi; }
    Money mean() const { return (lo + hi) / 2; }
};

// Truncation window; open/closed ends matter only for atoms.
struct Window {
    Money lo = -kInfinity;
    bool lo_open = false;
    Money hi = kInfinity;
    bool hi_open = false;

    bool contains(Money x) const {
        const bool above = lo_open ? x > lo : x >= lo;
        const bool below = hi_open ? x < hi : x <= hi;
        return above && below;
    }
};

inline std::vector<Piece> pieces(const Distribution& d, const Window& w = {}) {
    std::vector<Piece> out;
    const auto values = d.values();
    const auto masses = d.masses();
    if (!d.atomless()) {
        for (std::size_t i = 0; i < masses.size(); ++i)
            if (masses[i] > 0 && w.contains(values[i])) out.push_back({values[i], values[i], masses[i]});
        return out;
    }
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (!(masses[i] > 0)) continue;
        const Money a = std::max(values[i], w.lo);
        const Money b = std::min(values[i + 1], w.hi);
        if (!(a < b)) continue;
        out.push_back({a, b, masses[i] * ((b - a) / (values[i + 1] - values[i]))});
    }
    return out;
}

// Splits every cell at the interior points of `grid` (sorted, unique).
inline std::vector<Piece> split_on(const std::vector<Piece>& ps, const std::vector<Money>& grid) {
    std::vector<Piece> out;
    out.reserve(ps.size());
    for (const auto& p : ps) {
        if (p.atom()) {
            out.push_back(p);
            continue;
        }
        const double density = p.mass / (p.hi - p.lo);
        Money start = p.lo;
        for (auto it = std::upper_bound(grid.begin(), grid.end(), p.lo); it != grid.end() && *it < p.hi; ++it) {
            out.push_back({start, *it, density * (*it - start)});
            start = *it;
        }
        out.push_back({start, p.hi, density * (p.hi - start)});
    }
    return out;
}

struct PairMoments {
    double probability = 0; // Pr[v >= w]
    double surplus = 0;     // E[(v - w) 1(v >= w)]
};

// Exact moments of the positive part of v - w for independent v ~ buyer,
// w ~ seller (sub-probability measures). After refining both sides on a common
// grid any two pieces are either ordered or identical cells, and identical
// uniform cells give Pr = 1/2 and E[(v - w)^+] = width / 6.
inline PairMoments pair_moments(const std::vector<Piece>& buyer, const std::vector<Piece>& seller) {
    std::vector<Money> grid;
    grid.reserve(2 * (buyer.size() + seller.size()));
    for (const auto* side : {&buyer, &seller})
        for (const auto& p : *side) {
            grid.push_back(p.lo);
            grid.push_back(p.hi);
        }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto b = split_on(buyer, grid);
    const auto s = split_on(seller, grid);
    PairMoments out;
    for (const auto& v : b) {
        for (const auto& w : s) {
            const double weight = v.mass * w.mass;
            if (v.lo >= w.hi) {
                out.probability += weight;
                out.surplus += weight * (v.mean() - w.mean());
            } else if (v.hi > w.lo) {
                out.probability += weight / 2;
                out.surplus += weight * (v.hi - v.lo) / 6;
            }
        }
    }
    return out;
}

inline PairMoments pair_moments(const Distribution& buyer, const Distribution& seller, const Window& buyer_window = {},
                                const Window& seller_window = {}) {
    return pair_moments(pieces(buyer, buyer_window), pieces(seller, seller_window));
}

} // namespace fixprice::detail
