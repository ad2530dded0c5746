#pragma once

#include <algorithm>
#include <bit>
#include <vector>

#include "fixprice/bilateral.hpp"
#include "fixprice/double_auction.hpp"

// Slow reference implementations used to cross-check the exact evaluators.
namespace fixprice::oracle {

struct PairSums {
    Probability r = 0;
    Money opt = 0;
};

/// Enumerates every (v, w) atom pair. Both laws must be discrete.
inline PairSums enumerate_pairs(const BilateralInstance& inst) {
    PairSums out;
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    for (std::size_t i = 0; i < f.values().size(); ++i)
        for (std::size_t j = 0; j < g.values().size(); ++j) {
            const double mass = f.masses()[i] * g.masses()[j];
            if (f.values()[i] >= g.values()[j]) {
                out.r += mass;
                out.opt += mass * (f.values()[i] - g.values()[j]);
            }
        }
    return out;
}

/// GFT(p) by pair enumeration (discrete laws).
inline Money enumerate_gft(const BilateralInstance& inst, Money p) {
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    Money total = 0;
    for (std::size_t i = 0; i < f.values().size(); ++i)
        for (std::size_t j = 0; j < g.values().size(); ++j)
            if (g.values()[j] <= p && p <= f.values()[i])
                total += f.masses()[i] * g.masses()[j] * (f.values()[i] - g.values()[j]);
    return total;
}

/// max over all (X, Y) with sum X + sum Y = m of sum v X + sum w (Y - 1).
inline Money exhaustive_optimum(const Profile& profile) {
    const int n = static_cast<int>(profile.buyer_values.size());
    const int m = static_cast<int>(profile.seller_values.size());
    Money best = 0;
    for (unsigned xs = 0; xs < (1u << n); ++xs)
        for (unsigned ys = 0; ys < (1u << m); ++ys) {
            if (std::popcount(xs) + std::popcount(ys) != m) continue;
            Money value = 0;
            for (int i = 0; i < n; ++i)
                if (xs >> i & 1u) value += profile.buyer_values[i];
            for (int j = 0; j < m; ++j)
                if (!(ys >> j & 1u)) value -= profile.seller_values[j];
            best = std::max(best, value);
        }
    return best;
}

/// Counts (agent, report) deviations on `grid` that raise the agent's expected
/// utility, measured at her true value, above truthful reporting.
inline int dsic_violations(const Profile& truth, Money p, const std::vector<Money>& grid) {
    const auto [tb, ts] = trade_probabilities(truth, p);
    int violations = 0;
    for (std::size_t i = 0; i < truth.buyer_values.size(); ++i) {
        const double honest = tb[i] * (truth.buyer_values[i] - p);
        for (const Money report : grid) {
            Profile lie = truth;
            lie.buyer_values[i] = report;
            const double u = trade_probabilities(lie, p).first[i] * (truth.buyer_values[i] - p);
            if (u > honest + 1e-12) ++violations;
        }
    }
    for (std::size_t j = 0; j < truth.seller_values.size(); ++j) {
        const double honest = ts[j] * (p - truth.seller_values[j]);
        for (const Money report : grid) {
            Profile lie = truth;
            lie.seller_values[j] = report;
            const double u = trade_probabilities(lie, p).second[j] * (p - truth.seller_values[j]);
            if (u > honest + 1e-12) ++violations;
        }
    }
    return violations;
}

} // namespace fixprice::oracle
