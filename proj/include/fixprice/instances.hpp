#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fixprice/bilateral.hpp"
#include "fixprice/dist.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/rng.hpp"

namespace fixprice {

inline constexpr int kMaxLowerBoundN = 15;

/// Discrete family with geometric masses where a fixed price loses a factor
/// of order N (= support size) against OPT.
struct LowerBoundSpec {
    int N = 1;
    double epsilon = 5.0 / 36.0;

    void validate() const {
        if (N < 1) throw DomainError("N must be >= 1");
        if (N > kMaxLowerBoundN) throw DomainError("N capped at 15");
        if (!(epsilon >= 5.0 / 36.0 && epsilon < 1)) throw DomainError("epsilon must lie in [5/36, 1)");
    }

    /// α = sum_{x=0}^{N-1} 10^{-x}.
    double alpha() const {
        long double a = 0;
        for (int x = N - 1; x >= 0; --x) a += std::pow(10.0L, -x);
        return static_cast<double>(a);
    }
};

/// Buyer atoms at k + ε with mass 10^{-(k-1)}/α, seller atoms at k with mass
/// 10^{k-N}/α, for k = 1..N.
inline BilateralInstance lower_bound_instance(const LowerBoundSpec& spec) {
    spec.validate();
    long double alpha = 0;
    for (int x = spec.N - 1; x >= 0; --x) alpha += std::pow(10.0L, -x);
    std::vector<Atom> buyer;
    std::vector<Atom> seller;
    std::vector<long double> fb(spec.N);
    std::vector<long double> gs(spec.N);
    for (int k = 1; k <= spec.N; ++k) {
        fb[k - 1] = std::pow(10.0L, -(k - 1)) / alpha;
        gs[k - 1] = std::pow(10.0L, k - spec.N) / alpha;
    }
    // Sum smallest terms first.
    long double sum_b = 0;
    long double sum_s = 0;
    for (int k = spec.N; k >= 1; --k) sum_b += fb[k - 1];
    for (int k = 1; k <= spec.N; ++k) sum_s += gs[k - 1];
    for (int k = 1; k <= spec.N; ++k) {
        buyer.push_back({k + spec.epsilon, static_cast<double>(fb[k - 1] / sum_b)});
        seller.push_back({static_cast<double>(k), static_cast<double>(gs[k - 1] / sum_s)});
    }
    return {Distribution::discrete(std::move(buyer)), Distribution::discrete(std::move(seller))};
}

struct LowerBoundReport {
    LowerBoundSpec spec;
    double alpha = 0;
    Probability r = 0;
    Money opt = 0;
    Money best_price = 0;
    Money best_gft = 0;
    double ratio = 0;      // OPT / best GFT
    double quarter_n = 0;  // N/4
    double r_floor = 0;    // 10^{-N+ε}
    bool ratio_holds = false;
    bool r_holds = false;
    std::vector<std::pair<Money, Money>> table; // (p, GFT(p)) over both supports
};

inline LowerBoundReport lower_bound_report(const LowerBoundSpec& spec) {
    const auto inst = lower_bound_instance(spec);
    LowerBoundReport rep;
    rep.spec = spec;
    rep.alpha = spec.alpha();
    rep.r = inst.trade_probability();
    rep.opt = opt_gft(inst);
    const auto best = best_fixed_price(inst);
    rep.best_price = best.price;
    rep.best_gft = best.gft;
    rep.ratio = best.gft > 0 ? rep.opt / best.gft : kInfinity;
    rep.quarter_n = spec.N / 4.0;
    rep.r_floor = std::pow(10.0, -spec.N + spec.epsilon);
    rep.ratio_holds = rep.ratio >= rep.quarter_n;
    rep.r_holds = rep.r >= rep.r_floor;

    std::vector<Money> prices(inst.buyer().values().begin(), inst.buyer().values().end());
    prices.insert(prices.end(), inst.seller().values().begin(), inst.seller().values().end());
    std::sort(prices.begin(), prices.end());
    for (const Money p : prices) rep.table.emplace_back(p, gft_at(inst, p));
    return rep;
}

enum class InstanceKind { Discrete, Piecewise, Mixed };

namespace detail {

// Random sub-range of [0, 10] at least 0.5 wide.
inline std::pair<Money, Money> random_range(RngStream& stream) {
    Money a = 10 * stream.uniform();
    Money b = 10 * stream.uniform();
    if (a > b) std::swap(a, b);
    if (b - a < 0.5) {
        a = std::max(0.0, a - 0.25);
        b = std::min(10.0, a + 0.5);
    }
    return {a, b};
}

inline std::vector<Probability> random_masses(RngStream& stream, std::size_t k) {
    std::vector<Probability> w(k);
    double total = 0;
    for (auto& x : w) total += (x = -std::log(stream.uniform()) + 1e-3);
    for (auto& x : w) x /= total;
    return w;
}

inline Distribution random_discrete(RngStream& stream, int size) {
    const auto [lo, hi] = random_range(stream);
    std::vector<Money> values;
    for (int i = 0; i < size; ++i) values.push_back(std::round((lo + (hi - lo) * stream.uniform()) * 10) / 10);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const auto masses = random_masses(stream, values.size());
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({values[i], masses[i]});
    return Distribution::discrete(std::move(atoms));
}

inline Distribution random_piecewise(RngStream& stream, int size) {
    const auto [lo, hi] = random_range(stream);
    std::vector<Money> breaks{lo, hi};
    for (int i = 1; i < size; ++i) breaks.push_back(lo + (hi - lo) * stream.uniform());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return Distribution::piecewise_uniform(breaks, random_masses(stream, breaks.size() - 1));
}

} // namespace detail

/// Seeded random bilateral instance with `size` atoms or cells per side on
/// random sub-ranges of [0, 10]. Mixed draws one discrete and one piecewise side.
inline BilateralInstance random_instance(InstanceKind kind, int size, std::uint64_t seed) {
    if (size < 1) throw DomainError("size must be >= 1");
    RngStream stream(seed);
    const auto side = [&](bool discrete) {
        return discrete ? detail::random_discrete(stream, size) : detail::random_piecewise(stream, size);
    };
    switch (kind) {
    case InstanceKind::Discrete: {
        auto f = side(true);
        return {std::move(f), side(true)};
    }
    case InstanceKind::Piecewise: {
        auto f = side(false);
        return {std::move(f), side(false)};
    }
    case InstanceKind::Mixed: {
        const bool buyer_discrete = stream.next() & 1;
        auto f = side(buyer_discrete);
        return {std::move(f), side(!buyer_discrete)};
    }
    }
    throw DomainError("unknown instance kind");
}

} // namespace fixprice
