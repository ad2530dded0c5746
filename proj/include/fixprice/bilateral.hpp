#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "fixprice/detail/crossing.hpp"
#include "fixprice/detail/pieces.hpp"
#include "fixprice/dist.hpp"
#include "fixprice/trade.hpp"

namespace fixprice {

/// One buyer with valuation law `buyer` (f) and one seller with law `seller` (g).
class BilateralInstance {
public:
    BilateralInstance(Distribution buyer, Distribution seller)
        : buyer_(std::move(buyer)), seller_(std::move(seller)), r_(fixprice::trade_probability(buyer_, seller_)) {}

    const Distribution& buyer() const { return buyer_; }
    const Distribution& seller() const { return seller_; }

    /// r = Pr[v >= w], computed once at construction.
    Probability trade_probability() const { return r_; }

    bool atomless() const { return buyer_.atomless() && seller_.atomless(); }

private:
    Distribution buyer_;
    Distribution seller_;
    Probability r_;
};

/// OPT split at a price p into missed-left, traded, and missed-right surplus.
/// The traded part is further split at p into the seller's (gftl) and the
/// buyer's (gftr) share.
struct GftDecomposition {
    Money mgftl = 0;
    Money gftl = 0;
    Money gftr = 0;
    Money mgftr = 0;
    Money price = 0;

    Money gft() const { return gftl + gftr; }
    Money total() const { return mgftl + gft() + mgftr; }
};

enum class PricingRule { Balanced, Median, LogRule, BestSearch };
enum class TradeSide { BuyerSide, SellerSide };

constexpr std::string_view to_string(PricingRule rule) {
    switch (rule) {
    case PricingRule::Balanced: return "balanced";
    case PricingRule::Median: return "median";
    case PricingRule::LogRule: return "logrule";
    case PricingRule::BestSearch: return "best";
    }
    return "?";
}

constexpr std::string_view to_string(TradeSide side) {
    return side == TradeSide::BuyerSide ? "buyer_side" : "seller_side";
}

/// One conditional balanced price of the log rule, for dyadic band `band` (1-based).
struct LogRuleCandidate {
    int band;
    Money price;
    Money gft;
    Probability event_probability; // Pr[E(band)]
};

/// A price together with the approximation factor it is guaranteed to achieve
/// on the instance it was issued for, and the quantities that justify it.
struct PriceCertificate {
    PricingRule rule = PricingRule::Balanced;
    Money price = 0;
    Probability q = 0; // min(F̄(price), G(price))
    Probability r = 0;
    double guaranteed_ratio = 1;
    bool no_beneficial_trade = false;

    // Log rule only.
    std::optional<TradeSide> case_label;
    std::optional<Money> thresholds_x; // G(x) = r/2
    std::optional<Money> thresholds_y; // F̄(y) = r/2
    Money tail_surplus = 0;            // E[(v-w) 1(w <= v, w > y)]
    int band_count = 0;
    std::vector<LogRuleCandidate> candidates;
};

struct BestPrice {
    Money price;
    Money gft;
};

namespace detail {

inline void check_price(Money p) {
    if (!(p >= 0) || !std::isfinite(p)) throw DomainError("price must be finite and non-negative");
}

inline int dyadic_band_count(Probability r) {
    return std::max(1, static_cast<int>(std::ceil(std::log2(2.0 / r) - 1e-12)));
}

} // namespace detail

/// OPT = E[max(0, v - w)].
inline Money opt_gft(const BilateralInstance& inst) {
    return detail::pair_moments(inst.buyer(), inst.seller()).surplus;
}

/// q(p) = min(Pr[v >= p], Pr[w <= p]).
inline Probability balance_q(const BilateralInstance& inst, Money p) {
    return std::min(inst.buyer().survival(p), inst.seller().cdf(p));
}

/// GFT(p) = E[(v - w) 1(w <= p <= v)], via partial expectations.
inline Money gft_at(const BilateralInstance& inst, Money p) {
    detail::check_price(p);
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    const Money seller_side = p * g.cdf(p) - g.partial_expectation_below(p);
    const Money buyer_side = f.partial_expectation_above(p) - p * f.survival(p);
    return std::max(0.0, f.survival(p) * seller_side) + std::max(0.0, g.cdf(p) * buyer_side);
}

inline GftDecomposition gft_decomposition(const BilateralInstance& inst, Money p) {
    detail::check_price(p);
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    GftDecomposition d;
    d.price = p;
    d.gftl = std::max(0.0, f.survival(p) * (p * g.cdf(p) - g.partial_expectation_below(p)));
    d.gftr = std::max(0.0, g.cdf(p) * (f.partial_expectation_above(p) - p * f.survival(p)));
    d.mgftl = detail::pair_moments(f, g, {.hi = p, .hi_open = true}).surplus;
    d.mgftr = detail::pair_moments(f, g, {}, {.lo = p, .lo_open = true}).surplus;
    return d;
}

/// The price maximizing q(p). The certificate's ratio 1/q bounds OPT / GFT(price).
inline PriceCertificate balanced_price(const BilateralInstance& inst) {
    const auto crossing = detail::balanced_crossing(inst.buyer(), inst.seller(), 1.0, 1.0);
    PriceCertificate cert;
    cert.rule = PricingRule::Balanced;
    cert.price = crossing.price;
    cert.q = balance_q(inst, crossing.price);
    cert.r = inst.trade_probability();
    cert.no_beneficial_trade = !(cert.q > 0);
    cert.guaranteed_ratio = cert.no_beneficial_trade ? kInfinity : 1.0 / cert.q;
    return cert;
}

/// Any price between the seller's (lower) median and the buyer's (upper)
/// median has q >= 1/2; the midpoint is returned.
inline PriceCertificate median_price(const BilateralInstance& inst) {
    const Money buyer_median = inst.buyer().survival_inverse(0.5);
    const Money seller_median = inst.seller().quantile(0.5);
    if (seller_median > buyer_median) throw PreconditionError("median condition fails: median(g) > median(f)");
    PriceCertificate cert;
    cert.rule = PricingRule::Median;
    cert.price = (seller_median + buyer_median) / 2;
    cert.q = balance_q(inst, cert.price);
    cert.r = inst.trade_probability();
    cert.guaranteed_ratio = 2.0;
    return cert;
}

/// Thresholds (x, y) with G(x) = r/2 and F̄(y) = r/2; y >= x always holds.
inline std::pair<Money, Money> case_thresholds(const BilateralInstance& inst) {
    if (!inst.atomless()) throw PreconditionError("atomless required: smooth point masses first");
    const Probability r = inst.trade_probability();
    if (!(r > 0)) throw PreconditionError("no beneficial trade (r = 0)");
    return {inst.seller().quantile(r / 2), inst.buyer().survival_inverse(r / 2)};
}

namespace detail {

// Buyer-side candidates: for band i the seller is conditioned on
// a_{i-1} <= w <= a_i and the buyer on v >= a_{i-1}, where a_i = F̄^{-1}(2^-i);
// the first band takes every w <= a_1. p_i balances the two conditional laws.
inline std::vector<LogRuleCandidate> buyer_side_candidates(const Distribution& f, const Distribution& g, int bands) {
    std::vector<LogRuleCandidate> out;
    Money prev = f.survival_inverse(1.0);
    for (int i = 1; i <= bands; ++i) {
        const Money cut = f.survival_inverse(std::ldexp(1.0, -i));
        const Money lo = i == 1 ? 0.0 : prev;
        const Probability seller_mass = g.cdf(cut) - g.cdf(lo);
        if (seller_mass > 0 && lo < cut) {
            const Distribution buyer_cond = f.restrict(prev, kInfinity);
            const Distribution seller_cond = g.restrict(lo, cut);
            const auto crossing = balanced_crossing(buyer_cond, seller_cond, 1.0, 1.0);
            out.push_back({i, crossing.price, 0.0, seller_mass * f.survival(prev)});
        }
        prev = cut;
    }
    return out;
}

} // namespace detail

/// The log-rule price p*: best of ⌈log2(2/r)⌉ conditional balanced prices on
/// dyadic tail bands, with guarantee OPT <= 4 ⌈log2(2/r)⌉ GFT(p*).
/// Requires atomless distributions and r > 0.
inline PriceCertificate log_rule_price(const BilateralInstance& inst) {
    const auto [x, y] = case_thresholds(inst);
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    const Probability r = inst.trade_probability();

    PriceCertificate cert;
    cert.rule = PricingRule::LogRule;
    cert.r = r;
    cert.thresholds_x = x;
    cert.thresholds_y = y;
    cert.band_count = detail::dyadic_band_count(r);
    cert.guaranteed_ratio = 4.0 * cert.band_count;
    cert.tail_surplus = detail::pair_moments(f, g, {}, {.lo = y, .lo_open = true}).surplus;

    const Money opt = opt_gft(inst);
    if (cert.tail_surplus <= opt / 2) {
        cert.case_label = TradeSide::BuyerSide;
        cert.candidates = detail::buyer_side_candidates(f, g, cert.band_count);
    } else {
        cert.case_label = TradeSide::SellerSide;
        const Money pivot = std::max(f.values().back(), g.values().back());
        cert.candidates = detail::buyer_side_candidates(g.reflect(pivot), f.reflect(pivot), cert.band_count);
        for (auto& c : cert.candidates) c.price = std::max(0.0, pivot - c.price);
    }

    bool first = true;
    for (auto& c : cert.candidates) {
        c.gft = gft_at(inst, c.price);
        if (first || detail::improves(c.gft, gft_at(inst, cert.price))) {
            cert.price = c.price;
            first = false;
        }
    }
    cert.q = balance_q(inst, cert.price);
    return cert;
}

/// Exhaustive best fixed price. Discrete laws: GFT is piecewise constant
/// between support points, so the union of supports suffices. Cells with a
/// density are sampled and refined by golden-section search to 1e-9.
inline BestPrice best_fixed_price(const BilateralInstance& inst) {
    const auto& f = inst.buyer();
    const auto& g = inst.seller();
    std::vector<Money> grid(f.values().begin(), f.values().end());
    grid.insert(grid.end(), g.values().begin(), g.values().end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    BestPrice best{grid.front(), gft_at(inst, grid.front())};
    const auto consider = [&](Money p) {
        const Money v = gft_at(inst, p);
        if (detail::improves(v, best.gft) || (!detail::improves(best.gft, v) && p < best.price)) best = {p, v};
    };
    for (const Money p : grid) consider(p);
    if (inst.atomless() || f.atomless() || g.atomless()) {
        constexpr int kSamples = 8;
        const double inv_phi = (std::sqrt(5.0) - 1) / 2;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const Money a = grid[i];
            const Money b = grid[i + 1];
            const Money step = (b - a) / kSamples;
            int arg = 1;
            Money arg_value = -1;
            for (int k = 1; k < kSamples; ++k) {
                const Money v = gft_at(inst, a + k * step);
                if (v > arg_value) {
                    arg_value = v;
                    arg = k;
                }
            }
            Money lo = a + (arg - 1) * step;
            Money hi = a + (arg + 1) * step;
            Money c = hi - inv_phi * (hi - lo);
            Money d = lo + inv_phi * (hi - lo);
            Money fc = gft_at(inst, c);
            Money fd = gft_at(inst, d);
            while (hi - lo > 1e-9) {
                if (fc >= fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - inv_phi * (hi - lo);
                    fc = gft_at(inst, c);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + inv_phi * (hi - lo);
                    fd = gft_at(inst, d);
                }
            }
            consider((lo + hi) / 2);
        }
    }
    return best;
}

/// Certificate wrapper around best_fixed_price; the ratio is the realized OPT / GFT.
inline PriceCertificate best_search_price(const BilateralInstance& inst) {
    const auto best = best_fixed_price(inst);
    PriceCertificate cert;
    cert.rule = PricingRule::BestSearch;
    cert.price = best.price;
    cert.q = balance_q(inst, best.price);
    cert.r = inst.trade_probability();
    const Money opt = opt_gft(inst);
    cert.no_beneficial_trade = !(opt > 0);
    cert.guaranteed_ratio = best.gft > 0 ? std::max(1.0, opt / best.gft) : kInfinity;
    return cert;
}

inline PriceCertificate price_by_rule(const BilateralInstance& inst, PricingRule rule) {
    switch (rule) {
    case PricingRule::Balanced: return balanced_price(inst);
    case PricingRule::Median: return median_price(inst);
    case PricingRule::LogRule: return log_rule_price(inst);
    case PricingRule::BestSearch: return best_search_price(inst);
    }
    return balanced_price(inst);
}

} // namespace fixprice
