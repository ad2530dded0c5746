#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fixprice/detail/crossing.hpp"
#include "fixprice/dist.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/rng.hpp"

namespace fixprice {

/// n buyers with i.i.d. values from `buyer`, m sellers with i.i.d. values from `seller`.
struct DoubleAuctionInstance {
    int n;
    int m;
    Distribution buyer;
    Distribution seller;

    DoubleAuctionInstance(int buyers, int sellers, Distribution f, Distribution g)
        : n(buyers), m(sellers), buyer(std::move(f)), seller(std::move(g)) {
        if (n < 1 || m < 1) throw DomainError("double auction needs n >= 1 and m >= 1");
    }

    bool atomless() const { return buyer.atomless() && seller.atomless(); }
};

struct BalancedPrice {
    Money price = 0;
    double expected_trades = 0; // #T
    Probability qbar_b = 0;     // F̄(p̄)
    Probability qbar_s = 0;     // G(p̄)
    bool no_beneficial_trade = false;
    bool balanced = false; // n F̄(p̄) = m G(p̄) holds (always for atomless laws)
};

struct Profile {
    std::vector<Money> buyer_values;
    std::vector<Money> seller_values;
};

struct Allocation {
    std::vector<bool> X; // buyer i ends with an item
    std::vector<bool> Y; // seller j keeps her item
    std::vector<std::pair<int, int>> pairs;
    Money gft = 0;

    int trades() const { return static_cast<int>(pairs.size()); }
};

struct Outcome : Allocation {
    Money price = 0;
    std::vector<Money> buyer_payments;
    std::vector<Money> seller_receipts;
};

struct FeasibleSets {
    std::vector<int> buyers;  // v_i >= p
    std::vector<int> sellers; // w_j <= p
};

/// p̄ maximizing min(n F̄(p), m G(p)); for atomless laws this is the crossing n F̄ = m G.
inline BalancedPrice da_balanced_price(const DoubleAuctionInstance& inst) {
    const auto crossing = detail::balanced_crossing(inst.buyer, inst.seller, inst.n, inst.m);
    BalancedPrice out;
    out.price = crossing.price;
    out.qbar_b = inst.buyer.survival(out.price);
    out.qbar_s = inst.seller.cdf(out.price);
    out.balanced = inst.atomless();
    out.expected_trades = out.balanced ? inst.n * out.qbar_b : std::min(inst.n * out.qbar_b, inst.m * out.qbar_s);
    out.no_beneficial_trade = !(crossing.level > 0);
    return out;
}

inline FeasibleSets feasible_pairs(const Profile& profile, Money p) {
    FeasibleSets out;
    for (int i = 0; i < static_cast<int>(profile.buyer_values.size()); ++i)
        if (profile.buyer_values[i] >= p) out.buyers.push_back(i);
    for (int j = 0; j < static_cast<int>(profile.seller_values.size()); ++j)
        if (profile.seller_values[j] <= p) out.sellers.push_back(j);
    return out;
}

/// Exact probability that each agent trades under run_mechanism: k/|B| for
/// feasible buyers, k/|S| for feasible sellers, 0 otherwise.
inline std::pair<std::vector<double>, std::vector<double>> trade_probabilities(const Profile& profile, Money p) {
    const auto sets = feasible_pairs(profile, p);
    const double k = static_cast<double>(std::min(sets.buyers.size(), sets.sellers.size()));
    std::vector<double> buyers(profile.buyer_values.size(), 0.0);
    std::vector<double> sellers(profile.seller_values.size(), 0.0);
    for (const int i : sets.buyers) buyers[i] = k / sets.buyers.size();
    for (const int j : sets.sellers) sellers[j] = k / sets.sellers.size();
    return {buyers, sellers};
}

namespace detail {

inline Outcome settle(const Profile& profile, Money p, std::vector<std::pair<int, int>> pairs) {
    Outcome out;
    out.price = p;
    out.X.assign(profile.buyer_values.size(), false);
    out.Y.assign(profile.seller_values.size(), true);
    out.buyer_payments.assign(profile.buyer_values.size(), 0.0);
    out.seller_receipts.assign(profile.seller_values.size(), 0.0);
    for (const auto [i, j] : pairs) {
        out.X[i] = true;
        out.Y[j] = false;
        out.buyer_payments[i] = p;
        out.seller_receipts[j] = p;
        out.gft += profile.buyer_values[i] - profile.seller_values[j];
    }
    out.pairs = std::move(pairs);
    return out;
}

// Uniform k-subset of `items`, returned in ascending order (partial Fisher-Yates).
inline std::vector<int> sample_subset(std::vector<int> items, std::size_t k, RngStream& stream) {
    for (std::size_t i = 0; i < k; ++i) std::swap(items[i], items[i + stream.index_below(items.size() - i)]);
    items.resize(k);
    std::sort(items.begin(), items.end());
    return items;
}

} // namespace detail

/// The fixed-price double auction at price p: the short side of the feasible
/// sets trades entirely, a uniform random subset of the long side trades with
/// it, paired in index order.
inline Outcome run_mechanism(const Profile& profile, Money p, RngStream& stream) {
    auto sets = feasible_pairs(profile, p);
    const std::size_t k = std::min(sets.buyers.size(), sets.sellers.size());
    if (sets.buyers.size() > k) sets.buyers = detail::sample_subset(std::move(sets.buyers), k, stream);
    if (sets.sellers.size() > k) sets.sellers = detail::sample_subset(std::move(sets.sellers), k, stream);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(k);
    for (std::size_t t = 0; t < k; ++t) pairs.emplace_back(sets.buyers[t], sets.sellers[t]);
    return detail::settle(profile, p, std::move(pairs));
}

/// Two-sided sequential posted price: agents arrive in a uniform random order
/// and accept p if it is individually rational; accepted buyers and sellers
/// wait in FIFO queues and are matched as soon as both queues are non-empty.
inline Outcome run_sequential_posted(const Profile& profile, Money p, RngStream& stream) {
    const int n = static_cast<int>(profile.buyer_values.size());
    const int m = static_cast<int>(profile.seller_values.size());
    std::vector<int> order(n + m);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[stream.index_below(i)]);

    std::vector<int> buyers;
    std::vector<int> sellers;
    std::size_t bi = 0;
    std::size_t si = 0;
    std::vector<std::pair<int, int>> pairs;
    for (const int agent : order) {
        if (agent < n) {
            if (profile.buyer_values[agent] >= p) buyers.push_back(agent);
        } else if (profile.seller_values[agent - n] <= p) {
            sellers.push_back(agent - n);
        }
        if (bi < buyers.size() && si < sellers.size()) pairs.emplace_back(buyers[bi++], sellers[si++]);
    }
    return detail::settle(profile, p, std::move(pairs));
}

/// Welfare-maximizing allocation: highest buyers matched with lowest sellers
/// while v > w (zero-gain ties are left untraded).
inline Allocation optimal_allocation(const Profile& profile) {
    const int n = static_cast<int>(profile.buyer_values.size());
    const int m = static_cast<int>(profile.seller_values.size());
    std::vector<int> b(n);
    std::vector<int> s(m);
    std::iota(b.begin(), b.end(), 0);
    std::iota(s.begin(), s.end(), 0);
    std::stable_sort(b.begin(), b.end(), [&](int x, int y) { return profile.buyer_values[x] > profile.buyer_values[y]; });
    std::stable_sort(s.begin(), s.end(), [&](int x, int y) { return profile.seller_values[x] < profile.seller_values[y]; });

    Allocation out;
    out.X.assign(n, false);
    out.Y.assign(m, true);
    for (int k = 0; k < std::min(n, m); ++k) {
        const Money gain = profile.buyer_values[b[k]] - profile.seller_values[s[k]];
        if (!(gain > 0)) break;
        out.X[b[k]] = true;
        out.Y[s[k]] = false;
        out.pairs.emplace_back(b[k], s[k]);
        out.gft += gain;
    }
    return out;
}

inline Profile draw_profile(const DoubleAuctionInstance& inst, RngStream& stream) {
    Profile profile;
    profile.buyer_values = inst.buyer.sample(stream, inst.n);
    profile.seller_values = inst.seller.sample(stream, inst.m);
    return profile;
}

struct ReplicateRecord {
    Money opt_gft = 0;
    Money mech_gft = 0;
    int opt_trades = 0;
    int mech_trades = 0;
    int feasible_buyers = 0;  // |B| at the simulated price
    int feasible_sellers = 0; // |S|
};

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs `replicates` independent profiles. Replicate i draws from its own
/// stream keyed by (seed, i), so the records do not depend on `workers`.
inline std::vector<ReplicateRecord> simulate(const DoubleAuctionInstance& inst, Money price, std::int64_t replicates,
                                             std::uint64_t seed, unsigned workers = default_workers()) {
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    std::vector<ReplicateRecord> records(static_cast<std::size_t>(replicates));
    const auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto stream = RngStream::for_replicate(seed, i);
            const auto profile = draw_profile(inst, stream);
            const auto sets = feasible_pairs(profile, price);
            const auto opt = optimal_allocation(profile);
            const auto mech = run_mechanism(profile, price, stream);
            records[i] = {opt.gft, mech.gft, opt.trades(), mech.trades(), static_cast<int>(sets.buyers.size()),
                          static_cast<int>(sets.sellers.size())};
        }
    };
    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::min<std::int64_t>(replicates, 256)));
    if (workers == 1) {
        run_range(0, records.size());
        return records;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (records.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(records.size(), begin + chunk);
        if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    return records;
}

/// Sample mean with its standard error; halfwidth() is the 3-SE band used by every report.
struct Estimate {
    double value = 0;
    double se = 0;
    std::int64_t replicates = 0;

    double halfwidth() const { return 3 * se; }
};

namespace detail {

template <class F>
Estimate mean_of(const std::vector<ReplicateRecord>& records, F field) {
    double sum = 0;
    for (const auto& r : records) sum += field(r);
    const double n = static_cast<double>(records.size());
    const double mean = sum / n;
    double ss = 0;
    for (const auto& r : records) ss += (field(r) - mean) * (field(r) - mean);
    const double var = records.size() > 1 ? ss / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n), static_cast<std::int64_t>(records.size())};
}

// Delta-method estimate of mean(num) / mean(den).
template <class F, class G>
Estimate ratio_of(const std::vector<ReplicateRecord>& records, F num, G den) {
    const auto a = mean_of(records, num);
    const auto b = mean_of(records, den);
    const double n = static_cast<double>(records.size());
    if (!(b.value > 0)) return {kInfinity, 0.0, a.replicates};
    const double ratio = a.value / b.value;
    double cov = 0;
    for (const auto& r : records) cov += (num(r) - a.value) * (den(r) - b.value);
    cov = records.size() > 1 ? cov / (n - 1) : 0.0;
    const double var_a = a.se * a.se * n;
    const double var_b = b.se * b.se * n;
    const double var = (var_a - 2 * ratio * cov + ratio * ratio * var_b) / (b.value * b.value);
    return {ratio, std::sqrt(std::max(0.0, var) / n), a.replicates};
}

inline Estimate frequency(std::int64_t hits, std::int64_t total) {
    const double p = static_cast<double>(hits) / static_cast<double>(total);
    return {p, std::sqrt(p * (1 - p) / static_cast<double>(total)), total};
}

// Interval of prices t with F̄(t) = q (buyer side) or G(t) = q (seller side),
// collapsed to the support edge when q is 0 or 1.
inline std::pair<Money, Money> buyer_level_interval(const Distribution& f, Probability q) {
    if (q >= 1) return {0.0, f.support_min()};
    if (q <= 0) return {f.support_max(), f.support_max()};
    return {f.quantile(1 - q), f.survival_inverse(q)};
}

inline std::pair<Money, Money> seller_level_interval(const Distribution& g, Probability q) {
    if (q <= 0) return {0.0, g.support_min()};
    if (q >= 1) return {g.support_max(), g.support_max()};
    return {g.quantile(q), g.survival_inverse(1 - q)};
}

} // namespace detail

struct DaDiagnostics {
    BalancedPrice balanced;
    Estimate opt;
    Estimate gft;
    Estimate ratio;      // mean GFT(p̄) / mean OPT
    Estimate q_b;        // per-buyer trade frequency under the optimal allocation
    Estimate q_s;        // per-seller trade frequency
    Estimate balance_gap; // n q̂ᴮ - m q̂ˢ
    Money p_b = 0;
    Money p_s = 0;
    std::pair<Money, Money> p_b_interval;
    std::pair<Money, Money> p_s_interval;
    bool prices_bracket = false;
    Money matched_tail_bound = 0;
    Money balanced_tail_bound = 0;
    std::int64_t replicates = 0;
    std::uint64_t seed = 0;
};

inline DaDiagnostics diagnose(const DoubleAuctionInstance& inst, const BalancedPrice& bp,
                              const std::vector<ReplicateRecord>& records, std::uint64_t seed) {
    DaDiagnostics d;
    d.balanced = bp;
    d.seed = seed;
    d.replicates = static_cast<std::int64_t>(records.size());
    const double n = inst.n;
    const double m = inst.m;
    d.opt = detail::mean_of(records, [](const ReplicateRecord& r) { return r.opt_gft; });
    d.gft = detail::mean_of(records, [](const ReplicateRecord& r) { return r.mech_gft; });
    d.ratio = detail::ratio_of(records, [](const ReplicateRecord& r) { return r.mech_gft; },
                               [](const ReplicateRecord& r) { return r.opt_gft; });
    d.q_b = detail::mean_of(records, [n](const ReplicateRecord& r) { return r.opt_trades / n; });
    d.q_s = detail::mean_of(records, [m](const ReplicateRecord& r) { return r.opt_trades / m; });
    d.balance_gap = detail::mean_of(records, [n, m](const ReplicateRecord& r) {
        return n * (r.opt_trades / n) - m * (r.opt_trades / m);
    });

    const Money pbar = bp.price;
    d.p_b_interval = detail::buyer_level_interval(inst.buyer, d.q_b.value);
    d.p_s_interval = detail::seller_level_interval(inst.seller, d.q_s.value);
    d.p_b = std::clamp(pbar, d.p_b_interval.first, d.p_b_interval.second);
    d.p_s = std::clamp(pbar, d.p_s_interval.first, d.p_s_interval.second);
    constexpr double tol = detail::kPriceTolerance;
    d.prices_bracket = (d.p_b >= pbar - tol && pbar >= d.p_s - tol) || (d.p_s >= pbar - tol && pbar >= d.p_b - tol);

    const Probability tail_b = inst.buyer.survival(d.p_b);
    const Probability tail_s = inst.seller.cdf(d.p_s);
    const Money cond_b = tail_b > 0 ? inst.buyer.partial_expectation_above(d.p_b) / tail_b : d.p_b;
    const Money cond_s = tail_s > 0 ? inst.seller.partial_expectation_below(d.p_s) / tail_s : d.p_s;
    d.matched_tail_bound = n * d.q_b.value * cond_b - m * d.q_s.value * cond_s;
    d.balanced_tail_bound = n * inst.buyer.partial_expectation_above(pbar) - m * inst.seller.partial_expectation_below(pbar);
    return d;
}

/// Monte Carlo estimates of OPT and GFT(p̄) together with the quantities the
/// large-market analysis is phrased in.
inline DaDiagnostics estimate(const DoubleAuctionInstance& inst, std::int64_t replicates, std::uint64_t seed,
                              unsigned workers = default_workers()) {
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    const auto bp = da_balanced_price(inst);
    return diagnose(inst, bp, simulate(inst, bp.price, replicates, seed, workers), seed);
}

struct ConcentrationReport {
    double epsilon = 0;
    double expected_trades = 0;
    Estimate event_frequency; // B >= (1-ε) n q̄ᴮ and S >= (1-ε) m q̄ˢ
    double event_floor = 0;   // 1 - 2 exp(-#T ε² / 2)
    Estimate ratio;           // mean GFT(p̄) / mean OPT
    double ratio_floor = 0;   // (1-ε) · event_floor
    Estimate realized_frequency; // realized GFT >= (1-ε) · mean OPT
    std::vector<std::string> violations;
};

inline double chernoff_floor(double expected_trades, double epsilon) {
    return 1 - 2 * std::exp(-expected_trades * epsilon * epsilon / 2);
}

inline ConcentrationReport concentration(const DoubleAuctionInstance& inst, const BalancedPrice& bp, double epsilon,
                                         const std::vector<ReplicateRecord>& records) {
    if (!(epsilon >= 0 && epsilon <= 1)) throw DomainError("epsilon must lie in [0, 1]");
    ConcentrationReport rep;
    rep.epsilon = epsilon;
    rep.expected_trades = bp.expected_trades;
    const double need_b = (1 - epsilon) * inst.n * bp.qbar_b;
    const double need_s = (1 - epsilon) * inst.m * bp.qbar_s;
    std::int64_t hits = 0;
    for (const auto& r : records) hits += (r.feasible_buyers >= need_b && r.feasible_sellers >= need_s) ? 1 : 0;
    const auto total = static_cast<std::int64_t>(records.size());
    rep.event_frequency = detail::frequency(hits, total);
    rep.event_floor = chernoff_floor(bp.expected_trades, epsilon);
    rep.ratio = detail::ratio_of(records, [](const ReplicateRecord& r) { return r.mech_gft; },
                                 [](const ReplicateRecord& r) { return r.opt_gft; });
    rep.ratio_floor = (1 - epsilon) * rep.event_floor;
    const Money mean_opt = detail::mean_of(records, [](const ReplicateRecord& r) { return r.opt_gft; }).value;
    std::int64_t realized = 0;
    for (const auto& r : records) realized += r.mech_gft >= (1 - epsilon) * mean_opt ? 1 : 0;
    rep.realized_frequency = detail::frequency(realized, total);

    if (rep.event_frequency.value + rep.event_frequency.halfwidth() < rep.event_floor)
        rep.violations.emplace_back("event_frequency below event_floor");
    if (rep.ratio.value + rep.ratio.halfwidth() < rep.ratio_floor)
        rep.violations.emplace_back("ratio below ratio_floor");
    return rep;
}

inline ConcentrationReport concentration_experiment(const DoubleAuctionInstance& inst, double epsilon,
                                                    std::int64_t replicates, std::uint64_t seed,
                                                    unsigned workers = default_workers()) {
    if (!(epsilon >= 0 && epsilon <= 1)) throw DomainError("epsilon must lie in [0, 1]");
    const auto bp = da_balanced_price(inst);
    return concentration(inst, bp, epsilon, simulate(inst, bp.price, replicates, seed, workers));
}

} // namespace fixprice
