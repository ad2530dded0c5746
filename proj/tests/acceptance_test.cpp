// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fixprice/bilateral.hpp"
#include "fixprice/double_auction.hpp"
#include "fixprice/instances.hpp"
#include "fixprice/oracle.hpp"
#include "support/oracles.hpp"

using namespace fixprice;

namespace {

constexpr double kBoundSlack = 1e-9;  // absolute slack on every exact inequality
constexpr double kExactTol = 1e-12;   // exact-value agreement
constexpr double kChainTol = 1e-9;    // log-rule chain on the unit square
constexpr double kSigmas = 3.0;       // Monte Carlo tolerance in standard errors
constexpr double kLargeMarketRatio = 0.95;
constexpr double kEps = 5.0 / 36.0;

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Verdict fixed_price_bound() {
    const auto t0 = Clock::now();
    const InstanceKind kinds[] = {InstanceKind::Discrete, InstanceKind::Piecewise, InstanceKind::Mixed};
    int checked = 0;
    double worst = -kInfinity;
    for (int k = 0; k < 500; ++k) {
        const auto inst = random_instance(kinds[k % 3], 1 + k % 6, 1'000'000 + k);
        const double opt = opt_gft(inst);
        RngStream s(2'000'000 + k);
        const Money lo = std::min(inst.buyer().support_min(), inst.seller().support_min());
        const Money hi = std::max(inst.buyer().support_max(), inst.seller().support_max());
        for (int t = 0; t < 10; ++t) {
            const double p = lo + (hi - lo) * s.uniform();
            worst = std::max(worst, balance_q(inst, p) * opt - gft_at(inst, p));
            ++checked;
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= kBoundSlack && checked == 5000 && secs <= 10,
            fmt("5000 cases, max(q*OPT - GFT) = %.3g, %.2f s", worst, secs)};
}

Verdict balanced_two_over_r() {
    const auto t0 = Clock::now();
    double worst = -kInfinity;
    for (int k = 0; k < 200; ++k) {
        const auto inst = random_instance(InstanceKind::Piecewise, 1 + k % 6, 3'000'000 + k);
        const auto c = balanced_price(inst);
        worst = std::max(worst, inst.trade_probability() / 2 * opt_gft(inst) - gft_at(inst, c.price));
    }
    const double secs = seconds_since(t0);
    return {worst <= kBoundSlack && secs <= 10, fmt("200 atomless, max((r/2)*OPT - GFT) = %.3g, %.2f s", worst, secs)};
}

Verdict median_half() {
    const InstanceKind kinds[] = {InstanceKind::Discrete, InstanceKind::Piecewise, InstanceKind::Mixed};
    int used = 0;
    double worst = -kInfinity;
    for (int k = 0; used < 200 && k < 100'000; ++k) {
        const auto inst = random_instance(kinds[k % 3], 1 + k % 6, 4'000'000 + k);
        if (inst.seller().quantile(0.5) > inst.buyer().survival_inverse(0.5)) continue;
        ++used;
        worst = std::max(worst, opt_gft(inst) / 2 - gft_at(inst, median_price(inst).price));
    }
    return {used == 200 && worst <= kBoundSlack, fmt("%.0f qualifying, max(OPT/2 - GFT) = %.3g", used, worst)};
}

Verdict log_rule() {
    double worst = -kInfinity;
    int done = 0;
    for (int k = 0; done < 100; ++k) {
        const auto inst = random_instance(InstanceKind::Piecewise, 1 + k % 6, 5'000'000 + k);
        if (inst.trade_probability() == 0) continue;
        ++done;
        const auto c = log_rule_price(inst);
        const int bands = static_cast<int>(std::ceil(std::log2(2 / inst.trade_probability()) - 1e-12));
        if (c.guaranteed_ratio != 4.0 * std::max(1, bands)) worst = kInfinity;
        worst = std::max(worst, opt_gft(inst) - c.guaranteed_ratio * gft_at(inst, c.price));
    }
    // Unit square chain, against closed forms: x = 1/4, y = 3/4, band prices
    // solve 1 - p = 2p and 2(1 - p) = 4(p - 1/2), GFT(1/3) = 1/9.
    const Distribution u = Distribution::uniform(0, 1);
    const BilateralInstance sq{u, u};
    const auto c = log_rule_price(sq);
    bool chain = c.candidates.size() == 2 && std::abs(*c.thresholds_x - 0.25) <= kChainTol &&
                 std::abs(*c.thresholds_y - 0.75) <= kChainTol &&
                 std::abs(c.candidates[0].price - 1.0 / 3.0) <= kChainTol &&
                 std::abs(c.candidates[1].price - 2.0 / 3.0) <= kChainTol &&
                 std::abs(gft_at(sq, c.price) - 1.0 / 9.0) <= kChainTol &&
                 std::abs(oracle_ref::gft(u, u, c.price) - 1.0 / 9.0) <= kChainTol &&
                 std::abs(c.tail_surplus - oracle_ref::surplus(u, u, {}, {.lo = 0.75, .lo_open = true})) <= kChainTol;
    return {worst <= kBoundSlack && chain,
            fmt("100 atomless, max(OPT - 4k*GFT(p*)) = %.3g; unit-square chain ", worst) +
                (chain ? "reproduced" : "MISMATCH")};
}

Verdict lower_bound_family() {
    bool ok = true;
    double min_margin = kInfinity;
    for (int N = 1; N <= 10; ++N)
        for (const double eps : {kEps, 0.5}) {
            const auto rep = lower_bound_report({N, eps});
            ok = ok && rep.ratio >= N / 4.0 && rep.r >= std::pow(10.0, -N + eps);
            min_margin = std::min(min_margin, rep.ratio - N / 4.0);
        }
    const auto rep = lower_bound_report({2, kEps});
    const auto inst = lower_bound_instance({2, kEps});
    const auto e = oracle_ref::enumerate(inst.buyer(), inst.seller());
    double best_enum = 0;
    for (const double p : {1.0, 1 + kEps, 2.0, 2 + kEps})
        best_enum = std::max(best_enum, oracle_ref::enumerate_gft(inst.buyer(), inst.seller(), p));
    const bool exact = std::abs(rep.opt - (1 + 21 * kEps) / 121) <= kExactTol && std::abs(rep.opt - e.opt) <= kExactTol &&
                       std::abs(rep.best_gft - (1 + 11 * kEps) / 121) <= kExactTol &&
                       std::abs(rep.best_gft - best_enum) <= kExactTol && std::abs(rep.r - 21.0 / 121) <= kExactTol &&
                       std::abs(rep.r - e.r) <= kExactTol;
    return {ok && exact, fmt("20 (N, eps) cells, min(ratio - N/4) = %.3g; N=2 exact values ", min_margin) +
                             (exact ? "match" : "MISMATCH")};
}

Verdict structural() {
    RngStream s(6'000'000);
    int failures = 0;
    for (int k = 0; k < 10'000; ++k) {
        const int n = 1 + static_cast<int>(s.index_below(10));
        const int m = 1 + static_cast<int>(s.index_below(10));
        Profile profile;
        for (int i = 0; i < n; ++i) profile.buyer_values.push_back(s.uniform());
        for (int j = 0; j < m; ++j) profile.seller_values.push_back(s.uniform());
        const double p = s.uniform();
        const auto out = run_mechanism(profile, p, s);
        const auto sets = feasible_pairs(profile, p);
        int held = 0;
        for (const bool x : out.X) held += x;
        for (const bool y : out.Y) held += y;
        double net = 0;
        for (const double x : out.buyer_payments) net += x;
        for (const double x : out.seller_receipts) net -= x;
        bool ir = true;
        for (const auto [i, j] : out.pairs) ir = ir && profile.buyer_values[i] >= p && profile.seller_values[j] <= p;
        const bool ok = held == m && ir && std::abs(net) <= kExactTol &&
                        out.pairs.size() == std::min(sets.buyers.size(), sets.sellers.size());
        failures += !ok;
    }
    const std::vector<Money> grid{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    int profiles = 0;
    int dsic = 0;
    for (int n = 1; n <= 2; ++n)
        for (int m = 1; m <= 2; ++m) {
            std::vector<std::size_t> idx(n + m, 0);
            while (true) {
                Profile profile;
                for (int i = 0; i < n; ++i) profile.buyer_values.push_back(grid[idx[i]]);
                for (int j = 0; j < m; ++j) profile.seller_values.push_back(grid[idx[n + j]]);
                for (const double p : {0.2, 0.5, 0.8}) dsic += oracle::dsic_violations(profile, p, grid);
                ++profiles;
                std::size_t pos = 0;
                while (pos < idx.size() && ++idx[pos] == grid.size()) idx[pos++] = 0;
                if (pos == idx.size()) break;
            }
        }
    return {failures == 0 && dsic == 0,
            fmt("10000 runs, %.0f structural failures; %.0f grid profiles, ", failures, profiles) +
                fmt("%.0f profitable deviations", dsic)};
}

struct MarketRun {
    BalancedPrice bp;
    DaDiagnostics diag;
    ConcentrationReport conc;
    double secs = 0;
};

MarketRun desk_scale_run() {
    const auto t0 = Clock::now();
    const DoubleAuctionInstance inst{20, 20, Distribution::uniform(0, 1), Distribution::uniform(0, 1)};
    MarketRun run;
    run.bp = da_balanced_price(inst);
    const auto records = simulate(inst, run.bp.price, 100'000, 20'231'115);
    run.diag = diagnose(inst, run.bp, records, 20'231'115);
    run.conc = concentration(inst, run.bp, 0.61, records);
    run.secs = seconds_since(t0);
    return run;
}

Verdict concentration_check(const MarketRun& run) {
    const auto& c = run.conc;
    const bool trades = std::abs(run.bp.expected_trades - 10.0) <= kBoundSlack;
    const bool event = c.event_frequency.value >= c.event_floor - kSigmas * c.event_frequency.se;
    const bool ratio = c.ratio.value >= c.ratio_floor - kSigmas * c.ratio.se;
    const bool floor_ok = std::abs(c.event_floor - (1 - 2 * std::exp(-10 * 0.61 * 0.61 / 2))) <= kExactTol &&
                          c.ratio_floor > 0.25;
    return {trades && event && ratio && floor_ok && run.secs <= 60,
            fmt("#T = %.6g; Pr[E] = %.4f vs floor %.4f; ", run.bp.expected_trades, c.event_frequency.value,
                c.event_floor) +
                fmt("ratio %.4f vs floor %.4f; ", c.ratio.value, c.ratio_floor) + fmt("%.1f s", run.secs)};
}

Verdict market_diagnostics(const MarketRun& run) {
    const auto& d = run.diag;
    const bool balance = std::abs(d.balance_gap.value) <= kSigmas * d.balance_gap.se + kExactTol;
    const bool bracket = d.prices_bracket;
    const bool opt_below_matched = d.opt.value <= d.matched_tail_bound + kSigmas * d.opt.se;
    const bool matched_below_balanced = d.matched_tail_bound <= d.balanced_tail_bound + kSigmas * d.opt.se;
    return {balance && bracket && opt_below_matched && matched_below_balanced,
            fmt("n*qB - m*qS = %.3g; pB = %.4f, pS = %.4f; ", d.balance_gap.value, d.p_b, d.p_s) +
                fmt("OPT %.4f <= %.4f <= %.4f", d.opt.value, d.matched_tail_bound, d.balanced_tail_bound)};
}

Verdict large_market() {
    const int sizes[] = {5, 20, 80, 320};
    std::vector<Estimate> ratios;
    std::string detail;
    for (const int n : sizes) {
        const DoubleAuctionInstance inst{n, n, Distribution::uniform(0, 1), Distribution::uniform(0, 1)};
        const auto bp = da_balanced_price(inst);
        const auto records = simulate(inst, bp.price, 20'000, 9'000 + n);
        ratios.push_back(diagnose(inst, bp, records, 9'000 + n).ratio);
        detail += fmt("n=m=%.0f: %.4f  ", n, ratios.back().value);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        const double pooled = std::hypot(ratios[i].se, ratios[i - 1].se);
        monotone = monotone && ratios[i].value >= ratios[i - 1].value - kSigmas * pooled;
    }
    return {monotone && ratios.back().value > kLargeMarketRatio, detail};
}

Verdict oracle_equivalence() {
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto inst = random_instance(InstanceKind::Discrete, 1 + k % 6, 7'000'000 + k);
        const auto e = oracle_ref::enumerate(inst.buyer(), inst.seller());
        worst = std::max({worst, std::abs(opt_gft(inst) - e.opt), std::abs(inst.trade_probability() - e.r)});
        for (const auto* side : {&inst.buyer(), &inst.seller()})
            for (const double p : side->values())
                worst = std::max(worst,
                                 std::abs(gft_at(inst, p) - oracle_ref::enumerate_gft(inst.buyer(), inst.seller(), p)));
    }
    double worst_alloc = 0;
    RngStream s(8'000'000);
    for (int k = 0; k < 1000; ++k) {
        Profile profile;
        const int n = 1 + k % 3;
        const int m = 1 + (k / 3) % 3;
        for (int i = 0; i < n; ++i) profile.buyer_values.push_back(s.uniform());
        for (int j = 0; j < m; ++j) profile.seller_values.push_back(s.uniform());
        worst_alloc = std::max(worst_alloc, std::abs(optimal_allocation(profile).gft - oracle::exhaustive_optimum(profile)));
    }
    return {worst <= kExactTol && worst_alloc <= kExactTol,
            fmt("bilateral max diff %.3g; allocation max diff %.3g", worst, worst_alloc)};
}

} // namespace

int main() {
    const auto market = desk_scale_run();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"AC1  fixed price keeps q*OPT", fixed_price_bound},
        {"AC2  balanced price within 2/r", balanced_two_over_r},
        {"AC3  median price keeps OPT/2", median_half},
        {"AC4  log rule within 4*ceil(log2(2/r))", log_rule},
        {"AC5  discrete lower-bound family", lower_bound_family},
        {"AC6  IR / SBB / DSIC structure", structural},
        {"AC7  concentration at 20x20", [&] { return concentration_check(market); }},
        {"AC8  large-market diagnostics", [&] { return market_diagnostics(market); }},
        {"AC9  ratio grows with market size", large_market},
        {"AC10 exact evaluators match brute force", oracle_equivalence},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %-42s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
