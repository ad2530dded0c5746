#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fixprice/bilateral.hpp"
#include "fixprice/double_auction.hpp"
#include "fixprice/instances.hpp"
#include "fixprice/oracle.hpp"

namespace fixprice::verify {

struct Check {
    std::string name;
    std::int64_t cases = 0;
    std::int64_t failures = 0;
    std::string first_failure;

    bool passed() const { return failures == 0; }

    void expect(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (failures++ == 0) first_failure = what;
    }
};

inline bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

inline std::string label(std::uint64_t seed) { return "seed " + std::to_string(seed); }

inline std::vector<Check> bilateral_suite(std::uint64_t seed, int instances = 200) {
    Check decomposition{"decomposition_identity"};
    Check eq1{"q_opt_le_gft"};
    Check dominated{"gft_le_opt"};
    Check eq2{"balanced_2_over_r"};
    Check log_rule{"log_rule_guarantee"};
    Check ordering{"thresholds_y_ge_x"};
    Check median{"median_half_opt"};
    Check exact{"discrete_matches_enumeration"};

    const InstanceKind kinds[] = {InstanceKind::Discrete, InstanceKind::Piecewise, InstanceKind::Mixed};
    for (int k = 0; k < instances; ++k) {
        const std::uint64_t s = seed + k;
        const auto kind = kinds[k % 3];
        const auto inst = random_instance(kind, 1 + k % 6, s);
        const Money opt = opt_gft(inst);
        RngStream stream(s ^ 0xabcdefULL);
        const Money lo = std::min(inst.buyer().support_min(), inst.seller().support_min());
        const Money hi = std::max(inst.buyer().support_max(), inst.seller().support_max());
        for (int t = 0; t < 5; ++t) {
            const Money p = lo + (hi - lo) * stream.uniform();
            const auto d = gft_decomposition(inst, p);
            decomposition.expect(close(d.total(), opt, 1e-9), label(s));
            eq1.expect(balance_q(inst, p) * opt <= d.gft() + 1e-9, label(s));
            dominated.expect(d.gft() <= opt + 1e-9, label(s));
        }
        if (kind == InstanceKind::Discrete) {
            const auto brute = oracle::enumerate_pairs(inst);
            exact.expect(std::abs(brute.opt - opt) <= 1e-12 && std::abs(brute.r - inst.trade_probability()) <= 1e-12,
                         label(s));
        }
        if (inst.atomless()) {
            const Probability r = inst.trade_probability();
            eq2.expect(gft_at(inst, balanced_price(inst).price) >= r / 2 * opt - 1e-9, label(s));
            if (r > 0) {
                const auto [x, y] = case_thresholds(inst);
                ordering.expect(y >= x - 1e-12, label(s));
                const auto cert = log_rule_price(inst);
                log_rule.expect(opt <= cert.guaranteed_ratio * gft_at(inst, cert.price) + 1e-9, label(s));
            }
        }
        if (inst.seller().quantile(0.5) <= inst.buyer().survival_inverse(0.5))
            median.expect(gft_at(inst, median_price(inst).price) >= opt / 2 - 1e-9, label(s));
    }
    return {decomposition, eq1, dominated, eq2, log_rule, ordering, median, exact};
}

inline std::vector<Check> double_auction_suite(std::uint64_t seed, int runs = 2000) {
    Check feasibility{"allocation_feasible"};
    Check ir{"ex_post_ir"};
    Check sbb{"zero_net_transfer"};
    Check count{"trade_count_min_b_s"};
    Check sequential{"sequential_trade_count"};
    Check optimum{"optimum_matches_exhaustive"};
    Check dsic{"dsic_grid"};

    RngStream stream(seed);
    for (int k = 0; k < runs; ++k) {
        const int n = 1 + static_cast<int>(stream.index_below(6));
        const int m = 1 + static_cast<int>(stream.index_below(6));
        Profile profile;
        for (int i = 0; i < n; ++i) profile.buyer_values.push_back(stream.uniform());
        for (int j = 0; j < m; ++j) profile.seller_values.push_back(stream.uniform());
        const Money p = stream.uniform();
        const auto out = run_mechanism(profile, p, stream);
        const auto sets = feasible_pairs(profile, p);
        const std::string at = label(seed) + ", run " + std::to_string(k);

        int held = 0;
        for (const bool x : out.X) held += x;
        for (const bool y : out.Y) held += y;
        feasibility.expect(held == m, at);
        bool rational = true;
        for (const auto [i, j] : out.pairs)
            rational = rational && profile.buyer_values[i] >= p && profile.seller_values[j] <= p;
        ir.expect(rational, at);
        double paid = 0;
        for (const Money x : out.buyer_payments) paid += x;
        for (const Money x : out.seller_receipts) paid -= x;
        sbb.expect(std::abs(paid) <= 1e-12 * std::max(1.0, p * n), at);
        const auto expected = std::min(sets.buyers.size(), sets.sellers.size());
        count.expect(out.pairs.size() == expected, at);
        sequential.expect(run_sequential_posted(profile, p, stream).pairs.size() == expected, at);
        if (n <= 3 && m <= 3) {
            optimum.expect(std::abs(optimal_allocation(profile).gft - oracle::exhaustive_optimum(profile)) <= 1e-12, at);
        }
    }

    const std::vector<Money> grid{0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0};
    for (int n = 1; n <= 2; ++n)
        for (int m = 1; m <= 2; ++m)
            for (int k = 0; k < 50; ++k) {
                Profile profile;
                for (int i = 0; i < n; ++i) profile.buyer_values.push_back(grid[stream.index_below(grid.size())]);
                for (int j = 0; j < m; ++j) profile.seller_values.push_back(grid[stream.index_below(grid.size())]);
                for (const Money p : {0.3, 0.5, 0.7})
                    dsic.expect(oracle::dsic_violations(profile, p, grid) == 0, label(seed));
            }
    return {feasibility, ir, sbb, count, sequential, optimum, dsic};
}

inline std::vector<Check> instances_suite(std::uint64_t seed) {
    Check masses{"masses_sum_to_one"};
    Check dominance{"mass_dominates_upper_tail"};
    Check ratio{"ratio_ge_quarter_n"};
    Check r_floor{"r_ge_floor"};
    Check valid{"random_instances_valid"};

    for (int N = 1; N <= 10; ++N)
        for (const double eps : {5.0 / 36.0, 0.5, 0.99}) {
            const LowerBoundSpec spec{N, eps};
            const auto inst = lower_bound_instance(spec);
            const std::string at = "N=" + std::to_string(N) + ", eps=" + std::to_string(eps);
            for (const auto* d : {&inst.buyer(), &inst.seller()}) {
                double total = 0;
                for (const double x : d->masses()) total += x;
                masses.expect(std::abs(total - 1) <= 1e-12, at);
            }
            const auto fm = inst.buyer().masses();
            const auto gm = inst.seller().masses();
            for (std::size_t i = 0; i < fm.size(); ++i) {
                double tail = 0;
                for (std::size_t j = i + 1; j < fm.size(); ++j) tail += fm[j];
                dominance.expect(fm[i] > tail, at);
                double lower = 0;
                for (std::size_t j = 0; j < i; ++j) lower += gm[j];
                dominance.expect(gm[i] > lower, at);
            }
            const auto rep = lower_bound_report(spec);
            ratio.expect(rep.ratio_holds, at);
            r_floor.expect(rep.r_holds, at);
        }
    const InstanceKind kinds[] = {InstanceKind::Discrete, InstanceKind::Piecewise, InstanceKind::Mixed};
    for (int k = 0; k < 300; ++k) {
        const auto inst = random_instance(kinds[k % 3], 1 + k % 8, seed + k);
        const Probability r = inst.trade_probability();
        valid.expect(r >= 0 && r <= 1, label(seed + k));
    }
    return {masses, dominance, ratio, r_floor, valid};
}

} // namespace fixprice::verify
