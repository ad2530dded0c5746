#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fixprice/bilateral.hpp"
#include "fixprice/double_auction.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/instances.hpp"
#include "fixprice/io.hpp"
#include "fixprice/report.hpp"
#include "fixprice/verify.hpp"

namespace fixprice::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kInputError = 2, kPreconditionError = 3 };

struct RunConfig {
    std::string instance_path;
    std::string rule = "balanced";
    std::optional<Money> price;
    std::optional<Money> smoothing_width;
    std::int64_t replicates = 10000;
    std::uint64_t seed = 1;
    double epsilon = 0.61;
    int N = 2;
    double lb_epsilon = 5.0 / 36.0;
    std::string suite = "all";
    unsigned workers = 0;
    std::string format = "csv";
    std::string out_path;
};

namespace detail {

inline PricingRule parse_rule(const std::string& name) {
    static const std::map<std::string, PricingRule> rules{{"balanced", PricingRule::Balanced},
                                                          {"median", PricingRule::Median},
                                                          {"logrule", PricingRule::LogRule},
                                                          {"best", PricingRule::BestSearch}};
    return rules.at(name);
}

inline BilateralInstance load_bilateral(const RunConfig& cfg) {
    auto inst = io::load_bilateral(cfg.instance_path);
    if (!cfg.smoothing_width) return inst;
    if (!(*cfg.smoothing_width > 0)) throw DomainError("smoothing width must be positive");
    const auto smooth = [&](const Distribution& d) { return d.atomless() ? d : d.smooth(*cfg.smoothing_width); };
    return {smooth(inst.buyer()), smooth(inst.seller())};
}

inline void add_certificate(report::Report& rep, const PriceCertificate& cert) {
    rep.add("rule", std::string(to_string(cert.rule)));
    rep.add("price", cert.price);
    rep.add("q", cert.q);
    rep.add("guaranteed_ratio", cert.guaranteed_ratio);
    rep.add("r", cert.r);
    rep.add("no_beneficial_trade", cert.no_beneficial_trade ? 1.0 : 0.0);
    if (cert.case_label) {
        rep.add("case_label", std::string(to_string(*cert.case_label)));
        rep.add("thresholds_x", *cert.thresholds_x);
        rep.add("thresholds_y", *cert.thresholds_y);
        rep.add("tail_surplus", cert.tail_surplus);
        rep.add("band_count", cert.band_count);
        report::Table t{"candidates", {"band", "price", "gft"}, {}};
        for (const auto& c : cert.candidates) t.rows.push_back({double(c.band), c.price, c.gft});
        rep.tables.push_back(std::move(t));
    }
}

inline report::Report cmd_price(const RunConfig& cfg) {
    const auto inst = load_bilateral(cfg);
    report::Report rep{"price"};
    add_certificate(rep, price_by_rule(inst, parse_rule(cfg.rule)));
    return rep;
}

inline report::Report cmd_evaluate(const RunConfig& cfg) {
    const auto inst = load_bilateral(cfg);
    report::Report rep{"evaluate"};
    Money p = 0;
    if (cfg.price) {
        p = *cfg.price;
    } else {
        const auto cert = price_by_rule(inst, parse_rule(cfg.rule));
        p = cert.price;
        rep.add("rule", std::string(to_string(cert.rule)));
    }
    const auto d = gft_decomposition(inst, p);
    const Money opt = opt_gft(inst);
    rep.add("price", p);
    rep.add("opt", opt);
    rep.add("gft", d.gft());
    rep.add("mgftl", d.mgftl);
    rep.add("gftl", d.gftl);
    rep.add("gftr", d.gftr);
    rep.add("mgftr", d.mgftr);
    rep.add("r", inst.trade_probability());
    rep.add("q", balance_q(inst, p));
    rep.add("ratio", d.gft() > 0 ? opt / d.gft() : (opt > 0 ? kInfinity : 1.0));
    return rep;
}

inline report::Report cmd_simulate(const RunConfig& cfg) {
    const auto inst = io::load_double_auction(cfg.instance_path);
    if (cfg.replicates < 1) throw DomainError("replicates must be >= 1");
    if (!(cfg.epsilon >= 0 && cfg.epsilon <= 1)) throw DomainError("epsilon must lie in [0, 1]");
    const auto bp = da_balanced_price(inst);
    const auto records = simulate(inst, bp.price, cfg.replicates, cfg.seed, cfg.workers ? cfg.workers : default_workers());
    const auto d = diagnose(inst, bp, records, cfg.seed);
    const auto c = concentration(inst, bp, cfg.epsilon, records);
    const auto R = cfg.replicates;
    const auto S = cfg.seed;

    report::Report rep{"simulate"};
    rep.has_violation_field = true;
    rep.add("n", inst.n).add("m", inst.m);
    rep.add("price", bp.price).add("expected_trades", bp.expected_trades);
    rep.add("qbar_b", bp.qbar_b).add("qbar_s", bp.qbar_s);
    rep.add("no_beneficial_trade", bp.no_beneficial_trade ? 1.0 : 0.0);
    rep.add("opt_estimate", d.opt.value, d.opt.halfwidth(), R, S);
    rep.add("gft_estimate", d.gft.value, d.gft.halfwidth(), R, S);
    rep.add("ratio_estimate", d.ratio.value, d.ratio.halfwidth(), R, S);
    rep.add("q_b", d.q_b.value, d.q_b.halfwidth(), R, S);
    rep.add("q_s", d.q_s.value, d.q_s.halfwidth(), R, S);
    rep.add("balance_gap", d.balance_gap.value, d.balance_gap.halfwidth(), R, S);
    rep.add("p_b", d.p_b).add("p_b_lo", d.p_b_interval.first).add("p_b_hi", d.p_b_interval.second);
    rep.add("p_s", d.p_s).add("p_s_lo", d.p_s_interval.first).add("p_s_hi", d.p_s_interval.second);
    rep.add("prices_bracket", d.prices_bracket ? 1.0 : 0.0);
    rep.add("matched_tail_bound", d.matched_tail_bound).add("balanced_tail_bound", d.balanced_tail_bound);
    rep.add("epsilon", c.epsilon);
    rep.add("event_frequency", c.event_frequency.value, c.event_frequency.halfwidth(), R, S);
    rep.add("event_floor", c.event_floor);
    rep.add("ratio_floor", c.ratio_floor);
    rep.add("realized_frequency", c.realized_frequency.value, c.realized_frequency.halfwidth(), R, S);
    rep.violations = c.violations;
    if (!d.prices_bracket) rep.violations.emplace_back("p_b and p_s do not bracket the balanced price");
    if (d.opt.value - d.opt.halfwidth() > d.matched_tail_bound) rep.violations.emplace_back("opt_estimate above matched_tail_bound");
    if (d.matched_tail_bound > d.balanced_tail_bound + d.opt.halfwidth())
        rep.violations.emplace_back("matched_tail_bound above balanced_tail_bound");
    return rep;
}

inline report::Report cmd_lowerbound(const RunConfig& cfg) {
    const auto lb = lower_bound_report({cfg.N, cfg.lb_epsilon});
    report::Report rep{"lowerbound"};
    rep.add("N", lb.spec.N).add("epsilon", lb.spec.epsilon).add("alpha", lb.alpha);
    rep.add("r", lb.r).add("opt", lb.opt).add("best_price", lb.best_price).add("best_gft", lb.best_gft);
    rep.add("ratio", lb.ratio).add("quarter_n", lb.quarter_n).add("r_floor", lb.r_floor);
    rep.add("ratio_holds", lb.ratio_holds ? 1.0 : 0.0).add("r_holds", lb.r_holds ? 1.0 : 0.0);
    report::Table t{"gft_table", {"p", "gft"}, {}};
    for (const auto& [p, g] : lb.table) t.rows.push_back({p, g});
    rep.tables.push_back(std::move(t));
    return rep;
}

inline report::Report cmd_verify(const RunConfig& cfg, bool& all_passed) {
    std::vector<verify::Check> checks;
    const auto append = [&](std::vector<verify::Check> more) {
        for (auto& c : more) checks.push_back(std::move(c));
    };
    if (cfg.suite == "bilateral" || cfg.suite == "all") append(verify::bilateral_suite(cfg.seed));
    if (cfg.suite == "da" || cfg.suite == "all") append(verify::double_auction_suite(cfg.seed));
    if (cfg.suite == "instances" || cfg.suite == "all") append(verify::instances_suite(cfg.seed));

    report::Report rep{"verify"};
    rep.has_violation_field = true;
    rep.add("suite", cfg.suite);
    rep.add("seed", static_cast<double>(cfg.seed));
    all_passed = true;
    for (const auto& c : checks) {
        rep.add(c.name, std::string(c.passed() ? "pass" : "fail"));
        rep.add(c.name + ".cases", static_cast<double>(c.cases));
        rep.add(c.name + ".failures", static_cast<double>(c.failures));
        if (!c.passed()) {
            all_passed = false;
            rep.violations.push_back(c.name + ": " + c.first_failure);
        }
    }
    return rep;
}

} // namespace detail

/// Parses `argv`, runs one subcommand and writes its report to `out` (or
/// --out). Diagnostics go to `err`. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fixed-price mechanisms for bilateral trade and double auctions", "fixprice"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", cfg.out_path, "Output file (default: standard output)");

    const auto instance = [&](CLI::App* sub) {
        sub->add_option("--instance", cfg.instance_path, "Instance file (JSON)")->required();
    };
    const auto rules = CLI::IsMember({"balanced", "median", "logrule", "best"});

    auto* price = app.add_subcommand("price", "Compute a fixed price with its approximation certificate");
    instance(price);
    price->add_option("--rule", cfg.rule, "Pricing rule")->required()->check(rules);
    price->add_option("--smoothing-width", cfg.smoothing_width, "Spread point masses over cells of this width");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate OPT and GFT at a price");
    instance(evaluate);
    auto* p_opt = evaluate->add_option("--price", cfg.price, "Fixed price");
    auto* r_opt = evaluate->add_option("--rule", cfg.rule, "Pricing rule used to pick the price")->check(rules);
    p_opt->excludes(r_opt);
    evaluate->add_option("--smoothing-width", cfg.smoothing_width, "Spread point masses over cells of this width");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the balanced double auction");
    instance(sim);
    sim->add_option("--replicates", cfg.replicates, "Number of replicates");
    sim->add_option("--seed", cfg.seed, "Master seed");
    sim->add_option("--epsilon", cfg.epsilon, "Concentration parameter in [0, 1]");
    sim->add_option("--workers", cfg.workers, "Worker threads (0 = hardware concurrency)");

    auto* lb = app.add_subcommand("lowerbound", "Report on the discrete lower-bound family");
    lb->add_option("--n", cfg.N, "Support size N")->required();
    lb->add_option("--eps", cfg.lb_epsilon, "Offset epsilon in [5/36, 1)");

    auto* ver = app.add_subcommand("verify", "Run invariant checks on seeded random corpora");
    ver->add_option("--suite", cfg.suite, "Suite")->check(CLI::IsMember({"bilateral", "da", "instances", "all"}));
    ver->add_option("--seed", cfg.seed, "Master seed");

    for (auto* sub : {price, evaluate, sim, lb, ver}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream help;
        const int code = app.exit(e, help, err);
        out << help.str();
        return code == 0 ? kOk : kInputError;
    }

    try {
        report::Report rep;
        bool passed = true;
        if (price->parsed()) rep = detail::cmd_price(cfg);
        else if (evaluate->parsed()) rep = detail::cmd_evaluate(cfg);
        else if (sim->parsed()) rep = detail::cmd_simulate(cfg);
        else if (lb->parsed()) rep = detail::cmd_lowerbound(cfg);
        else rep = detail::cmd_verify(cfg, passed);

        std::ofstream file;
        std::ostream* sink = &out;
        if (!cfg.out_path.empty()) {
            file.open(cfg.out_path, std::ios::binary);
            if (!file) throw InputError(cfg.out_path + ": cannot open for writing");
            sink = &file;
        }
        if (cfg.format == "json") report::write_json(rep, *sink);
        else report::write_csv(rep, *sink);
        return passed ? kOk : kCheckFailed;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << '\n';
        return kPreconditionError;
    } catch (const DomainError& e) {
        err << "precondition failed: " << e.what() << '\n';
        return kPreconditionError;
    }
}

} // namespace fixprice::cli
