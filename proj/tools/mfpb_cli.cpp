// mfpb: model-free price bounds from the command line.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mfpb/accp.hpp"
#include "mfpb/arbitrage.hpp"
#include "mfpb/ecp.hpp"
#include "mfpb/error.hpp"
#include "mfpb/json_io.hpp"
#include "mfpb/market_gen.hpp"
#include "mfpb/payoff_spec.hpp"

namespace {

using namespace mfpb;
using io::json;

enum ExitCode { kOk = 0, kArbitrage = 1, kUsage = 2, kSolver = 3 };

struct Config {
    std::string instance, spec, chain, payoff, algo = "ecp", sweep, out, reference;
    double epsilon = 1e-3, tau = 1.0, delta = 0.7, gamma = 0.1, zeta = 0.8;
    std::optional<double> xbar, strike;
    std::optional<std::uint64_t> seed;
    double eta = 1e-6;
    std::optional<double> filter;
    int workers = 1;
    bool warm_start = true;
};

struct Sweep {
    double start = 0, stop = 0, step = 1;
    std::vector<double> strikes() const {
        std::vector<double> out;
        const long n = std::lround(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
};

Sweep parse_sweep(const std::string& s) {
    Sweep sw;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> sw.start >> c1 >> sw.stop >> c2 >> sw.step) || c1 != ':' || c2 != ':' || !(sw.step > 0) ||
        sw.stop < sw.start)
        throw InvalidArgument("--sweep expects start:stop:step with step > 0");
    return sw;
}

void emit(const Config& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write " + cfg.out);
    f << text;
}

EcpOptions ecp_options(const Config& cfg, const MarketInstance& m) {
    EcpOptions o;
    o.epsilon = cfg.epsilon;
    o.tau = cfg.tau;
    o.delta = cfg.delta;
    if (cfg.xbar && m.domain == DomainKind::Orthant) o.box = std::vector<double>(m.dimension, *cfg.xbar);
    return o;
}

AccpOptions accp_options(const Config& cfg) {
    AccpOptions o;
    o.epsilon = cfg.epsilon;
    o.tau = cfg.tau;
    o.delta = cfg.delta;
    o.gamma = cfg.gamma;
    o.zeta = cfg.zeta;
    return o;
}

int cmd_gen_market(const Config& cfg) {
    auto spec = io::market_spec_from_json(io::read_file(cfg.spec));
    if (cfg.seed) spec.family.seed = *cfg.seed;
    const auto m = gen::build_market(spec.family, spec.instruments);
    emit(cfg, io::to_json(m).dump(2) + "\n");
    std::cerr << "instance: d=" << m.dimension << " m=" << m.instrument_count() << "\n";
    return kOk;
}

// One side of the bracket for one algorithm, carrying the support forward.
struct Side {
    BoundsResult result;
    std::vector<std::vector<double>> support;
};

struct Row {
    double strike = 0;
    std::string algo;
    std::optional<double> lb, ub;
    long lps = 0, milps = 0;
    std::string status;
    bool resource_limit = false;
};

BoundsResult run(const std::string& algo, const Config& cfg, const MarketInstance& m, const CpwaFunction& f,
                 const std::vector<std::vector<double>>& warm) {
    if (algo == "ecp") {
        auto o = ecp_options(cfg, m);
        o.initial_points = warm;
        return solve_ecp(m, f, o);
    }
    auto o = accp_options(cfg);
    o.initial_points = warm;
    return solve_accp(m, f, o).bounds;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
    return buf;
}

int cmd_bounds(const Config& cfg) {
    const auto m = io::instance_from_json(io::read_file(cfg.instance));
    const auto spec = PayoffSpec::parse(cfg.payoff);
    std::vector<std::string> algos;
    if (cfg.algo == "both") {
        if (m.domain != DomainKind::Box) throw InvalidArgument("--algo both needs a box instance");
        algos = {"ecp", "accp"};
    } else if (cfg.algo == "ecp" || cfg.algo == "accp") {
        if (cfg.algo == "accp" && m.domain != DomainKind::Box) throw InvalidArgument("--algo accp needs a box instance");
        algos = {cfg.algo};
    } else {
        throw InvalidArgument("--algo must be ecp, accp or both");
    }

    std::vector<double> strikes;
    if (!cfg.sweep.empty()) {
        if (spec.has_strike()) throw InvalidArgument("--sweep given but the payoff already fixes a strike");
        strikes = parse_sweep(cfg.sweep).strikes();
    } else if (cfg.strike) {
        strikes = {*cfg.strike};
    } else if (!spec.has_strike()) {
        throw InvalidArgument("payoff has no strike; pass --strike or --sweep");
    }
    const bool fixed = strikes.empty();
    if (fixed) strikes = {std::numeric_limits<double>::quiet_NaN()};
    auto target = [&](double k) { return fixed ? spec.build(m.dimension) : spec.build(m.dimension, k); };

    std::optional<io::MarketSpec> reference;
    if (!cfg.reference.empty()) reference = io::market_spec_from_json(io::read_file(cfg.reference));

    const std::size_t ns = strikes.size(), na = algos.size();
    std::vector<Row> rows(ns * na);
    // Contiguous strike blocks per worker so that warm starts follow the sweep.
    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(ns)));
    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t a = 0; a < na; ++a) {
            std::vector<std::vector<double>> warm_up, warm_down;
            for (std::size_t s = lo; s < hi; ++s) {
                Row& r = rows[s * na + a];
                r.strike = strikes[s];
                r.algo = algos[a];
                try {
                    const auto f = target(strikes[s]);
                    const auto up = run(algos[a], cfg, m, f, warm_up);
                    const auto down = run(algos[a], cfg, m, f.negated(), warm_down);
                    r.ub = up.upper;
                    r.lb = -down.upper;
                    r.lps = up.lp_solves + down.lp_solves;
                    r.milps = up.milp_solves + down.milp_solves;
                    r.status = up.status == down.status ? to_string(up.status)
                                                        : std::string(to_string(up.status)) + "/" + to_string(down.status);
                    if (up.default_box || down.default_box) r.status += "+default_box";
                    if (cfg.warm_start) {
                        warm_up = up.support;
                        warm_down = down.support;
                    }
                } catch (const ResourceLimit& e) {
                    r.status = std::string("resource_limit: ") + e.what();
                    r.resource_limit = true;
                } catch (const std::exception& e) {
                    r.status = std::string("error: ") + e.what();
                }
            }
        }
    };
    if (workers == 1) {
        work(0, ns);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work, ns * w / workers, ns * (w + 1) / workers);
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << "strike,lb,ub,reference_bid,reference_ask,algorithm,lp_count,milp_count,status";
    if (na == 2) csv << ",agreement";
    csv << "\n";
    bool limit_hit = false;
    for (std::size_t s = 0; s < ns; ++s) {
        std::string ref_bid, ref_ask;
        if (reference) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            const auto f = target(strikes[s]);
            for (const auto& model : reference->family.models) {
                const double p = gen::price_payoff(model, f, reference->family.mc_samples, reference->family.seed).price;
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
            ref_bid = fmt(lo);
            ref_ask = fmt(hi);
        }
        std::string agreement;
        if (na == 2 && rows[s * 2].ub && rows[s * 2 + 1].ub) agreement = fmt(std::abs(*rows[s * 2].ub - *rows[s * 2 + 1].ub));
        for (std::size_t a = 0; a < na; ++a) {
            const Row& r = rows[s * na + a];
            limit_hit = limit_hit || r.resource_limit;
            std::string status = r.status;
            std::replace(status.begin(), status.end(), ',', ';');
            std::replace(status.begin(), status.end(), '\n', ' ');
            csv << (fixed ? "" : fmt(r.strike)) << ',' << (r.lb ? fmt(*r.lb) : "") << ',' << (r.ub ? fmt(*r.ub) : "")
                << ',' << ref_bid << ',' << ref_ask << ',' << r.algo << ',' << r.lps << ',' << r.milps << ',' << status;
            if (na == 2) csv << ',' << agreement;
            csv << "\n";
        }
    }
    emit(cfg, csv.str());
    return limit_hit ? kSolver : kOk;
}

int cmd_detect(const Config& cfg) {
    const auto m = io::instance_from_json(io::read_file(cfg.instance));
    DetectOptions o;
    o.ecp = ecp_options(cfg, m);
    o.accp = accp_options(cfg);
    const auto r = detect(m, o);
    if (r.arbitrage_free) {
        std::cout << "no arbitrage (lower " << r.bounds.lower << ", upper " << r.bounds.upper << ")\n";
        return kOk;
    }
    json j = {{"arbitrage", true},
              {"strategy", io::to_json(*r.strategy)},
              {"price", r.strategy_price},
              {"instruments", m.names}};
    emit(cfg, j.dump(2) + "\n");
    std::cerr << "arbitrage found: strategy costs " << r.strategy_price << "\n";
    return kArbitrage;
}

int cmd_repair(const Config& cfg) {
    auto chain = io::chain_from_json(io::read_file(cfg.chain));
    if (cfg.xbar) chain.xbar = *cfg.xbar;
    json extra = json::object();
    if (cfg.filter) {
        const auto f = filter_outliers(chain, *cfg.filter);
        extra["dropped_strikes"] = f.dropped;
        extra["forward"] = f.forward;
        chain = f.chain;
    }
    const auto r = repair_chain(chain, cfg.eta);
    json j = io::to_json(r);
    j.update(extra);
    emit(cfg, j.dump(2) + "\n");
    std::cerr << "adjusted " << r.adjusted_quotes << " of " << 4 * chain.size() << " quotes, max change "
              << r.max_change << ", total " << r.total << ", min mass " << r.min_mass << "\n";
    return kOk;
}

int cmd_measure(const Config& cfg) {
    const auto m = io::instance_from_json(io::read_file(cfg.instance));
    const auto spec = PayoffSpec::parse(cfg.payoff);
    const auto f = spec.has_strike() ? spec.build(m.dimension) : spec.build(m.dimension, cfg.strike);
    DiscreteMeasure mu;
    double lower = 0.0;
    if (cfg.algo == "accp") {
        const auto r = solve_accp(m, f, accp_options(cfg));
        if (!r.certificate) throw NumericalError("measure: the run produced no lower-bound certificate");
        mu = extract_measure(m, f, r.certificate->support);
        lower = r.bounds.lower;
    } else {
        const auto r = solve_ecp(m, f, ecp_options(cfg, m));
        mu = extract_measure(m, f, r.support);
        lower = r.lower;
    }
    json j = io::to_json(mu);
    j["lower_bound"] = lower;
    emit(cfg, j.dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-free price bounds for CPWA payoffs"};
    app.require_subcommand(1);
    Config cfg;

    auto solver_flags = [&](CLI::App* sub) {
        sub->add_option("--epsilon", cfg.epsilon, "Target bracket width")->check(CLI::PositiveNumber);
        sub->add_option("--tau", cfg.tau, "Initial slack on the lower bound")->check(CLI::PositiveNumber);
        sub->add_option("--delta", cfg.delta, "Cut harvesting threshold in (0, 1]")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--gamma", cfg.gamma, "Cut removal factor in [0, 1)")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--zeta", cfg.zeta, "MILP relative gap in (0, 1)")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--xbar", cfg.xbar, "Orthant instances: side of the slack box");
    };

    auto* gen_cmd = app.add_subcommand("gen-market", "Generate a synthetic instance from a model-family spec");
    gen_cmd->add_option("--spec", cfg.spec, "Market spec JSON")->required();
    gen_cmd->add_option("--seed", cfg.seed, "Override the spec seed");
    gen_cmd->add_option("--out", cfg.out, "Output file (default stdout)");

    auto* bounds_cmd = app.add_subcommand("bounds", "Lower and upper price bounds, optionally over a strike sweep");
    bounds_cmd->add_option("--instance", cfg.instance, "Instance JSON")->required();
    bounds_cmd->add_option("--payoff", cfg.payoff, "Payoff spec, e.g. max:assets=2/3/4")->required();
    bounds_cmd->add_option("--algo", cfg.algo, "ecp, accp or both")->check(CLI::IsMember({"ecp", "accp", "both"}));
    bounds_cmd->add_option("--sweep", cfg.sweep, "start:stop:step");
    bounds_cmd->add_option("--strike", cfg.strike, "Single strike for a strike-less payoff");
    bounds_cmd->add_option("--reference", cfg.reference, "Market spec JSON for reference model prices");
    bounds_cmd->add_option("--workers", cfg.workers, "Parallel strike blocks")->check(CLI::PositiveNumber);
    bounds_cmd->add_flag("!--no-warm-start", cfg.warm_start, "Do not reuse support points across strikes");
    bounds_cmd->add_option("--seed", cfg.seed, "Unused; accepted for symmetry");
    bounds_cmd->add_option("--out", cfg.out, "CSV output (default stdout)");
    solver_flags(bounds_cmd);

    auto* detect_cmd = app.add_subcommand("detect", "Look for a static arbitrage");
    detect_cmd->add_option("--instance", cfg.instance, "Instance JSON")->required();
    detect_cmd->add_option("--out", cfg.out, "Strategy JSON output (default stdout)");
    solver_flags(detect_cmd);

    auto* repair_cmd = app.add_subcommand("repair", "Widen call/put quotes to remove arbitrage");
    repair_cmd->add_option("--chain", cfg.chain, "Chain JSON")->required();
    repair_cmd->add_option("--eta", cfg.eta, "Minimum mass per support point")->check(CLI::PositiveNumber);
    repair_cmd->add_option("--xbar", cfg.xbar, "Override the chain's truncation bound");
    repair_cmd->add_option("--filter", cfg.filter, "Drop strikes breaking intrinsic bounds by more than this");
    repair_cmd->add_option("--out", cfg.out, "Output JSON (default stdout)");

    auto* measure_cmd = app.add_subcommand("measure", "Extract a discrete pricing measure attaining the lower bound");
    measure_cmd->add_option("--instance", cfg.instance, "Instance JSON")->required();
    measure_cmd->add_option("--payoff", cfg.payoff, "Payoff spec")->required();
    measure_cmd->add_option("--strike", cfg.strike, "Strike for a strike-less payoff");
    measure_cmd->add_option("--algo", cfg.algo, "ecp or accp")->check(CLI::IsMember({"ecp", "accp"}));
    measure_cmd->add_option("--out", cfg.out, "Output JSON (default stdout)");
    solver_flags(measure_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen_market(cfg);
        if (*bounds_cmd) return cmd_bounds(cfg);
        if (*detect_cmd) return cmd_detect(cfg);
        if (*repair_cmd) return cmd_repair(cfg);
        if (*measure_cmd) return cmd_measure(cfg);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ResourceLimit& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kSolver;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kSolver;
    }
    return kUsage;
}
