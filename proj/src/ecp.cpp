#include "mfpb/ecp.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "cut_points.hpp"
#include "mfpb/error.hpp"
#include "mfpb/milp_encoding.hpp"

namespace mfpb {

const char* to_string(BoundsStatus s) {
    switch (s) {
        case BoundsStatus::Converged: return "converged";
        case BoundsStatus::Unbounded: return "unbounded_arbitrage";
        case BoundsStatus::IterationLimit: return "iteration_limit";
        case BoundsStatus::Stalled: return "stalled";
    }
    return "?";
}

namespace {

void check_options(const EcpOptions& o) {
    if (!(o.epsilon > 0)) throw InvalidArgument("ecp: epsilon must be positive");
    if (!(o.tau > 0)) throw InvalidArgument("ecp: tau must be positive");
    if (!(o.delta > 0 && o.delta <= 1)) throw InvalidArgument("ecp: delta must lie in (0, 1]");
    if (o.max_iterations < 1) throw InvalidArgument("ecp: max_iterations must be positive");
}

std::string describe(std::span<const double> x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

}  // namespace

BoundsResult solve_ecp(const MarketInstance& market, const CpwaFunction& target, const EcpOptions& opts) {
    check_options(opts);
    MarketInstance m = market;
    m.validate();
    if (target.dimension() != m.dimension) throw InvalidArgument("ecp: target dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = m.instrument_count();
    const int d = m.dimension;

    BoundsResult res;
    if (m.domain == DomainKind::Box) {
        res.box = m.upper;
    } else if (opts.box) {
        if (static_cast<int>(opts.box->size()) != d) throw InvalidArgument("ecp: box has the wrong dimension");
        res.box = *opts.box;
    } else {
        res.box = default_orthant_box(m, target);
        res.default_box = true;
    }
    const double lower_phi = opts.lower_phi ? *opts.lower_phi : compute_lower_phi(m, target, std::nullopt, res.box).value;
    res.initial_lower = lower_phi;

    const SlackTemplate tmpl(m.payoffs, target);
    lp::LinearProgram prog;
    const int cash = prog.add_variable(1.0, -lp::kInf, lp::kInf);
    std::vector<int> plus(n), minus(n);
    for (int j = 0; j < n; ++j) plus[j] = prog.add_variable(m.ask[j], 0.0, lp::kInf);
    for (int j = 0; j < n; ++j) minus[j] = prog.add_variable(-m.bid[j], 0.0, lp::kInf);

    if (m.domain == DomainKind::Orthant) {
        const auto sys = generate_radial_system(tmpl.radial(), opts.radial);
        const int eta0 = prog.variable_count();
        for (int v = 0; v < sys.aux_count; ++v) prog.add_variable(0.0, 0.0, lp::kInf);
        for (const auto& r : sys.rows) {
            lp::Row out{{}, r.relation, r.rhs};
            for (const auto& [j, a] : r.coeffs) {
                if (j < n) {
                    out.coeffs.push_back({plus[j], a});
                    out.coeffs.push_back({minus[j], -a});
                } else {
                    out.coeffs.push_back({eta0 + j - n, a});
                }
            }
            prog.add_row(std::move(out));
        }
    }
    {
        lp::Row floor{{{cash, 1.0}}, lp::Relation::GreaterEqual, lower_phi - opts.tau};
        for (int j = 0; j < n; ++j) {
            if (m.ask[j] != 0.0) floor.coeffs.push_back({plus[j], m.ask[j]});
            if (m.bid[j] != 0.0) floor.coeffs.push_back({minus[j], -m.bid[j]});
        }
        prog.add_row(std::move(floor));
    }
    const std::size_t first_cut_row = prog.rows.size();

    detail::CutHarvester harvester(res.box, opts.rounding);
    auto add_cut = [&](const std::vector<double>& x) {
        const auto g = m.payoff_values(x);
        lp::Row row{{{cash, 1.0}}, lp::Relation::GreaterEqual, target(x)};
        for (int j = 0; j < n; ++j) {
            if (g[j] == 0.0) continue;
            row.coeffs.push_back({plus[j], g[j]});
            row.coeffs.push_back({minus[j], -g[j]});
        }
        prog.add_row(std::move(row));
        res.support.push_back(x);
    };
    for (const auto& x : opts.initial_points) {
        if (static_cast<int>(x.size()) != d) throw InvalidArgument("ecp: initial point has the wrong dimension");
        for (double v : x)
            if (!(v >= 0.0)) throw InvalidArgument("ecp: initial points must be nonnegative");
        if (harvester.seen(x)) continue;
        harvester.remember(x);
        add_cut(x);
    }

    BoxMinOptions bo;
    bo.rel_gap = opts.rel_gap;
    bo.node_limit = opts.node_limit;
    bo.pool_threshold = opts.delta;

    std::vector<double> zeros(d, 0.0);
    double lower = 0.0, slack = 0.0, c = 0.0;
    std::vector<double> y(n, 0.0);
    for (;;) {
        lp::Solution sol;
        try {
            sol = lp::solve(prog);
        } catch (const NumericalError& e) {
            std::string msg = e.what();
            const auto pos = msg.find("row ");
            if (pos != std::string::npos) {
                const std::size_t row = std::stoul(msg.substr(pos + 4));
                if (row >= first_cut_row && row - first_cut_row < res.support.size())
                    msg += "; cut at x = " + describe(res.support[row - first_cut_row]);
            }
            throw NumericalError(msg);
        }
        ++res.lp_solves;
        if (sol.status == lp::Status::Infeasible)
            throw InvalidArgument("ecp: no portfolio satisfies the constraints; the target has no finite superhedge");
        if (sol.status == lp::Status::Unbounded) throw NumericalError("ecp: master LP unbounded despite the floor row");

        lower = sol.objective;
        c = sol.x[cash];
        for (int j = 0; j < n; ++j) y[j] = sol.x[plus[j]] - sol.x[minus[j]];

        const CpwaFunction parts[] = {tmpl.instantiate(y), CpwaFunction::affine(zeros, c)};
        const double ones[] = {1.0, 1.0};
        const auto h = linear_combination(ones, parts);
        const auto mn = minimize_over_box(h, res.box, bo);
        ++res.milp_solves;
        res.milp_nodes += mn.nodes;
        slack = mn.bound;
        ++res.iterations;
        res.history.push_back({lower, lower - slack, slack, 0.0, static_cast<int>(res.support.size())});

        if (slack >= -opts.epsilon) {
            res.status = BoundsStatus::Converged;
            break;
        }
        // The shifted portfolio already superhedges below the initial lower
        // bound: no need to tighten further, arbitrage is certified.
        if (lower - slack < lower_phi) break;
        if (res.iterations >= opts.max_iterations) {
            res.status = BoundsStatus::IterationLimit;
            break;
        }
        const auto points = harvester.harvest(h, mn.pool, opts.delta * mn.value);
        if (points.empty()) {
            res.status = BoundsStatus::Stalled;
            break;
        }
        for (const auto& x : points) add_cut(x);
    }

    res.lower = lower;
    res.upper = lower - slack;
    res.cash = c - slack;
    res.units = y;
    if (res.upper < lower_phi) res.status = BoundsStatus::Unbounded;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace mfpb
