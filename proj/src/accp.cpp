#include "mfpb/accp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "cut_points.hpp"
#include "mfpb/error.hpp"
#include "mfpb/lp.hpp"
#include "mfpb/milp_encoding.hpp"

namespace mfpb {

namespace {

// Appends the bounds as they stand when an iteration ends, whichever branch
// ends it.
struct IterationLog {
    BoundsResult& res;
    const double& lower;
    const double& upper;
    double slack = 0.0;
    double radius = -1.0;
    int cuts = 0;
    ~IterationLog() { res.history.push_back({lower, upper, slack, radius, cuts}); }
};

struct Cut {
    std::vector<double> x;
    std::vector<double> g;
    double f = 0.0;
    double scale = 1.0;  // sqrt(1 + |g|^2)
    int generation = 0;
    bool active = true;
    bool removable = true;
};

void check_options(const AccpOptions& o, int n) {
    if (!(o.epsilon > 0)) throw InvalidArgument("accp: epsilon must be positive");
    if (!(o.tau > o.epsilon)) throw InvalidArgument("accp: tau must exceed epsilon");
    if (!(o.gamma >= 0 && o.gamma < 1)) throw InvalidArgument("accp: gamma must lie in [0, 1)");
    if (!(o.zeta > 0 && o.zeta < 1)) throw InvalidArgument("accp: zeta must lie in (0, 1)");
    if (!(o.delta > 0 && o.delta <= 1)) throw InvalidArgument("accp: delta must lie in (0, 1]");
    if (!(o.cash_bound > 0)) throw InvalidArgument("accp: cash bound must be positive");
    if (!o.unit_bound.empty()) {
        if (static_cast<int>(o.unit_bound.size()) != n) throw InvalidArgument("accp: unit bound length mismatch");
        for (double u : o.unit_bound)
            if (!(u > 0)) throw InvalidArgument("accp: unit bounds must be positive");
    }
}

}  // namespace

AccpResult solve_accp(const MarketInstance& market, const CpwaFunction& target, const AccpOptions& opts) {
    MarketInstance m = market;
    m.validate();
    if (m.domain != DomainKind::Box) throw InvalidArgument("accp: requires a box domain");
    if (target.dimension() != m.dimension) throw InvalidArgument("accp: target dimension mismatch");
    const int n = m.instrument_count();
    const int d = m.dimension;
    check_options(opts, n);
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> unit_bound = opts.unit_bound.empty() ? std::vector<double>(n, 100.0) : opts.unit_bound;
    const std::vector<double> zeros(d, 0.0);

    AccpResult out;
    BoundsResult& res = out.bounds;
    res.box = m.upper;
    const double lower_phi = opts.lower_phi ? *opts.lower_phi : compute_lower_phi(m, target).value;
    res.initial_lower = lower_phi;

    // Starting superhedge and its price.
    Portfolio hedge;
    double cash_bound = opts.cash_bound;
    if (opts.initial_hedge) {
        hedge = *opts.initial_hedge;
        if (static_cast<int>(hedge.units.size()) != n) throw InvalidArgument("accp: initial hedge length mismatch");
    } else {
        hedge.units.assign(n, 0.0);
        const auto neg = target.negated();
        hedge.cash = -minimize_over_box(neg, m.upper).bound;
        // Large payoffs: grow the box so the default start sits well inside it.
        cash_bound = std::max(cash_bound, 2.0 * std::abs(hedge.cash) + 2.0);
    }
    if (std::abs(hedge.cash) > cash_bound - 1)
        throw InvalidArgument("accp: initial hedge cash outside the bounding box; raise cash_bound");
    for (int j = 0; j < n; ++j)
        if (std::abs(hedge.units[j]) > unit_bound[j] - 1)
            throw InvalidArgument("accp: initial hedge units outside the bounding box; raise unit_bound");
    {
        std::vector<double> coeffs(hedge.units);
        std::vector<CpwaFunction> fns(m.payoffs);
        coeffs.push_back(-1.0);
        fns.push_back(target);
        coeffs.push_back(1.0);
        fns.push_back(CpwaFunction::affine(zeros, hedge.cash));
        const auto mn = minimize_over_box(linear_combination(coeffs, fns), m.upper);
        if (mn.bound < -1e-7 * (1 + std::abs(hedge.cash))) throw InvalidArgument("accp: initial hedge does not dominate f");
    }

    // Variables (c, y+, y-).
    const int nv = 2 * n + 1;
    std::vector<double> lower(nv, 0.0), upper(nv);
    lower[0] = -cash_bound;
    upper[0] = cash_bound;
    for (int j = 0; j < n; ++j) upper[1 + j] = upper[1 + n + j] = unit_bound[j];
    std::vector<double> price_row(nv);
    price_row[0] = 1.0;
    for (int j = 0; j < n; ++j) {
        price_row[1 + j] = m.ask[j];
        price_row[1 + n + j] = -m.bid[j];
    }

    std::vector<Cut> cuts;
    std::map<std::vector<double>, std::size_t> cut_index;
    auto add_cut = [&](std::vector<double> x, int generation) {
        auto it = cut_index.find(x);
        if (it != cut_index.end()) {
            // Reinstate a previously removed cut in the new generation.
            Cut& c = cuts[it->second];
            if (c.active) return false;
            c.active = true;
            c.removable = true;
            c.generation = generation;
            return true;
        }
        Cut c;
        c.g = m.payoff_values(x);
        c.f = target(x);
        double sq = 1.0;
        for (double v : c.g) sq += v * v;
        c.scale = std::sqrt(sq);
        c.generation = generation;
        c.x = std::move(x);
        cut_index.emplace(c.x, cuts.size());
        cuts.push_back(std::move(c));
        return true;
    };
    auto cut_half_space = [&](const Cut& c) {
        lp::HalfSpace h;
        h.a.assign(nv, 0.0);
        h.a[0] = 1.0;
        for (int j = 0; j < n; ++j) {
            h.a[1 + j] = c.g[j];
            h.a[1 + n + j] = -c.g[j];
        }
        h.b = c.f;
        h.scale = c.scale;
        return h;
    };
    for (const auto& x : opts.initial_points) {
        if (static_cast<int>(x.size()) != d) throw InvalidArgument("accp: initial point has the wrong dimension");
        add_cut(detail::snap(x, m.upper, 0.0), 0);
    }

    // Radii per generation; generation 0 counts as infinitely central so its
    // removable cuts may always be tested.
    std::vector<double> radius{std::numeric_limits<double>::infinity()};
    double phi_lo = lower_phi - opts.tau;
    double phi_hi = hedge.cash + price_pi(hedge.units, m);
    Portfolio best = hedge;
    bool flag = false;
    const detail::CutHarvester harvester(m.upper, opts.rounding);

    BoxMinOptions bo;
    bo.rel_gap = opts.zeta;
    bo.node_limit = opts.node_limit;
    bo.pool_threshold = opts.delta;

    int r = 0;
    res.status = BoundsStatus::Converged;
    while (phi_hi - phi_lo > opts.epsilon) {
        if (phi_hi < lower_phi) break;  // arbitrage already certified
        if (r >= opts.max_iterations) {
            res.status = BoundsStatus::IterationLimit;
            break;
        }
        ++r;
        ++res.iterations;
        radius.push_back(-1.0);
        IterationLog log{res, phi_lo, phi_hi};
        double phi_mid = 0.5 * (phi_lo + phi_hi);
        if (flag) phi_mid = 0.5 * (phi_lo + phi_mid);

        std::vector<lp::HalfSpace> rows;
        {
            lp::HalfSpace lo_row{price_row, phi_lo, std::nullopt};
            lp::HalfSpace hi_row{price_row, -phi_mid, std::nullopt};
            for (double& a : hi_row.a) a = -a;
            rows.push_back(std::move(lo_row));
            rows.push_back(std::move(hi_row));
        }
        int active = 0;
        for (const auto& c : cuts)
            if (c.active) {
                rows.push_back(cut_half_space(c));
                ++active;
            }
        log.cuts = active;
        const auto cc = lp::chebyshev_center(rows, lower, upper);
        ++res.lp_solves;

        if (!cc.feasible) {
            // Lower-bound LP over the active cuts alone.
            lp::LinearProgram prog;
            for (int v = 0; v < nv; ++v) prog.add_variable(price_row[v], lower[v], upper[v]);
            LowerBoundCertificate cert;
            for (const auto& c : cuts) {
                if (!c.active) continue;
                const auto h = cut_half_space(c);
                lp::Row row{{}, lp::Relation::GreaterEqual, h.b};
                for (int v = 0; v < nv; ++v)
                    if (h.a[v] != 0.0) row.coeffs.push_back({v, h.a[v]});
                prog.add_row(std::move(row));
                cert.support.push_back(c.x);
            }
            const auto sol = lp::solve(prog);
            ++res.lp_solves;
            if (sol.status != lp::Status::Optimal)
                throw InvalidArgument("accp: bounding box excludes every superhedge; raise cash_bound or unit_bound");
            phi_lo = sol.objective;
            cert.cash = sol.x[0];
            cert.units.resize(n);
            cert.interior = std::abs(cert.cash) < cash_bound;
            for (int j = 0; j < n; ++j) {
                cert.units[j] = sol.x[1 + j] - sol.x[1 + n + j];
                cert.interior = cert.interior && std::abs(cert.units[j]) < unit_bound[j];
            }
            out.certificate = std::move(cert);
            for (auto& c : cuts)
                if (c.generation >= 1 && c.generation <= r - 1) c.removable = true;
            continue;
        }

        const double c_r = cc.center[0];
        std::vector<double> y(n);
        for (int j = 0; j < n; ++j) y[j] = cc.center[1 + j] - cc.center[1 + n + j];
        radius[r] = cc.radius;
        log.radius = cc.radius;

        std::vector<double> coeffs(y);
        std::vector<CpwaFunction> fns(m.payoffs);
        coeffs.push_back(-1.0);
        fns.push_back(target);
        coeffs.push_back(1.0);
        fns.push_back(CpwaFunction::affine(zeros, c_r));
        const auto h = linear_combination(coeffs, fns);
        const auto mn = minimize_over_box(h, m.upper, bo);
        ++res.milp_solves;
        res.milp_nodes += mn.nodes;
        const double s_hi = mn.value;
        double s_lo = mn.bound;
        if (mn.status == milp::Status::NodeLimit && s_hi >= 0 && s_lo < 0) {
            s_lo = 0.0;
            res.heuristic_assisted = true;
        }

        for (auto& x : harvester.candidates(h, mn.pool, opts.delta * s_hi)) add_cut(std::move(x), r);
        log.slack = s_lo;

        const double candidate = c_r + price_pi(y, m) - s_lo;
        if (candidate < phi_hi - opts.epsilon) {
            phi_hi = candidate;
            best.cash = c_r - s_lo;
            best.units = y;
            if (s_lo >= 0) {
                for (auto& c : cuts)
                    if (c.generation >= 1 && c.generation <= r) c.removable = true;
                continue;
            }
        }
        if (flag) {
            flag = false;
            for (auto& c : cuts)
                if (c.generation == r) c.removable = false;
            continue;
        }
        flag = true;
        for (auto& c : cuts) {
            if (!c.active || !c.removable) continue;
            if (!(cc.radius < opts.gamma * radius[c.generation])) continue;
            double lhs = c_r - c.scale * cc.radius;
            for (int j = 0; j < n; ++j) lhs += y[j] * c.g[j];
            if (lhs > c.f) c.active = false;
        }
    }

    res.lower = phi_lo;
    res.upper = phi_hi;
    res.cash = best.cash;
    res.units = best.units;
    for (const auto& c : cuts)
        if (c.active) res.support.push_back(c.x);
    if (res.upper < lower_phi) res.status = BoundsStatus::Unbounded;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace mfpb
