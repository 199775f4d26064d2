#include "mfpb/milp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>
#include <string>

#include "mfpb/error.hpp"

namespace mfpb::milp {

namespace {

struct Node {
    double bound;
    long id;
    std::vector<std::int8_t> fixing;  // per binary: -1 free, 0, 1
    std::shared_ptr<const lp::Basis> basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

double objective_value(const lp::LinearProgram& lp, std::span<const double> x) {
    double v = lp.objective_offset;
    for (int j = 0; j < lp.variable_count(); ++j) v += lp.objective[j] * x[j];
    return v;
}

bool gap_closed(double upper, double lower, double rel_gap) {
    if (!std::isfinite(upper)) return false;
    if (upper == 0.0) return upper - lower <= rel_gap * 1e-6;
    return (upper - lower) / std::abs(upper) <= rel_gap;
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::GapReached: return "gap_reached";
        case Status::NodeLimit: return "node_limit";
        case Status::Infeasible: return "infeasible";
    }
    return "?";
}

bool is_feasible(const MixedIntegerProgram& p, std::span<const double> x, double tol, double integrality) {
    const auto& lp = p.base;
    if (static_cast<int>(x.size()) != lp.variable_count()) return false;
    for (int j = 0; j < lp.variable_count(); ++j) {
        const double t = tol * (1.0 + std::abs(x[j]));
        if (x[j] < lp.lower[j] - t || x[j] > lp.upper[j] + t) return false;
    }
    for (int b : p.binaries)
        if (std::min(std::abs(x[b]), std::abs(x[b] - 1.0)) > integrality) return false;
    for (const auto& r : lp.rows) {
        double s = 0.0, scale = std::abs(r.rhs);
        for (const auto& [j, a] : r.coeffs) {
            s += a * x[j];
            scale = std::max(scale, std::abs(a * x[j]));
        }
        const double t = tol * (1.0 + scale);
        if (r.relation == lp::Relation::LessEqual && s > r.rhs + t) return false;
        if (r.relation == lp::Relation::GreaterEqual && s < r.rhs - t) return false;
        if (r.relation == lp::Relation::Equal && std::abs(s - r.rhs) > t) return false;
    }
    return true;
}

Result solve(const MixedIntegerProgram& p, const Options& opts) {
    const auto& lp = p.base;
    for (int b : p.binaries) {
        if (b < 0 || b >= lp.variable_count()) throw InvalidArgument("MILP binary index out of range");
        if (lp.lower[b] < 0.0 || lp.upper[b] > 1.0)
            throw InvalidArgument("MILP binary variable " + std::to_string(b) + " is not bounded in [0,1]");
    }
    if (!(opts.rel_gap > 0.0)) throw InvalidArgument("MILP relative gap must be positive");

    Result res;
    std::vector<PoolEntry> candidates;
    double upper = lp::kInf;
    double pruned_min = lp::kInf;

    auto prune_tol = [&]() {
        if (!std::isfinite(upper)) return 0.0;
        return upper == 0.0 ? opts.rel_gap * 1e-6 : opts.rel_gap * std::abs(upper);
    };
    auto offer = [&](std::vector<double> x) {
        const double v = objective_value(lp, x);
        if (v < upper) {
            upper = v;
            res.incumbent = x;
            res.incumbent_value = v;
            res.incumbent_history.push_back(v);
        }
        candidates.push_back({std::move(x), v});
        if (candidates.size() > 4 * opts.pool_capacity) {
            std::stable_sort(candidates.begin(), candidates.end(),
                             [](const PoolEntry& a, const PoolEntry& b) { return a.value < b.value; });
            candidates.resize(opts.pool_capacity);
        }
    };

    lp::Simplex simplex(lp, opts.lp);
    const std::size_t nb = p.binaries.size();
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push({-lp::kInf, next_id++, std::vector<std::int8_t>(nb, -1), nullptr});
    bool root = true;
    res.status = Status::Optimal;

    while (!open.empty()) {
        const double global = std::min(open.top().bound, pruned_min);
        res.bound_history.push_back(std::min(global, upper));
        if (gap_closed(upper, global, opts.rel_gap) && open.top().bound > -lp::kInf &&
            upper - global > 0.0) {
            res.status = Status::GapReached;
            break;
        }
        if (res.nodes >= opts.node_limit) {
            res.status = Status::NodeLimit;
            break;
        }
        Node node = open.top();
        open.pop();
        if (std::isfinite(upper) && node.bound >= upper - prune_tol()) {
            pruned_min = std::min(pruned_min, node.bound);
            continue;
        }
        for (std::size_t k = 0; k < nb; ++k) {
            const int v = p.binaries[k];
            if (node.fixing[k] < 0) simplex.set_bounds(v, lp.lower[v], lp.upper[v]);
            else simplex.set_bounds(v, node.fixing[k], node.fixing[k]);
        }
        lp::Solution sol;
        if (node.basis) {
            simplex.load_basis(*node.basis);
            sol = simplex.resolve();
        } else {
            sol = simplex.solve();
        }
        ++res.nodes;
        res.lp_iterations = sol.iterations;
        if (sol.status == lp::Status::Unbounded) throw InvalidArgument("MILP relaxation is unbounded");
        if (sol.status == lp::Status::Infeasible) {
            if (root) {
                res.status = Status::Infeasible;
                return res;
            }
            continue;
        }
        root = false;
        const double value = sol.objective;
        if (opts.heuristic) {
            if (auto cand = opts.heuristic(sol.x)) {
                if (is_feasible(p, *cand, 1e-7, opts.integrality)) offer(std::move(*cand));
            }
        }
        if (std::isfinite(upper) && value >= upper - prune_tol()) {
            pruned_min = std::min(pruned_min, std::max(value, node.bound));
            continue;
        }
        int branch = -1;
        double frac_best = opts.integrality;
        for (std::size_t k = 0; k < nb; ++k) {
            if (node.fixing[k] >= 0) continue;
            const double v = sol.x[p.binaries[k]];
            const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
            if (frac > frac_best) {
                frac_best = frac;
                branch = static_cast<int>(k);
            }
        }
        if (branch < 0) {
            auto x = sol.x;
            for (int b : p.binaries) x[b] = std::round(x[b]);
            if (is_feasible(p, x, 1e-7, opts.integrality)) offer(std::move(x));
            else offer(sol.x);
            continue;
        }
        auto basis = std::make_shared<const lp::Basis>(simplex.basis());
        const double bound = std::max(value, node.bound);
        const std::int8_t first = sol.x[p.binaries[branch]] >= 0.5 ? 1 : 0;
        for (std::int8_t side : {first, static_cast<std::int8_t>(1 - first)}) {
            Node child{bound, next_id++, node.fixing, basis};
            child.fixing[branch] = side;
            open.push(std::move(child));
        }
    }

    if (!std::isfinite(upper)) {
        // Search finished without any integer point: infeasible, or the node
        // limit stopped it first.
        if (res.status == Status::Optimal) res.status = Status::Infeasible;
        res.best_bound = open.empty() ? lp::kInf : open.top().bound;
        return res;
    }
    double global = pruned_min;
    if (!open.empty()) global = std::min(global, open.top().bound);
    res.best_bound = std::min(global, upper);
    if (res.status == Status::Optimal && !gap_closed(upper, res.best_bound, 1e-12) && res.best_bound < upper)
        res.status = Status::GapReached;
    res.bound_history.push_back(res.best_bound);

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const PoolEntry& a, const PoolEntry& b) { return a.value < b.value; });
    const double cut = upper < 0.0 ? opts.pool_threshold * upper : -lp::kInf;
    for (auto& c : candidates) {
        if (res.pool.size() >= opts.pool_capacity) break;
        const bool is_incumbent = c.x == res.incumbent;
        if (!is_incumbent && c.value > cut) continue;
        bool dup = false;
        for (const auto& q : res.pool)
            if (q.x == c.x) {
                dup = true;
                break;
            }
        if (!dup) res.pool.push_back(std::move(c));
    }
    if (std::none_of(res.pool.begin(), res.pool.end(), [&](const PoolEntry& e) { return e.x == res.incumbent; }))
        res.pool.insert(res.pool.begin(), {res.incumbent, res.incumbent_value});
    return res;
}

}  // namespace mfpb::milp
