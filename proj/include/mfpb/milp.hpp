#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfpb/lp.hpp"

namespace mfpb::milp {

struct MixedIntegerProgram {
    lp::LinearProgram base;
    std::vector<int> binaries;
};

enum class Status { Optimal, GapReached, NodeLimit, Infeasible };

const char* to_string(Status s);

struct PoolEntry {
    std::vector<double> x;
    double value = 0.0;
};

// Maps a node's LP solution to a candidate integer-feasible point (or
// nothing).  Candidates are verified before they are accepted.
using Heuristic = std::function<std::optional<std::vector<double>>(std::span<const double>)>;

struct Options {
    double rel_gap = 1e-9;
    long node_limit = 200000;
    // Pool keeps solutions with value <= pool_threshold * incumbent when the
    // incumbent is negative; the incumbent itself is always kept.
    double pool_threshold = 1.0;
    std::size_t pool_capacity = 512;
    double integrality = 1e-6;
    Heuristic heuristic;
    lp::Tolerances lp;
};

struct Result {
    Status status = Status::Infeasible;
    std::vector<double> incumbent;
    double incumbent_value = lp::kInf;
    double best_bound = -lp::kInf;
    std::vector<PoolEntry> pool;  // ascending by value
    long nodes = 0;
    long lp_iterations = 0;
    std::vector<double> incumbent_history;
    std::vector<double> bound_history;
};

// Best-bound branch and bound, most-fractional branching, dual simplex warm
// starts from the parent basis.
Result solve(const MixedIntegerProgram& p, const Options& opts = {});

// Checks rows, bounds and integrality of a candidate point.
bool is_feasible(const MixedIntegerProgram& p, std::span<const double> x, double tol = 1e-7,
                 double integrality = 1e-6);

}  // namespace mfpb::milp
