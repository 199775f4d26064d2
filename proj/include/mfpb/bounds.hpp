#pragma once

#include <string>
#include <vector>

namespace mfpb {

enum class BoundsStatus {
    Converged,        // upper - lower <= epsilon
    Unbounded,        // upper bound fell below the initial lower bound: arbitrage
    IterationLimit,   // bounds valid but not within epsilon
    Stalled,          // no new violated cut could be produced; bounds valid
};

const char* to_string(BoundsStatus s);

struct IterationRecord {
    double lower = 0.0;
    double upper = 0.0;
    double slack = 0.0;  // ECP: s^(r); ACCP: lower bound of the MILP
    double radius = 0.0; // ACCP only
    int cuts = 0;
};

// Model-free price bounds for a payoff together with the superhedge that
// certifies the upper one.
struct BoundsResult {
    BoundsStatus status = BoundsStatus::Converged;
    double lower = 0.0;
    double upper = 0.0;
    double cash = 0.0;
    std::vector<double> units;
    std::vector<std::vector<double>> support;
    double initial_lower = 0.0;

    std::vector<double> box;           // box used for the MILP
    bool default_box = false;          // orthant: box chosen by default, not certified
    bool heuristic_assisted = false;   // ACCP stuck-state adjustment was applied

    long iterations = 0;
    long lp_solves = 0;
    long milp_solves = 0;
    long milp_nodes = 0;
    double seconds = 0.0;
    std::vector<IterationRecord> history;

    bool arbitrage() const { return status == BoundsStatus::Unbounded; }
};

}  // namespace mfpb
