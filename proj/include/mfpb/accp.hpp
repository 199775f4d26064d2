#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfpb/bounds.hpp"
#include "mfpb/cpwa.hpp"
#include "mfpb/market.hpp"

namespace mfpb {

struct AccpOptions {
    double epsilon = 1e-3;
    double tau = 1.0;
    double gamma = 0.1;  // cut removal aggressiveness; 0 keeps every cut
    double zeta = 0.8;   // MILP relative gap
    double delta = 0.7;
    double cash_bound = 100.0;  // widened automatically to fit the default start
    std::vector<double> unit_bound;  // empty: 100 for every instrument
    std::optional<double> lower_phi;
    // Superhedge to start from; defaults to holding max f in cash.
    std::optional<Portfolio> initial_hedge;
    std::vector<std::vector<double>> initial_points;
    long node_limit = 200000;
    long max_iterations = 5000;
    double rounding = 1e-4;
};

// Minimizer of the lower-bound LP from the last time the central polytope
// came out empty, with the cuts it used.
struct LowerBoundCertificate {
    double cash = 0.0;
    std::vector<double> units;
    std::vector<std::vector<double>> support;
    // |cash| < cash_bound and |units| < unit_bound strictly; required for the
    // measure built on `support` to be optimal.
    bool interior = false;
};

struct AccpResult {
    BoundsResult bounds;
    std::optional<LowerBoundCertificate> certificate;
};

// Box domains only.
AccpResult solve_accp(const MarketInstance& m, const CpwaFunction& target, const AccpOptions& opts = {});

// True iff the run established that the upper bound fell below the initial
// lower bound, i.e. the quotes admit arbitrage.
inline bool detect_unbounded(const BoundsResult& r) { return r.arbitrage(); }

struct Atom {
    std::vector<double> x;
    double mass = 0.0;
};

struct DiscreteMeasure {
    std::vector<Atom> atoms;
    double value = 0.0;  // expectation of the target
};

// Pricing measure on `support` consistent with the quotes that maximizes the
// expectation of the target.  Throws InvalidArgument when no such measure
// exists on the given points.
DiscreteMeasure extract_measure(const MarketInstance& m, const CpwaFunction& target,
                                std::span<const std::vector<double>> support);

}  // namespace mfpb
