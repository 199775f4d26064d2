#pragma once

#include <optional>
#include <vector>

#include "mfpb/bounds.hpp"
#include "mfpb/cpwa.hpp"
#include "mfpb/market.hpp"
#include "mfpb/radial.hpp"

namespace mfpb {

struct EcpOptions {
    double epsilon = 1e-3;
    double tau = 1.0;
    double delta = 0.7;
    // Orthant only: box for the slack minimization.  Defaults to
    // default_orthant_box(), which flags the result.
    std::optional<std::vector<double>> box;
    // Initial lower bound; computed with compute_lower_phi() when absent.
    std::optional<double> lower_phi;
    std::vector<std::vector<double>> initial_points;
    double rel_gap = 1e-9;
    long node_limit = 200000;
    long max_iterations = 2000;
    double rounding = 1e-4;  // cut points snap to this grid; 0 disables
    RadialOptions radial;
};

BoundsResult solve_ecp(const MarketInstance& m, const CpwaFunction& target, const EcpOptions& opts = {});

}  // namespace mfpb
