#pragma once

// Shared by the two cutting-plane solvers: turning MILP pool points into
// deduplicated, grid-rounded cut locations.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <vector>

#include "mfpb/cpwa.hpp"
#include "mfpb/milp_encoding.hpp"

namespace mfpb::detail {

inline std::vector<double> snap(std::span<const double> x, std::span<const double> upper, double grid) {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (grid > 0) out[j] = std::round(out[j] / grid) * grid;
        out[j] = std::clamp(out[j], 0.0, upper[j]);
        if (out[j] == 0.0) out[j] = 0.0;
    }
    return out;
}

class CutHarvester {
public:
    CutHarvester(std::vector<double> upper, double grid) : upper_(std::move(upper)), grid_(grid) {}

    bool seen(const std::vector<double>& x) const { return seen_.count(x) > 0; }
    void remember(const std::vector<double>& x) { seen_.insert(x); }

    // Points of the pool with value <= threshold.  A rounded point replaces
    // the original only while it still violates the cut (h < 0).
    std::vector<std::vector<double>> candidates(const CpwaFunction& h, std::span<const BoxPoint> pool,
                                                double threshold) const {
        std::vector<std::vector<double>> out;
        for (const auto& p : pool) {
            if (p.value > threshold) continue;
            auto x = snap(p.x, upper_, grid_);
            if (h(x) >= 0.0) x = p.x;
            out.push_back(std::move(x));
        }
        return out;
    }

    // Same, skipping points already used.
    std::vector<std::vector<double>> harvest(const CpwaFunction& h, std::span<const BoxPoint> pool, double threshold) {
        std::vector<std::vector<double>> out;
        for (auto& x : candidates(h, pool, threshold))
            if (seen_.insert(x).second) out.push_back(std::move(x));
        return out;
    }

private:
    std::vector<double> upper_;
    double grid_;
    std::set<std::vector<double>> seen_;
};

}  // namespace mfpb::detail
