#include <cmath>
#include <numeric>

#include "mfpb/accp.hpp"
#include "mfpb/error.hpp"
#include "mfpb/lp.hpp"

namespace mfpb {

DiscreteMeasure extract_measure(const MarketInstance& m, const CpwaFunction& target,
                                std::span<const std::vector<double>> support) {
    if (support.empty()) throw InvalidArgument("measure: empty support");
    const int n = m.instrument_count();
    lp::LinearProgram prog;
    lp::Row total{{}, lp::Relation::Equal, 1.0};
    std::vector<lp::Row> lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        lo[j] = {{}, lp::Relation::GreaterEqual, m.bid[j]};
        hi[j] = {{}, lp::Relation::LessEqual, m.ask[j]};
    }
    std::vector<double> fx(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) {
        const auto& x = support[k];
        if (static_cast<int>(x.size()) != m.dimension) throw InvalidArgument("measure: support point dimension");
        fx[k] = target(x);
        const int v = prog.add_variable(-fx[k], 0.0, lp::kInf);
        total.coeffs.push_back({v, 1.0});
        const auto gx = m.payoff_values(x);
        for (int j = 0; j < n; ++j) {
            const double g = gx[j];
            if (g == 0.0) continue;
            lo[j].coeffs.push_back({v, g});
            hi[j].coeffs.push_back({v, g});
        }
    }
    prog.add_row(std::move(total));
    for (int j = 0; j < n; ++j) {
        // A payoff vanishing on the whole support prices at zero there.
        if (lo[j].coeffs.empty()) {
            if (m.bid[j] > 1e-9 || m.ask[j] < -1e-9)
                throw InvalidArgument("measure: support cannot price instrument " + m.names.at(j));
            continue;
        }
        prog.add_row(std::move(lo[j]));
        prog.add_row(std::move(hi[j]));
    }
    const auto sol = lp::solve(prog);
    if (sol.status != lp::Status::Optimal)
        throw InvalidArgument("measure: no pricing measure consistent with the quotes on this support");

    DiscreteMeasure out;
    double total_mass = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (sol.x[k] <= 1e-12) continue;
        out.atoms.push_back({support[k], sol.x[k]});
        total_mass += sol.x[k];
    }
    for (auto& a : out.atoms) a.mass /= total_mass;
    for (std::size_t k = 0, a = 0; k < support.size(); ++k)
        if (sol.x[k] > 1e-12) out.value += out.atoms[a++].mass * fx[k];
    return out;
}

}  // namespace mfpb
