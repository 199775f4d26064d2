#pragma once

// Shared generators and brute-force oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mfpb/cpwa.hpp"
#include "mfpb/lp.hpp"
#include "mfpb/market.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::vector<double> random_vector(Rng& rng, int n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

// Random CPWA with small integer-ish coefficients so that kinks are generic.
inline mfpb::CpwaFunction random_cpwa(Rng& rng, int d, int max_terms = 3, int max_pieces = 3,
                                      double coef = 2.0, double offset = 5.0) {
    std::vector<mfpb::CpwaTerm> terms;
    const int k = uniform_int(rng, 1, max_terms);
    for (int t = 0; t < k; ++t) {
        mfpb::CpwaTerm term{uniform_int(rng, 0, 1) ? 1 : -1, {}};
        const int pieces = uniform_int(rng, 1, max_pieces);
        for (int i = 0; i < pieces; ++i)
            term.pieces.push_back({random_vector(rng, d, -coef, coef), uniform(rng, -offset, offset)});
        terms.push_back(std::move(term));
    }
    return mfpb::CpwaFunction(d, std::move(terms));
}

// Minimum over the box [0, upper] of a CPWA function with d <= 2, taken over
// every vertex of the arrangement of kink hyperplanes and box faces plus a
// regular grid.  A piecewise-affine function attains its box minimum at such
// a vertex, so the vertex part alone is exact.
inline double box_min_oracle(const mfpb::CpwaFunction& h, const std::vector<double>& upper, int grid = 200) {
    const int d = h.dimension();
    // Hyperplanes <n, x> = c from piece differences and the box faces.
    std::vector<std::pair<std::vector<double>, double>> planes;
    for (const auto& t : h.terms())
        for (std::size_t i = 0; i < t.pieces.size(); ++i)
            for (std::size_t j = i + 1; j < t.pieces.size(); ++j) {
                std::vector<double> n(d);
                for (int c = 0; c < d; ++c) n[c] = t.pieces[i].slope[c] - t.pieces[j].slope[c];
                planes.push_back({n, t.pieces[j].offset - t.pieces[i].offset});
            }
    for (int c = 0; c < d; ++c) {
        std::vector<double> n(d, 0.0);
        n[c] = 1.0;
        planes.push_back({n, 0.0});
        planes.push_back({n, upper[c]});
    }
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& x) {
        for (int c = 0; c < d; ++c)
            if (x[c] < -1e-9 || x[c] > upper[c] + 1e-9) return;
        std::vector<double> clamped(d);
        for (int c = 0; c < d; ++c) clamped[c] = std::clamp(x[c], 0.0, upper[c]);
        best = std::min(best, h(clamped));
    };
    if (d == 1) {
        for (const auto& [n, c] : planes)
            if (std::abs(n[0]) > 1e-12) consider({c / n[0]});
    } else if (d == 2) {
        for (std::size_t p = 0; p < planes.size(); ++p)
            for (std::size_t q = p + 1; q < planes.size(); ++q) {
                const auto& [n1, c1] = planes[p];
                const auto& [n2, c2] = planes[q];
                const double det = n1[0] * n2[1] - n1[1] * n2[0];
                if (std::abs(det) < 1e-12) continue;
                consider({(c1 * n2[1] - c2 * n1[1]) / det, (n1[0] * c2 - n2[0] * c1) / det});
            }
    }
    // Grid pass, any dimension.
    std::vector<int> idx(d, 0);
    for (;;) {
        std::vector<double> x(d);
        for (int c = 0; c < d; ++c) x[c] = upper[c] * idx[c] / grid;
        best = std::min(best, h(x));
        int c = 0;
        while (c < d && ++idx[c] > grid) idx[c++] = 0;
        if (c == d) break;
    }
    return best;
}

// Minimum of a CPWA function over the simplex { z >= 0, sum z = 1 } for
// d <= 3: every vertex cut out by d-1 kink or face hyperplanes together with
// the simplex equation, plus a barycentric grid.  The vertex part is exact.
inline double simplex_min_oracle(const mfpb::CpwaFunction& h, int grid = 60) {
    const int d = h.dimension();
    std::vector<std::pair<std::vector<double>, double>> planes;
    for (const auto& t : h.terms())
        for (std::size_t i = 0; i < t.pieces.size(); ++i)
            for (std::size_t j = i + 1; j < t.pieces.size(); ++j) {
                std::vector<double> n(d);
                for (int c = 0; c < d; ++c) n[c] = t.pieces[i].slope[c] - t.pieces[j].slope[c];
                planes.push_back({n, t.pieces[j].offset - t.pieces[i].offset});
            }
    for (int c = 0; c < d; ++c) {
        std::vector<double> n(d, 0.0);
        n[c] = 1.0;
        planes.push_back({n, 0.0});
    }
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const Eigen::VectorXd& z) {
        std::vector<double> x(d);
        double sum = 0.0;
        for (int c = 0; c < d; ++c) {
            if (z[c] < -1e-9) return;
            x[c] = std::max(z[c], 0.0);
            sum += x[c];
        }
        for (double& v : x) v /= sum;
        best = std::min(best, h(x));
    };
    const int k = d - 1;
    std::vector<int> pick(k);
    auto solve_pick = [&]() {
        Eigen::MatrixXd a(d, d);
        Eigen::VectorXd b(d);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < d; ++c) a(r, c) = planes[pick[r]].first[c];
            b[r] = planes[pick[r]].second;
        }
        a.row(k).setOnes();
        b[k] = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() < d) return;
        consider(lu.solve(b));
    };
    const int np = static_cast<int>(planes.size());
    if (k == 0) {
        solve_pick();
    } else if (k == 1) {
        for (pick[0] = 0; pick[0] < np; ++pick[0]) solve_pick();
    } else if (k == 2) {
        for (pick[0] = 0; pick[0] < np; ++pick[0])
            for (pick[1] = pick[0] + 1; pick[1] < np; ++pick[1]) solve_pick();
    }
    std::vector<int> idx(d, 0);
    for (;;) {
        int used = 0;
        for (int c = 0; c + 1 < d; ++c) used += idx[c];
        if (used <= grid) {
            Eigen::VectorXd z(d);
            for (int c = 0; c + 1 < d; ++c) z[c] = double(idx[c]) / grid;
            z[d - 1] = double(grid - used) / grid;
            consider(z);
        }
        int c = 0;
        while (c + 1 < d && ++idx[c] > grid) idx[c++] = 0;
        if (c + 1 >= d) break;
    }
    return best;
}

// Quotes consistent with a discrete measure: every instrument's expectation
// under `atoms` (equal weights) widened by +-spread.  No arbitrage by
// construction.
inline mfpb::MarketInstance consistent_market(std::vector<mfpb::CpwaFunction> payoffs,
                                              const std::vector<std::vector<double>>& atoms,
                                              std::vector<double> upper, double spread = 0.05) {
    mfpb::MarketInstance m;
    m.dimension = payoffs.front().dimension();
    m.domain = upper.empty() ? mfpb::DomainKind::Orthant : mfpb::DomainKind::Box;
    m.upper = std::move(upper);
    for (const auto& g : payoffs) {
        double mean = 0.0;
        for (const auto& x : atoms) mean += g(x);
        mean /= static_cast<double>(atoms.size());
        m.bid.push_back(mean - spread);
        m.ask.push_back(mean + spread);
    }
    m.payoffs = std::move(payoffs);
    m.validate();
    return m;
}

// sup of E[f] over measures on a grid of the box matching the quotes: the
// discretized dual, solved over grid masses.  A lower bound on the true
// upper price bound; exact when every kink vertex lies on the grid.
inline double grid_dual_oracle(const mfpb::MarketInstance& m, const mfpb::CpwaFunction& f, double step) {
    namespace lp = mfpb::lp;
    const int d = m.dimension;
    const int n = m.instrument_count();
    std::vector<int> count(d);
    for (int c = 0; c < d; ++c) count[c] = static_cast<int>(std::llround(m.upper[c] / step)) + 1;
    lp::LinearProgram prog;
    lp::Row total{{}, lp::Relation::Equal, 1.0};
    std::vector<lp::Row> lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        lo[j] = {{}, lp::Relation::GreaterEqual, m.bid[j]};
        hi[j] = {{}, lp::Relation::LessEqual, m.ask[j]};
    }
    std::vector<int> idx(d, 0);
    for (;;) {
        std::vector<double> x(d);
        for (int c = 0; c < d; ++c) x[c] = std::min(m.upper[c], idx[c] * step);
        const int v = prog.add_variable(-f(x), 0.0, lp::kInf);
        total.coeffs.push_back({v, 1.0});
        for (int j = 0; j < n; ++j) {
            const double g = m.payoffs[j](x);
            if (g != 0.0) {
                lo[j].coeffs.push_back({v, g});
                hi[j].coeffs.push_back({v, g});
            }
        }
        int c = 0;
        while (c < d && ++idx[c] >= count[c]) idx[c++] = 0;
        if (c == d) break;
    }
    prog.add_row(std::move(total));
    for (int j = 0; j < n; ++j) {
        prog.add_row(std::move(lo[j]));
        prog.add_row(std::move(hi[j]));
    }
    const auto s = lp::solve(prog);
    return s.status == lp::Status::Optimal ? -s.objective : -std::numeric_limits<double>::infinity();
}

}  // namespace testsupport
