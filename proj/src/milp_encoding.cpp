#include "mfpb/milp_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfpb/error.hpp"

namespace mfpb {

namespace {

constexpr double kNegligibleSlope = 1e-12;

// max over [0, upper] of <a, x> + b
double box_max(std::span<const double> a, double b, std::span<const double> upper) {
    double v = b;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] > 0) v += a[j] * upper[j];
    return v;
}

double box_min(std::span<const double> a, double b, std::span<const double> upper) {
    double v = b;
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] < 0) v += a[j] * upper[j];
    return v;
}

std::vector<double> term_big_m(const std::vector<AffinePiece>& pieces, std::span<const double> upper) {
    const std::size_t n = pieces.size();
    std::vector<double> m(n, -std::numeric_limits<double>::infinity());
    if (n < 2) return {};
    std::vector<double> diff(upper.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = pieces[k].slope[j] - pieces[i].slope[j];
            m[i] = std::max(m[i], box_max(diff, pieces[k].offset - pieces[i].offset, upper));
        }
    return m;
}

void check_box(const CpwaFunction& h, std::span<const double> upper) {
    if (static_cast<int>(upper.size()) != h.dimension())
        throw InvalidArgument("box dimension does not match the function");
    for (double u : upper)
        if (!(u > 0.0) || !std::isfinite(u)) throw InvalidArgument("box upper corner must be positive and finite");
}

}  // namespace

std::vector<std::vector<double>> big_m(const CpwaFunction& h, std::span<const double> upper) {
    check_box(h, upper);
    std::vector<std::vector<double>> out;
    for (const auto& t : h.terms()) out.push_back(term_big_m(t.pieces, upper));
    return out;
}

Encoding::Encoding(const CpwaFunction& h, std::span<const double> upper, const EncodingOptions& opts)
    : upper_(upper.begin(), upper.end()) {
    check_box(h, upper);
    const int d = h.dimension();
    auto& lp = program_.base;
    for (int j = 0; j < d; ++j) x_indices_.push_back(lp.add_variable(0.0, 0.0, upper_[j]));

    for (const auto& term : h.terms()) {
        bool negligible = true;
        for (const auto& p : term.pieces) {
            if (std::abs(p.offset) > opts.prune_threshold) negligible = false;
            for (double a : p.slope)
                if (std::abs(a) > opts.prune_threshold) negligible = false;
        }
        if (negligible) {
            double lo;
            if (term.sign > 0) {
                lo = -std::numeric_limits<double>::infinity();
                for (const auto& p : term.pieces) lo = std::max(lo, box_min(p.slope, p.offset, upper_));
            } else {
                lo = -std::numeric_limits<double>::infinity();
                for (const auto& p : term.pieces) lo = std::max(lo, box_max(p.slope, p.offset, upper_));
                lo = -lo;
            }
            pruned_lower_ += lo;
            ++pruned_terms_;
            continue;
        }
        // Clean slopes and drop duplicate pieces.
        std::vector<AffinePiece> pieces;
        for (auto p : term.pieces) {
            for (double& a : p.slope)
                if (std::abs(a) <= kNegligibleSlope) a = 0.0;
            if (std::find(pieces.begin(), pieces.end(), p) == pieces.end()) pieces.push_back(std::move(p));
        }
        if (pieces.size() == 1) {
            for (int j = 0; j < d; ++j) lp.objective[x_indices_[j]] += term.sign * pieces[0].slope[j];
            lp.objective_offset += term.sign * pieces[0].offset;
            continue;
        }
        Block blk{term.sign, std::move(pieces), -1, -1, -1};
        const double inf = lp::kInf;
        if (blk.sign > 0) {
            blk.aux = lp.add_variable(1.0, -inf, inf);
            for (const auto& p : blk.pieces) {
                lp::Row row{{{blk.aux, 1.0}}, lp::Relation::GreaterEqual, p.offset};
                for (int j = 0; j < d; ++j)
                    if (p.slope[j] != 0.0) row.coeffs.push_back({x_indices_[j], -p.slope[j]});
                lp.add_row(std::move(row));
            }
        } else {
            const auto m = term_big_m(blk.pieces, upper_);
            blk.aux = lp.add_variable(-1.0, -inf, inf);
            const int n = static_cast<int>(blk.pieces.size());
            blk.first_delta = lp.variable_count();
            for (int i = 0; i < n; ++i) lp.add_variable(0.0, 0.0, std::max(m[i], 0.0));
            blk.first_iota = lp.variable_count();
            for (int i = 0; i < n; ++i) {
                program_.binaries.push_back(lp.add_variable(0.0, 0.0, 1.0));
            }
            lp::Row pick{{}, lp::Relation::Equal, 1.0};
            for (int i = 0; i < n; ++i) {
                const auto& p = blk.pieces[i];
                // <a, x> + b + delta = zeta
                lp::Row eq{{{blk.first_delta + i, 1.0}, {blk.aux, -1.0}}, lp::Relation::Equal, -p.offset};
                for (int j = 0; j < d; ++j)
                    if (p.slope[j] != 0.0) eq.coeffs.push_back({x_indices_[j], p.slope[j]});
                lp.add_row(std::move(eq));
                // delta <= M (1 - iota)
                if (m[i] != 0.0)
                    lp.add_row({{{blk.first_delta + i, 1.0}, {blk.first_iota + i, m[i]}}, lp::Relation::LessEqual, m[i]});
                else
                    lp.add_row({{{blk.first_delta + i, 1.0}}, lp::Relation::LessEqual, 0.0});
                pick.coeffs.push_back({blk.first_iota + i, 1.0});
            }
            lp.add_row(std::move(pick));
        }
        blocks_.push_back(std::move(blk));
    }
}

std::vector<double> Encoding::decode_x(std::span<const double> solution) const {
    std::vector<double> x(x_indices_.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(solution[x_indices_[j]], 0.0, upper_[j]);
    return x;
}

std::vector<double> Encoding::complete(std::span<const double> x_in) const {
    const auto& lp = program_.base;
    std::vector<double> v(lp.variable_count(), 0.0);
    std::vector<double> x(x_indices_.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = std::clamp(x_in[j], 0.0, upper_[j]);
        v[x_indices_[j]] = x[j];
    }
    for (const auto& blk : blocks_) {
        const int n = static_cast<int>(blk.pieces.size());
        std::vector<double> vals(n);
        int arg = 0;
        for (int i = 0; i < n; ++i) {
            vals[i] = blk.pieces[i](x);
            if (vals[i] > vals[arg]) arg = i;
        }
        v[blk.aux] = vals[arg];
        if (blk.sign < 0) {
            for (int i = 0; i < n; ++i) {
                v[blk.first_delta + i] = std::max(0.0, vals[arg] - vals[i]);
                v[blk.first_iota + i] = i == arg ? 1.0 : 0.0;
            }
        }
    }
    return v;
}

BoxMinimum minimize_over_box(const CpwaFunction& h, std::span<const double> upper, const BoxMinOptions& opts) {
    const Encoding enc(h, upper, opts.encoding);
    milp::Options mo;
    mo.rel_gap = opts.rel_gap;
    mo.node_limit = opts.node_limit;
    mo.pool_threshold = opts.pool_threshold;
    mo.pool_capacity = opts.pool_capacity;
    mo.heuristic = [&enc](std::span<const double> sol) -> std::optional<std::vector<double>> {
        return enc.complete(enc.decode_x(sol));
    };
    const auto res = milp::solve(enc.program(), mo);
    BoxMinimum out;
    out.status = res.status;
    out.nodes = res.nodes;
    if (res.status == milp::Status::Infeasible && res.incumbent.empty())
        throw NumericalError("box minimization program reported infeasible");
    out.bound = res.best_bound + enc.pruned_lower_bound();
    for (const auto& e : res.pool) {
        auto x = enc.decode_x(e.x);
        const double v = h(x);
        out.pool.push_back({std::move(x), v});
    }
    std::stable_sort(out.pool.begin(), out.pool.end(),
                     [](const BoxPoint& a, const BoxPoint& b) { return a.value < b.value; });
    out.x = out.pool.front().x;
    out.value = out.pool.front().value;
    // The exact value can never be below a valid bound; tiny inversions are
    // solver round-off.
    out.bound = std::min(out.bound, out.value);
    return out;
}

}  // namespace mfpb
