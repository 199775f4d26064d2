#include "mfpb/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mfpb/error.hpp"
#include "mfpb/milp_encoding.hpp"

namespace mfpb {

namespace {

constexpr double kRadialTol = 1e-8;
constexpr double kDominanceTol = 1e-7;

std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ')';
    return os.str();
}

CpwaFunction portfolio_plus(const Portfolio& p, const MarketInstance& m, const CpwaFunction& extra) {
    std::vector<double> coeffs(p.units.begin(), p.units.end());
    std::vector<CpwaFunction> fns(m.payoffs.begin(), m.payoffs.end());
    coeffs.push_back(1.0);
    fns.push_back(extra);
    coeffs.push_back(1.0);
    fns.push_back(CpwaFunction::affine(std::vector<double>(m.dimension, 0.0), p.cash));
    return linear_combination(coeffs, fns);
}

}  // namespace

void MarketInstance::validate() {
    if (dimension < 1) throw InvalidArgument("market: dimension must be positive");
    const std::size_t n = payoffs.size();
    if (bid.size() != n || ask.size() != n)
        throw InvalidArgument("market: bid and ask must have one entry per instrument");
    for (std::size_t j = 0; j < n; ++j) {
        if (payoffs[j].dimension() != dimension)
            throw InvalidArgument("market: instrument " + std::to_string(j) + " has the wrong dimension");
        if (!std::isfinite(bid[j]) || !std::isfinite(ask[j]))
            throw InvalidArgument("market: non-finite quote for instrument " + std::to_string(j));
        if (bid[j] > ask[j])
            throw InvalidArgument("market: bid above ask for instrument " + std::to_string(j));
    }
    if (domain == DomainKind::Box) {
        if (static_cast<int>(upper.size()) != dimension)
            throw InvalidArgument("market: box corner must have one entry per asset");
        for (double u : upper)
            if (!(u > 0.0) || !std::isfinite(u)) throw InvalidArgument("market: box corner must be positive");
    } else if (!upper.empty()) {
        throw InvalidArgument("market: orthant domain takes no box corner");
    }
    if (names.size() > n) throw InvalidArgument("market: more names than instruments");
    for (std::size_t j = names.size(); j < n; ++j) names.push_back("g" + std::to_string(j + 1));
}

std::vector<double> MarketInstance::payoff_values(std::span<const double> x) const {
    std::vector<double> v(payoffs.size());
    double scale = 1.0;
    for (double c : x) scale = std::max(scale, std::abs(c));
    // Kink evaluations leave round-off like 1e-15; exact zeros keep cut rows well scaled.
    const double floor = 1e-12 * scale;
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = payoffs[j](x);
        if (std::abs(v[j]) <= floor) v[j] = 0.0;
    }
    return v;
}

double price_pi(std::span<const double> units, const MarketInstance& m) {
    if (static_cast<int>(units.size()) != m.instrument_count())
        throw InvalidArgument("price: portfolio length does not match the instrument count");
    double p = 0.0;
    for (std::size_t j = 0; j < units.size(); ++j) p += units[j] > 0 ? units[j] * m.ask[j] : units[j] * m.bid[j];
    return p;
}

double portfolio_value(const Portfolio& p, const MarketInstance& m, std::span<const double> x) {
    double v = p.cash;
    for (std::size_t j = 0; j < p.units.size(); ++j)
        if (p.units[j] != 0.0) v += p.units[j] * m.payoffs[j](x);
    return v;
}

std::vector<double> default_orthant_box(const MarketInstance& m, const CpwaFunction& target) {
    double scale = std::max(1.0, target.max_abs_offset());
    for (const auto& g : m.payoffs) scale = std::max(scale, g.max_abs_offset());
    return std::vector<double>(m.dimension, 10.0 * scale);
}

bool bounded_below_on_orthant(const CpwaFunction& h) {
    const auto radial = h.radial();
    const int d = radial.dimension();
    EncodingOptions eo;
    eo.prune_threshold = 0.0;
    const Encoding enc(radial, std::vector<double>(d, 1.0), eo);
    auto prog = enc.program();
    lp::Row simplex{{}, lp::Relation::Equal, 1.0};
    for (int j : enc.x_indices()) simplex.coeffs.push_back({j, 1.0});
    prog.base.add_row(std::move(simplex));
    milp::Options mo;
    mo.heuristic = [&enc](std::span<const double> s) -> std::optional<std::vector<double>> {
        auto z = enc.decode_x(s);
        const double sum = std::accumulate(z.begin(), z.end(), 0.0);
        if (sum <= 0.0) return std::nullopt;
        for (double& v : z) v /= sum;
        return enc.complete(z);
    };
    const auto res = milp::solve(prog, mo);
    if (res.status == milp::Status::Infeasible) throw NumericalError("simplex minimization reported infeasible");
    return res.best_bound + enc.pruned_lower_bound() >= -kRadialTol;
}

DomainMinimum minimize_over_domain(const CpwaFunction& h, const MarketInstance& m, std::span<const double> box) {
    DomainMinimum out;
    std::vector<double> upper;
    if (m.domain == DomainKind::Box) {
        upper = m.upper;
    } else {
        if (!bounded_below_on_orthant(h)) {
            out.bounded = false;
            return out;
        }
        if (box.empty()) throw InvalidArgument("orthant minimization needs a bounding box");
        upper.assign(box.begin(), box.end());
    }
    const auto r = minimize_over_box(h, upper);
    out.value = r.value;
    out.bound = r.bound;
    out.x = r.x;
    return out;
}

LowerPhi compute_lower_phi(const MarketInstance& m, const CpwaFunction& target,
                           const std::optional<Portfolio>& portfolio, std::span<const double> box) {
    const int n = m.instrument_count();
    std::vector<double> fallback_box;
    if (m.domain == DomainKind::Orthant && box.empty()) {
        fallback_box = default_orthant_box(m, target);
        box = fallback_box;
    }
    if (portfolio) {
        if (static_cast<int>(portfolio->units.size()) != n)
            throw InvalidArgument("lower bound portfolio has the wrong length");
        const auto net = portfolio_plus(*portfolio, m, target);
        const auto mn = minimize_over_domain(net, m, box);
        if (!mn.bounded) throw InvalidArgument("lower bound portfolio does not dominate -f: unbounded shortfall");
        if (mn.bound < -kDominanceTol * (1.0 + std::abs(portfolio->cash)))
            throw InvalidArgument("lower bound portfolio does not dominate -f at x = " + format_point(mn.x) +
                                  " (shortfall " + std::to_string(-mn.value) + ")");
        return {-portfolio->cash - price_pi(portfolio->units, m), *portfolio};
    }

    std::vector<std::vector<double>> candidates;
    candidates.emplace_back(n, 0.0);
    for (int j = 0; j < n; ++j) {
        candidates.emplace_back(n, 0.0);
        candidates.back()[j] = 1.0;
    }
    if (n > 1) candidates.emplace_back(n, 1.0);

    std::optional<LowerPhi> best;
    for (auto& units : candidates) {
        Portfolio p{0.0, units};
        const auto mn = minimize_over_domain(portfolio_plus(p, m, target), m, box);
        if (!mn.bounded) continue;
        p.cash = -mn.bound;
        const double value = -p.cash - price_pi(p.units, m);
        if (!best || value > best->value) best = LowerPhi{value, std::move(p)};
    }
    if (!best) throw InvalidArgument("no simple portfolio dominates -f; supply one explicitly");
    return *best;
}

}  // namespace mfpb
