#include "mfpb/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfpb/error.hpp"
#include "mfpb/lp.hpp"

namespace mfpb {

namespace {

std::string strike_label(double k) {
    std::ostringstream os;
    os << k;
    return os.str();
}

}  // namespace

DetectResult detect(const MarketInstance& market, const DetectOptions& opts) {
    MarketInstance m = market;
    m.validate();
    const int n = m.instrument_count();
    const auto zero = CpwaFunction::zero(m.dimension);

    DetectResult out;
    if (m.domain == DomainKind::Orthant) {
        EcpOptions o = opts.ecp;
        o.lower_phi = 0.0;
        out.bounds = solve_ecp(m, zero, o);
    } else {
        AccpOptions o = opts.accp;
        o.lower_phi = 0.0;
        o.initial_hedge = Portfolio{0.0, std::vector<double>(n, 0.0)};
        out.bounds = std::move(solve_accp(m, zero, o).bounds);
    }
    if (!out.bounds.arbitrage()) return out;

    Portfolio p{out.bounds.cash, out.bounds.units};
    const double price = p.cash + price_pi(p.units, m);
    std::vector<double> coeffs(p.units);
    std::vector<CpwaFunction> fns(m.payoffs);
    coeffs.push_back(1.0);
    fns.push_back(CpwaFunction::affine(std::vector<double>(m.dimension, 0.0), p.cash));
    const auto mn = minimize_over_domain(linear_combination(coeffs, fns), m, out.bounds.box);
    double scale = 1.0 + std::abs(p.cash);
    for (double y : p.units) scale += std::abs(y);
    if (!mn.bounded || mn.bound < -1e-7 * scale || !(price < 0.0))
        throw NumericalError("detect: arbitrage strategy failed the domination check (min payoff " +
                             std::to_string(mn.bound) + ", price " + std::to_string(price) + ")");
    out.arbitrage_free = false;
    out.strategy = std::move(p);
    out.strategy_price = price;
    return out;
}

void OptionChain::validate() {
    const std::size_t m = strikes.size();
    if (m == 0) throw InvalidArgument("chain: no strikes");
    if (call_bid.size() != m || call_ask.size() != m || put_bid.size() != m || put_ask.size() != m)
        throw InvalidArgument("chain: quote vectors must match the strikes");
    for (std::size_t j = 0; j < m; ++j) {
        if (!(strikes[j] > 0) || (j > 0 && !(strikes[j] > strikes[j - 1])))
            throw InvalidArgument("chain: strikes must be positive and strictly increasing");
        if (!(call_bid[j] <= call_ask[j]) || !(put_bid[j] <= put_ask[j]))
            throw InvalidArgument("chain: bid above ask at strike " + strike_label(strikes[j]));
    }
    if (xbar == 0.0) xbar = 2.0 * strikes.back();
    if (!(xbar > strikes.back())) throw InvalidArgument("chain: xbar must exceed the largest strike");
}

RepairResult repair_chain(const OptionChain& input, double eta) {
    OptionChain chain = input;
    chain.validate();
    const int m = chain.size();
    if (!(eta > 0)) throw InvalidArgument("repair: eta must be positive");
    if (eta * (m + 2) > 1.0) throw InvalidArgument("repair: eta too large for the number of support points");

    RepairResult out;
    out.support.push_back(0.0);
    out.support.insert(out.support.end(), chain.strikes.begin(), chain.strikes.end());
    out.support.push_back(chain.xbar);
    const int np = m + 2;

    // Variables: p_0..p_{m+1}, then (call-, call+, put-, put+) per strike.
    lp::LinearProgram prog;
    for (int i = 0; i < np; ++i) prog.add_variable(0.0, eta, 1.0);
    for (int j = 0; j < 4 * m; ++j) prog.add_variable(1.0, 0.0, lp::kInf);
    lp::Row total{{}, lp::Relation::Equal, 1.0};
    for (int i = 0; i < np; ++i) total.coeffs.push_back({i, 1.0});
    prog.add_row(std::move(total));

    auto call_at = [&](int j, double x) { return std::max(x - chain.strikes[j], 0.0); };
    auto put_at = [&](int j, double x) { return std::max(chain.strikes[j] - x, 0.0); };
    for (int j = 0; j < m; ++j) {
        const int v = np + 4 * j;
        lp::Row c_lo{{}, lp::Relation::GreaterEqual, chain.call_bid[j]};
        lp::Row c_hi{{}, lp::Relation::LessEqual, chain.call_ask[j]};
        lp::Row p_lo{{}, lp::Relation::GreaterEqual, chain.put_bid[j]};
        lp::Row p_hi{{}, lp::Relation::LessEqual, chain.put_ask[j]};
        for (int i = 0; i < np; ++i) {
            if (const double g = call_at(j, out.support[i]); g != 0.0) {
                c_lo.coeffs.push_back({i, g});
                c_hi.coeffs.push_back({i, g});
            }
            if (const double g = put_at(j, out.support[i]); g != 0.0) {
                p_lo.coeffs.push_back({i, g});
                p_hi.coeffs.push_back({i, g});
            }
        }
        c_lo.coeffs.push_back({v, 1.0});
        c_hi.coeffs.push_back({v + 1, -1.0});
        p_lo.coeffs.push_back({v + 2, 1.0});
        p_hi.coeffs.push_back({v + 3, -1.0});
        prog.add_row(std::move(c_lo));
        prog.add_row(std::move(c_hi));
        prog.add_row(std::move(p_lo));
        prog.add_row(std::move(p_hi));
    }
    const auto sol = lp::solve(prog);
    if (sol.status != lp::Status::Optimal)
        throw InvalidArgument("repair: LP " + std::string(lp::to_string(sol.status)) + "; eta too large?");

    // Given the measure, the optimal widening is the distance of each model
    // price from its band.  Recomputing it from p keeps the certificate exact.
    out.mass.assign(sol.x.begin(), sol.x.begin() + np);
    double mass_sum = 0.0;
    for (double& p : out.mass) {
        p = std::max(p, eta);
        mass_sum += p;
    }
    for (double& p : out.mass) p /= mass_sum;
    out.min_mass = *std::min_element(out.mass.begin(), out.mass.end());

    constexpr double kNegligible = 1e-10;
    auto widen = [&](double gap) { return gap > kNegligible ? gap : 0.0; };
    out.adjusted = chain;
    out.call_minus.resize(m);
    out.call_plus.resize(m);
    out.put_minus.resize(m);
    out.put_plus.resize(m);
    for (int j = 0; j < m; ++j) {
        double c = 0.0, p = 0.0;
        for (int i = 0; i < np; ++i) {
            c += out.mass[i] * call_at(j, out.support[i]);
            p += out.mass[i] * put_at(j, out.support[i]);
        }
        out.call_minus[j] = widen(chain.call_bid[j] - c);
        out.call_plus[j] = widen(c - chain.call_ask[j]);
        out.put_minus[j] = widen(chain.put_bid[j] - p);
        out.put_plus[j] = widen(p - chain.put_ask[j]);
        out.adjusted.call_bid[j] -= out.call_minus[j];
        out.adjusted.call_ask[j] += out.call_plus[j];
        out.adjusted.put_bid[j] -= out.put_minus[j];
        out.adjusted.put_ask[j] += out.put_plus[j];
        for (double v : {out.call_minus[j], out.call_plus[j], out.put_minus[j], out.put_plus[j]}) {
            out.total += v;
            if (v > 0) ++out.adjusted_quotes;
            out.max_change = std::max(out.max_change, v);
        }
    }
    return out;
}

FilterResult filter_outliers(const OptionChain& input, double threshold) {
    OptionChain chain = input;
    chain.validate();
    const int m = chain.size();
    std::vector<double> implied(m);
    for (int j = 0; j < m; ++j)
        implied[j] = 0.5 * (chain.call_bid[j] + chain.call_ask[j]) - 0.5 * (chain.put_bid[j] + chain.put_ask[j]) +
                     chain.strikes[j];
    std::vector<double> sorted = implied;
    std::nth_element(sorted.begin(), sorted.begin() + m / 2, sorted.end());
    FilterResult out;
    out.forward = sorted[m / 2];
    const double s = out.forward;
    OptionChain& kept = out.chain;
    kept.xbar = chain.xbar;
    for (int j = 0; j < m; ++j) {
        const double k = chain.strikes[j];
        const double call_mid = 0.5 * (chain.call_bid[j] + chain.call_ask[j]);
        const double put_mid = 0.5 * (chain.put_bid[j] + chain.put_ask[j]);
        const double violation = std::max({std::max(s - k, 0.0) - call_mid, call_mid - s,
                                           std::max(k - s, 0.0) - put_mid, put_mid - k});
        if (violation > threshold) {
            out.dropped.push_back(k);
            continue;
        }
        kept.strikes.push_back(k);
        kept.call_bid.push_back(chain.call_bid[j]);
        kept.call_ask.push_back(chain.call_ask[j]);
        kept.put_bid.push_back(chain.put_bid[j]);
        kept.put_ask.push_back(chain.put_ask[j]);
    }
    return out;
}

void append_chain(MarketInstance& m, const OptionChain& input, int asset) {
    OptionChain chain = input;
    chain.validate();
    if (asset < 0 || asset >= m.dimension) throw InvalidArgument("chain: asset index out of range");
    for (std::size_t j = m.names.size(); j < m.payoffs.size(); ++j) m.names.push_back("g" + std::to_string(j + 1));
    const std::string tag = "x" + std::to_string(asset + 1);
    for (int j = 0; j < chain.size(); ++j) {
        m.payoffs.push_back(payoff::call(m.dimension, asset, chain.strikes[j]));
        m.bid.push_back(chain.call_bid[j]);
        m.ask.push_back(chain.call_ask[j]);
        m.names.push_back("call_" + tag + "_" + strike_label(chain.strikes[j]));
    }
    for (int j = 0; j < chain.size(); ++j) {
        m.payoffs.push_back(payoff::put(m.dimension, asset, chain.strikes[j]));
        m.bid.push_back(chain.put_bid[j]);
        m.ask.push_back(chain.put_ask[j]);
        m.names.push_back("put_" + tag + "_" + strike_label(chain.strikes[j]));
    }
}

MarketInstance chain_to_instance(const OptionChain& input) {
    OptionChain chain = input;
    chain.validate();
    MarketInstance m;
    m.dimension = 1;
    m.domain = DomainKind::Box;
    m.upper = {chain.xbar};
    append_chain(m, chain, 0);
    m.validate();
    return m;
}

}  // namespace mfpb
