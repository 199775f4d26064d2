#pragma once

// Two-asset market on [0, 20]^2 with vanilla chains on both assets and a
// call-on-min / put-on-min pair quoted so that each exotic alone is
// consistent with the vanillas while the pair is not.
//
// Every kink of every payoff involved lies on the integer lattice, so the
// grid dual with step 1 is exact and serves as the oracle for the bands.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mfpb/arbitrage.hpp"
#include "support.hpp"

namespace testsupport {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
};

// Exact no-arbitrage band of f on an integer-kinked box instance.
inline Band lattice_band(const mfpb::MarketInstance& m, const mfpb::CpwaFunction& f) {
    return {-grid_dual_oracle(m, f.negated(), 1.0), grid_dual_oracle(m, f, 1.0)};
}

inline void add_quote(mfpb::MarketInstance& m, mfpb::CpwaFunction g, double bid, double ask, std::string name) {
    m.payoffs.push_back(std::move(g));
    m.bid.push_back(bid);
    m.ask.push_back(ask);
    m.names.push_back(std::move(name));
    m.validate();
}

struct ExoticFixture {
    std::vector<mfpb::OptionChain> chains;  // one per asset
    mfpb::MarketInstance vanillas;
    mfpb::CpwaFunction call_on_min;
    mfpb::CpwaFunction put_on_min;
    Band call_quote;
    Band put_quote;
    Band call_band;        // given the vanillas
    Band put_band;         // given the vanillas
    Band put_band_joint;   // given the vanillas and the call quote

    mfpb::MarketInstance with(bool call, bool put) const {
        mfpb::MarketInstance m = vanillas;
        if (call) add_quote(m, call_on_min, call_quote.lo, call_quote.hi, "call_on_min_1");
        if (put) add_quote(m, put_on_min, put_quote.lo, put_quote.hi, "put_on_min_4");
        return m;
    }
};

// Vanilla quotes from an equal-weight atom measure widened by `spread`.
inline std::vector<mfpb::OptionChain> lattice_chains(const std::vector<std::vector<double>>& atoms,
                                                     const std::vector<double>& strikes, double xbar,
                                                     double spread) {
    std::vector<mfpb::OptionChain> chains;
    const int d = static_cast<int>(atoms.front().size());
    for (int a = 0; a < d; ++a) {
        mfpb::OptionChain c;
        c.strikes = strikes;
        c.xbar = xbar;
        for (double k : strikes) {
            double call = 0.0, put = 0.0;
            for (const auto& x : atoms) {
                call += std::max(x[a] - k, 0.0);
                put += std::max(k - x[a], 0.0);
            }
            call /= static_cast<double>(atoms.size());
            put /= static_cast<double>(atoms.size());
            c.call_bid.push_back(std::max(call - spread, 0.0));
            c.call_ask.push_back(call + spread);
            c.put_bid.push_back(std::max(put - spread, 0.0));
            c.put_ask.push_back(put + spread);
        }
        c.validate();
        chains.push_back(std::move(c));
    }
    return chains;
}

inline ExoticFixture exotic_fixture(int strike_count = 10, unsigned seed = 7) {
    constexpr double kUpper = 20.0;
    Rng rng(seed);
    // Positively dependent atoms: a common factor plus noise, clipped to the box.
    std::vector<std::vector<double>> atoms;
    for (int i = 0; i < 40; ++i) {
        const double common = std::exp(uniform(rng, 0.0, 2.2));
        std::vector<double> x(2);
        for (double& v : x) v = std::clamp(common * std::exp(uniform(rng, -0.4, 0.4)), 0.0, kUpper);
        atoms.push_back(std::move(x));
    }
    std::vector<double> strikes;
    for (int k = 1; k <= strike_count; ++k) strikes.push_back(k);

    ExoticFixture fx;
    fx.chains = lattice_chains(atoms, strikes, kUpper, 0.02);
    fx.vanillas.dimension = 2;
    fx.vanillas.domain = mfpb::DomainKind::Box;
    fx.vanillas.upper = {kUpper, kUpper};
    for (int a = 0; a < 2; ++a) mfpb::append_chain(fx.vanillas, fx.chains[a], a);
    fx.vanillas.validate();

    const int both[] = {0, 1};
    fx.call_on_min = mfpb::payoff::call_on_min(2, both, 1.0);
    fx.put_on_min = mfpb::payoff::put_on_min(2, both, 4.0);

    // Call-on-min quoted at the top of its band; that squeezes the put-on-min
    // band from above, leaving room for a put quote that is fine on its own.
    fx.call_band = lattice_band(fx.vanillas, fx.call_on_min);
    fx.call_quote = {fx.call_band.hi - 0.03, fx.call_band.hi - 0.01};
    fx.put_band = lattice_band(fx.vanillas, fx.put_on_min);
    mfpb::MarketInstance joint = fx.vanillas;
    add_quote(joint, fx.call_on_min, fx.call_quote.lo, fx.call_quote.hi, "call_on_min_1");
    fx.put_band_joint = lattice_band(joint, fx.put_on_min);
    fx.put_quote = {fx.put_band_joint.hi + 0.02, fx.put_band_joint.hi + 0.04};
    if (!(fx.put_quote.hi < fx.put_band.hi - 0.01))
        throw std::logic_error("exotic fixture: no room for a jointly inconsistent put quote");
    return fx;
}

}  // namespace testsupport
