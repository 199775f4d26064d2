#pragma once

#include <optional>
#include <vector>

#include "mfpb/accp.hpp"
#include "mfpb/bounds.hpp"
#include "mfpb/ecp.hpp"
#include "mfpb/market.hpp"

namespace mfpb {

struct DetectOptions {
    EcpOptions ecp;    // used for orthant instances
    AccpOptions accp;  // used for box instances
};

struct DetectResult {
    bool arbitrage_free = true;
    // Costs strictly less than zero and pays at least zero everywhere.
    std::optional<Portfolio> strategy;
    double strategy_price = 0.0;
    BoundsResult bounds;
};

// Superhedges the zero payoff starting from the zero portfolio on both sides.
// A price bound below zero is a certified arbitrage.
DetectResult detect(const MarketInstance& m, const DetectOptions& opts = {});

// Single-asset call and put quotes sharing one strike grid.
struct OptionChain {
    std::vector<double> strikes;
    std::vector<double> call_bid, call_ask;
    std::vector<double> put_bid, put_ask;
    double xbar = 0.0;  // 0: twice the largest strike

    int size() const { return static_cast<int>(strikes.size()); }
    // Fills xbar and throws InvalidArgument on bad shapes or orderings.
    void validate();
};

struct RepairResult {
    OptionChain adjusted;
    // Amounts subtracted from bids (minus) and added to asks (plus).
    std::vector<double> call_minus, call_plus, put_minus, put_plus;
    double total = 0.0;
    // Pricing measure on {0, strikes..., xbar} that prices every adjusted
    // quote inside its band.
    std::vector<double> support;
    std::vector<double> mass;
    double min_mass = 0.0;
    int adjusted_quotes = 0;
    double max_change = 0.0;
};

// Smallest total widening of the quotes, in l1, that makes them consistent
// with a measure charging every strike, 0 and xbar with mass at least eta.
RepairResult repair_chain(const OptionChain& chain, double eta = 1e-6);

struct FilterResult {
    OptionChain chain;
    std::vector<double> dropped;  // strikes removed
    double forward = 0.0;         // implied from put-call parity
};

// Drops strikes whose call or put mid breaks the intrinsic bounds implied by
// the parity forward by more than `threshold`.
FilterResult filter_outliers(const OptionChain& chain, double threshold);

// Box instance on [0, xbar] with calls then puts.
MarketInstance chain_to_instance(const OptionChain& chain);

// Appends the chain's calls and puts on `asset` to a multi-asset instance.
void append_chain(MarketInstance& m, const OptionChain& chain, int asset);

}  // namespace mfpb
