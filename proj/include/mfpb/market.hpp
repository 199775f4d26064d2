#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfpb/cpwa.hpp"

namespace mfpb {

enum class DomainKind { Orthant, Box };

// Traded payoffs with bid/ask quotes on either the nonnegative orthant or a
// box [0, upper].
struct MarketInstance {
    int dimension = 0;
    DomainKind domain = DomainKind::Box;
    std::vector<double> upper;  // box corner; empty for the orthant
    std::vector<std::string> names;
    std::vector<CpwaFunction> payoffs;
    std::vector<double> bid;
    std::vector<double> ask;

    int instrument_count() const { return static_cast<int>(payoffs.size()); }
    // Throws InvalidArgument on any inconsistency.  Missing names are filled.
    void validate();
    std::vector<double> payoff_values(std::span<const double> x) const;
};

// Cheapest price of a static position: buy at the ask, sell at the bid.
double price_pi(std::span<const double> units, const MarketInstance& m);

struct Portfolio {
    double cash = 0.0;
    std::vector<double> units;
};

// cash + <units, g(x)>
double portfolio_value(const Portfolio& p, const MarketInstance& m, std::span<const double> x);

// Box used in place of the orthant when minimizing: ten times the largest
// offset magnitude among the traded payoffs and the target, at least 1.
std::vector<double> default_orthant_box(const MarketInstance& m, const CpwaFunction& target);

// Lower-boundedness of h on the orthant, decided by minimizing its radial part
// over the unit simplex.
bool bounded_below_on_orthant(const CpwaFunction& h);

struct DomainMinimum {
    bool bounded = true;
    double value = 0.0;  // exact value at x
    double bound = 0.0;  // rigorous lower bound over the (boxed) domain
    std::vector<double> x;
};

// Minimum of h over the instance's domain.  For the orthant, `box` replaces
// the unbounded domain once boundedness is established.
DomainMinimum minimize_over_domain(const CpwaFunction& h, const MarketInstance& m,
                                   std::span<const double> box = {});

struct LowerPhi {
    double value = 0.0;
    Portfolio portfolio;  // dominates -f
};

// Initial lower bound -cash - pi(units) from a portfolio dominating -f.  A
// supplied portfolio is verified; otherwise the zero portfolio, each single
// instrument and the sum of all instruments are tried, with the cash chosen
// as small as possible, and the best bound wins.
LowerPhi compute_lower_phi(const MarketInstance& m, const CpwaFunction& target,
                           const std::optional<Portfolio>& portfolio = std::nullopt,
                           std::span<const double> box = {});

}  // namespace mfpb
