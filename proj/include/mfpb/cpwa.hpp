#pragma once

#include <span>
#include <vector>

namespace mfpb {

// x -> <slope, x> + offset
struct AffinePiece {
    std::vector<double> slope;
    double offset = 0.0;

    double operator()(std::span<const double> x) const;
    bool operator==(const AffinePiece&) const = default;
};

// sign * max_i piece_i(x)
struct CpwaTerm {
    int sign = 1;
    std::vector<AffinePiece> pieces;

    double operator()(std::span<const double> x) const;
};

// Finite signed sum of maxima of affine functions on R^d.
class CpwaFunction {
public:
    CpwaFunction() = default;
    CpwaFunction(int dimension, std::vector<CpwaTerm> terms);

    static CpwaFunction zero(int dimension);
    static CpwaFunction affine(std::vector<double> slope, double offset);

    int dimension() const { return dimension_; }
    const std::vector<CpwaTerm>& terms() const { return terms_; }

    double operator()(std::span<const double> x) const;

    // Same function with every offset dropped: the positively homogeneous
    // part that governs growth along rays.
    CpwaFunction radial() const;
    CpwaFunction negated() const;

    double max_abs_offset() const;

private:
    int dimension_ = 0;
    std::vector<CpwaTerm> terms_;
};

// sum_k coeffs[k] * fns[k]; zero coefficients drop their terms.
CpwaFunction linear_combination(std::span<const double> coeffs,
                                std::span<const CpwaFunction> fns);

// Standard payoffs. Asset indices are zero-based.
namespace payoff {

CpwaFunction asset(int dimension, int index);
CpwaFunction call(int dimension, int index, double strike);
CpwaFunction put(int dimension, int index, double strike);
CpwaFunction basket_call(std::vector<double> weights, double strike);
CpwaFunction spread_call(int dimension, std::span<const int> long_assets,
                         std::span<const int> short_assets, double strike);
CpwaFunction call_on_max(int dimension, std::span<const int> assets, double strike);
CpwaFunction call_on_min(int dimension, std::span<const int> assets, double strike);
CpwaFunction put_on_min(int dimension, std::span<const int> assets, double strike);
CpwaFunction best_of_calls(int dimension, std::span<const int> assets,
                           std::span<const double> strikes);

}  // namespace payoff

// One term of  s_y(x) = sum_j y_j g_j(x) - f(x)  written as
// (<y, weight> + constant) * max_i piece_i(x).
struct TemplateTerm {
    std::vector<double> weight;
    double constant = 0.0;
    std::vector<AffinePiece> pieces;
};

// Slack of a static portfolio y against a target payoff, kept symbolic in y
// so it can be instantiated for many portfolios or turned into the radial
// linear system.
class SlackTemplate {
public:
    SlackTemplate(std::span<const CpwaFunction> traded, const CpwaFunction& target);

    int dimension() const { return dimension_; }
    int instrument_count() const { return instruments_; }
    const std::vector<TemplateTerm>& terms() const { return terms_; }

    CpwaFunction instantiate(std::span<const double> y) const;
    double operator()(std::span<const double> y, std::span<const double> x) const;
    SlackTemplate radial() const;

private:
    SlackTemplate() = default;
    int dimension_ = 0;
    int instruments_ = 0;
    std::vector<TemplateTerm> terms_;
};

}  // namespace mfpb
