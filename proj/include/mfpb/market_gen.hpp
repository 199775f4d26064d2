#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfpb/cpwa.hpp"
#include "mfpb/market.hpp"

namespace mfpb::gen {

// Stateless generator: the value at (seed, stream, counter) is a fixed
// splitmix64 hash, so any block of draws can be produced independently.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);
    std::uint64_t bits(std::uint64_t counter) const;
    // Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter) const;
    double normal(std::uint64_t counter) const;

private:
    std::uint64_t key_;
};

// Lognormal(mu, sigma2) conditioned on [0, upper].
double truncated_lognormal_cdf(double x, double mu, double sigma2, double upper);
double truncated_lognormal_quantile(double u, double mu, double sigma2, double upper);
double truncated_lognormal_mean(double mu, double sigma2, double upper);
// E[(X - k)^+] and E[(k - X)^+].
double truncated_lognormal_call(double mu, double sigma2, double upper, double strike);
double truncated_lognormal_put(double mu, double sigma2, double upper, double strike);

struct MarginalModel {
    std::vector<double> mu;
    std::vector<double> sigma2;
    std::vector<double> upper;
    int dimension() const { return static_cast<int>(mu.size()); }
};

// t-copula whose correlation has factor structure L D L^T + Psi.  An
// infinite nu gives the Gaussian copula.
struct CopulaModel {
    Eigen::MatrixXd loadings;   // d x k
    Eigen::VectorXd factor_var; // k
    Eigen::VectorXd idio;       // d
    double nu = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd correlation() const;
};

struct MarketModel {
    MarginalModel marginal;
    CopulaModel copula;
    int dimension() const { return marginal.dimension(); }
    // Throws InvalidArgument unless the correlation has unit diagonal and is
    // positive definite, and the marginals are well formed.
    void validate() const;
};

struct ModelFamily {
    std::vector<MarketModel> models;
    std::uint64_t seed = 1;
    long mc_samples = 100000;
};

using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n x d samples; draws depend only on (seed, stream, row), so the first rows
// of a larger sample coincide with a smaller one.
SampleMatrix sample_joint(const MarketModel& model, long n, std::uint64_t seed, std::uint64_t stream = 0);

struct PriceEstimate {
    double price = 0.0;
    double std_error = 0.0;
    // Present for single-asset calls, puts and the assets themselves.
    std::optional<double> closed_form;
};

PriceEstimate price_on_samples(const SampleMatrix& samples, const CpwaFunction& payoff);
PriceEstimate price_payoff(const MarketModel& model, const CpwaFunction& payoff, long n, std::uint64_t seed);

// (asset, strike, is_put) when `payoff` is a vanilla call or put on one asset;
// an asset itself is reported as a call struck at 0.
struct VanillaShape {
    int asset = 0;
    double strike = 0.0;
    bool put = false;
};
std::optional<VanillaShape> vanilla_shape(const CpwaFunction& payoff);
double closed_form_price(const MarginalModel& m, const VanillaShape& v);

struct Instrument {
    std::string name;
    std::string category;  // asset, vanilla, basket, spread, rainbow, ...
    CpwaFunction payoff;
};

// Bid and ask are the smallest and largest Monte Carlo prices across the
// models.  Every model prices all instruments on one sample drawn from the
// same underlying uniforms, so each model's price vector is the expectation
// under a single (empirical) measure.
MarketInstance build_market(const ModelFamily& family, const std::vector<Instrument>& instruments);

// Keeps the instruments whose category is listed.
std::vector<Instrument> select(const std::vector<Instrument>& all, const std::vector<std::string>& categories);

// Five assets on [0, 100]^5, two marginal groups times two t-copulas.
ModelFamily exp1_family(std::uint64_t seed = 1, long mc_samples = 100000);
// The 439 traded instruments of the five-asset study.
std::vector<Instrument> exp1_instruments();

// Randomized high-dimensional family and instrument list (60 assets, 400
// instruments by default).
ModelFamily exp2_family(std::uint64_t seed, int dimension = 60, long mc_samples = 100000);
std::vector<Instrument> exp2_instruments(std::uint64_t seed, int dimension = 60);

}  // namespace mfpb::gen
