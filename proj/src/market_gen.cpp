#include "mfpb/market_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mfpb/error.hpp"

namespace mfpb::gen {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

const boost::math::normal kStdNormal;

double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double clamp_unit(double u) { return std::clamp(u, 1e-300, 1.0 - 1e-16); }

// Single-piece affine term equal to one coordinate.
bool is_unit_slope(const AffinePiece& p, int& index, double sign) {
    index = -1;
    for (std::size_t c = 0; c < p.slope.size(); ++c) {
        if (p.slope[c] == 0.0) continue;
        if (p.slope[c] != sign || index >= 0) return false;
        index = static_cast<int>(c);
    }
    return index >= 0;
}

bool is_zero_piece(const AffinePiece& p) {
    return p.offset == 0.0 && std::all_of(p.slope.begin(), p.slope.end(), [](double v) { return v == 0.0; });
}

std::vector<int> range(int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i < hi; ++i) v.push_back(i);
    return v;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix(seed ^ splitmix(stream + kGolden))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const { return splitmix(key_ + counter * kGolden); }

double CounterRng::uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const { return boost::math::quantile(kStdNormal, uniform(counter)); }

double truncated_lognormal_cdf(double x, double mu, double sigma2, double upper) {
    if (x <= 0.0) return 0.0;
    if (x >= upper) return 1.0;
    const double s = std::sqrt(sigma2);
    return phi((std::log(x) - mu) / s) / phi((std::log(upper) - mu) / s);
}

double truncated_lognormal_quantile(double u, double mu, double sigma2, double upper) {
    const double s = std::sqrt(sigma2);
    const double top = phi((std::log(upper) - mu) / s);
    const double z = boost::math::quantile(kStdNormal, clamp_unit(u * top));
    return std::min(std::exp(mu + s * z), upper);
}

double truncated_lognormal_mean(double mu, double sigma2, double upper) {
    const double s = std::sqrt(sigma2);
    const double b = (std::log(upper) - mu) / s;
    return std::exp(mu + 0.5 * sigma2) * phi(b - s) / phi(b);
}

// E[X 1{X <= t}] = exp(mu + s^2/2) Phi((ln t - mu - s^2) / s) for a plain
// lognormal; truncation divides by Phi(b).
double truncated_lognormal_call(double mu, double sigma2, double upper, double strike) {
    if (strike <= 0.0) return truncated_lognormal_mean(mu, sigma2, upper) - strike;
    if (strike >= upper) return 0.0;
    const double s = std::sqrt(sigma2);
    const double b = (std::log(upper) - mu) / s;
    const double a = (std::log(strike) - mu) / s;
    const double num = std::exp(mu + 0.5 * sigma2) * (phi(b - s) - phi(a - s)) - strike * (phi(b) - phi(a));
    return std::max(num / phi(b), 0.0);
}

double truncated_lognormal_put(double mu, double sigma2, double upper, double strike) {
    if (strike <= 0.0) return 0.0;
    if (strike >= upper) return strike - truncated_lognormal_mean(mu, sigma2, upper);
    const double s = std::sqrt(sigma2);
    const double b = (std::log(upper) - mu) / s;
    const double a = (std::log(strike) - mu) / s;
    const double num = strike * phi(a) - std::exp(mu + 0.5 * sigma2) * phi(a - s);
    return std::max(num / phi(b), 0.0);
}

Eigen::MatrixXd CopulaModel::correlation() const {
    return loadings * factor_var.asDiagonal() * loadings.transpose() + Eigen::MatrixXd(idio.asDiagonal());
}

void MarketModel::validate() const {
    const int d = dimension();
    if (d < 1) throw InvalidArgument("model: no assets");
    if (static_cast<int>(marginal.sigma2.size()) != d || static_cast<int>(marginal.upper.size()) != d)
        throw InvalidArgument("model: marginal parameter lengths differ");
    for (int i = 0; i < d; ++i) {
        if (!(marginal.sigma2[i] > 0)) throw InvalidArgument("model: sigma2 must be positive");
        if (!(marginal.upper[i] > 0)) throw InvalidArgument("model: truncation bound must be positive");
        if (!std::isfinite(marginal.mu[i])) throw InvalidArgument("model: mu must be finite");
    }
    const auto& c = copula;
    if (c.loadings.rows() != d || c.idio.size() != d || c.factor_var.size() != c.loadings.cols())
        throw InvalidArgument("model: copula shapes do not match the dimension");
    if ((c.factor_var.array() < 0).any() || (c.idio.array() < 0).any())
        throw InvalidArgument("model: factor and idiosyncratic variances must be nonnegative");
    if (!(c.nu > 0)) throw InvalidArgument("model: degrees of freedom must be positive");
    const Eigen::MatrixXd corr = c.correlation();
    for (int i = 0; i < d; ++i)
        if (std::abs(corr(i, i) - 1.0) > 1e-9) throw InvalidArgument("model: correlation diagonal must be 1");
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-10)
        throw InvalidArgument("model: correlation is not positive definite");
}

SampleMatrix sample_joint(const MarketModel& model, long n, std::uint64_t seed, std::uint64_t stream) {
    model.validate();
    if (n < 1) throw InvalidArgument("sample: need at least one sample");
    const int d = model.dimension();
    const auto& cop = model.copula;
    const int k = static_cast<int>(cop.loadings.cols());
    const Eigen::MatrixXd scaled = cop.loadings * cop.factor_var.cwiseSqrt().asDiagonal();
    const Eigen::VectorXd idio_sd = cop.idio.cwiseSqrt();
    const bool gaussian = std::isinf(cop.nu);
    const boost::math::chi_squared chi2(gaussian ? 1.0 : cop.nu);
    const boost::math::students_t tdist(gaussian ? 1.0 : cop.nu);

    const CounterRng rng(seed, stream);
    const std::uint64_t per_row = static_cast<std::uint64_t>(k + d + 1);
    SampleMatrix out(n, d);
    Eigen::VectorXd factors(k), z(d);
    for (long i = 0; i < n; ++i) {
        const std::uint64_t base = static_cast<std::uint64_t>(i) * per_row;
        for (int f = 0; f < k; ++f) factors[f] = rng.normal(base + f);
        z = scaled * factors;
        for (int c = 0; c < d; ++c) z[c] += idio_sd[c] * rng.normal(base + k + c);
        const double w = gaussian ? 1.0 : boost::math::quantile(chi2, rng.uniform(base + k + d)) / cop.nu;
        const double root = std::sqrt(w);
        for (int c = 0; c < d; ++c) {
            const double t = z[c] / root;
            const double u = gaussian ? phi(t) : boost::math::cdf(tdist, t);
            out(i, c) = truncated_lognormal_quantile(u, model.marginal.mu[c], model.marginal.sigma2[c],
                                                     model.marginal.upper[c]);
        }
    }
    return out;
}

PriceEstimate price_on_samples(const SampleMatrix& samples, const CpwaFunction& payoff) {
    const long n = samples.rows();
    if (n < 1) throw InvalidArgument("price: empty sample");
    const int d = static_cast<int>(samples.cols());
    if (payoff.dimension() != d) throw InvalidArgument("price: payoff dimension mismatch");
    // Accumulate deviations from the first value: a constant payoff comes out
    // exact and the variance is computed without cancellation.
    const double first = payoff(std::span<const double>(samples.row(0).data(), d));
    double sum = 0.0, sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double dev = payoff(std::span<const double>(samples.row(i).data(), d)) - first;
        sum += dev;
        sq += dev * dev;
    }
    PriceEstimate est;
    est.price = first + sum / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(sq - sum * sum / static_cast<double>(n), 0.0) / static_cast<double>(n - 1);
        est.std_error = std::sqrt(var / static_cast<double>(n));
    }
    return est;
}

std::optional<VanillaShape> vanilla_shape(const CpwaFunction& payoff) {
    if (payoff.terms().size() != 1) return std::nullopt;
    const auto& t = payoff.terms().front();
    if (t.sign != 1) return std::nullopt;
    int index = -1;
    if (t.pieces.size() == 1) {
        const auto& p = t.pieces.front();
        if (p.offset == 0.0 && is_unit_slope(p, index, 1.0)) return VanillaShape{index, 0.0, false};
        return std::nullopt;
    }
    if (t.pieces.size() != 2) return std::nullopt;
    for (int z = 0; z < 2; ++z) {
        if (!is_zero_piece(t.pieces[z])) continue;
        const auto& p = t.pieces[1 - z];
        if (is_unit_slope(p, index, 1.0) && p.offset <= 0.0) return VanillaShape{index, -p.offset, false};
        if (is_unit_slope(p, index, -1.0) && p.offset >= 0.0) return VanillaShape{index, p.offset, true};
    }
    return std::nullopt;
}

double closed_form_price(const MarginalModel& m, const VanillaShape& v) {
    const int i = v.asset;
    return v.put ? truncated_lognormal_put(m.mu[i], m.sigma2[i], m.upper[i], v.strike)
                 : truncated_lognormal_call(m.mu[i], m.sigma2[i], m.upper[i], v.strike);
}

PriceEstimate price_payoff(const MarketModel& model, const CpwaFunction& payoff, long n, std::uint64_t seed) {
    auto est = price_on_samples(sample_joint(model, n, seed), payoff);
    if (const auto v = vanilla_shape(payoff)) est.closed_form = closed_form_price(model.marginal, *v);
    return est;
}

MarketInstance build_market(const ModelFamily& family, const std::vector<Instrument>& instruments) {
    if (family.models.empty()) throw InvalidArgument("market: need at least one model");
    if (instruments.empty()) throw InvalidArgument("market: no instruments");
    const int d = family.models.front().dimension();
    for (const auto& m : family.models) {
        m.validate();
        if (m.dimension() != d) throw InvalidArgument("market: models disagree on the dimension");
        if (m.marginal.upper != family.models.front().marginal.upper)
            throw InvalidArgument("market: models disagree on the truncation box");
    }
    MarketInstance out;
    out.dimension = d;
    out.domain = DomainKind::Box;
    out.upper = family.models.front().marginal.upper;
    const std::size_t n = instruments.size();
    out.bid.assign(n, std::numeric_limits<double>::infinity());
    out.ask.assign(n, -std::numeric_limits<double>::infinity());
    for (const auto& ins : instruments) {
        if (ins.payoff.dimension() != d) throw InvalidArgument("market: instrument " + ins.name + " has the wrong dimension");
        out.names.push_back(ins.name);
        out.payoffs.push_back(ins.payoff);
    }
    // Common random numbers: every model maps the same draws, so quote
    // spreads come from the parameters rather than from sampling noise.
    for (const auto& model : family.models) {
        const auto samples = sample_joint(model, family.mc_samples, family.seed);
        for (std::size_t j = 0; j < n; ++j) {
            const double p = price_on_samples(samples, instruments[j].payoff).price;
            out.bid[j] = std::min(out.bid[j], p);
            out.ask[j] = std::max(out.ask[j], p);
        }
    }
    out.validate();
    return out;
}

std::vector<Instrument> select(const std::vector<Instrument>& all, const std::vector<std::string>& categories) {
    std::vector<Instrument> out;
    for (const auto& ins : all)
        if (std::find(categories.begin(), categories.end(), ins.category) != categories.end()) out.push_back(ins);
    return out;
}

ModelFamily exp1_family(std::uint64_t seed, long mc_samples) {
    const std::vector<double> mu{0.5, 1.0, 1.0, 0.5, 0.5};
    const std::vector<double> s2a{0.2, 0.4, 0.2, 0.4, 0.2};
    const std::vector<double> s2b{0.21, 0.42, 0.21, 0.42, 0.21};
    const std::vector<double> upper(5, 100.0);

    // Two-factor loadings; not published, chosen so every pair is positively
    // correlated and the idiosyncratic parts stay well away from zero.
    CopulaModel base;
    base.loadings.resize(5, 2);
    base.loadings << 0.7, 0.2,
                     0.6, 0.4,
                     0.5, 0.5,
                     0.4, 0.6,
                     0.2, 0.7;
    base.factor_var = Eigen::VectorXd::Ones(2);
    base.idio = (1.0 - (base.loadings * base.loadings.transpose()).diagonal().array()).matrix();

    ModelFamily fam;
    fam.seed = seed;
    fam.mc_samples = mc_samples;
    for (const auto* s2 : {&s2a, &s2b})
        for (double nu : {3.0, 4.0}) {
            MarketModel m{{mu, *s2, upper}, base};
            m.copula.nu = nu;
            fam.models.push_back(std::move(m));
        }
    return fam;
}

std::vector<Instrument> exp1_instruments() {
    constexpr int d = 5;
    std::vector<Instrument> out;
    for (int i = 0; i < d; ++i) out.push_back({"x" + std::to_string(i + 1), "asset", payoff::asset(d, i)});
    for (int i = 0; i < d; ++i)
        for (int k = 1; k <= 10; ++k)
            out.push_back({"call_x" + std::to_string(i + 1) + "_" + std::to_string(k), "vanilla", payoff::call(d, i, k)});

    const std::vector<std::vector<int>> baskets = {
        {0, 1, 2, 3, 4}, {0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4},
        {0, 1, 2},       {1, 2, 3},    {2, 3, 4},    {1, 2},       {1, 3},       {2, 3}};
    for (std::size_t b = 0; b < baskets.size(); ++b) {
        std::vector<double> w(d, 0.0);
        for (int i : baskets[b]) w[i] = 1.0 / static_cast<double>(baskets[b].size());
        for (int k = 1; k <= 10; ++k)
            out.push_back({"basket" + std::to_string(b + 1) + "_" + std::to_string(k), "basket",
                           payoff::basket_call(w, k)});
    }

    const std::vector<std::pair<int, int>> spreads = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {1, 4},
                                                      {2, 3}, {2, 4}, {3, 4}, {1, 0}, {2, 0}, {3, 0},
                                                      {2, 1}, {3, 1}, {4, 1}, {3, 2}, {4, 2}, {4, 3}};
    for (const auto& [a, b] : spreads)
        for (int k = -5; k <= 5; ++k) {
            const int lng[] = {a};
            const int sht[] = {b};
            out.push_back({"spread_x" + std::to_string(a + 1) + "_x" + std::to_string(b + 1) + "_" + std::to_string(k),
                           "spread", payoff::spread_call(d, lng, sht, k)});
        }

    const std::vector<std::vector<int>> groups = {{0, 1, 2, 3, 4}, {0, 1, 2, 3}, {1, 2, 3, 4},
                                                  {1, 2},          {1, 3},       {2, 3}};
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (int k = 0; k <= 10; ++k)
            out.push_back({"max" + std::to_string(g + 1) + "_" + std::to_string(k), "rainbow",
                           payoff::call_on_max(d, groups[g], k)});
    return out;
}

ModelFamily exp2_family(std::uint64_t seed, int d, long mc_samples) {
    if (d < 2) throw InvalidArgument("exp2: need at least two assets");
    const CounterRng rng(seed, 0xE2);
    std::uint64_t ctr = 0;
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(ctr++); };

    MarginalModel g1, g2;
    g1.upper = g2.upper = std::vector<double>(d, 100.0);
    for (int i = 0; i < d; ++i) {
        g1.mu.push_back(draw(-0.3, 0.1));
        g1.sigma2.push_back(draw(0.2, 0.8));
    }
    g2.mu = g1.mu;
    for (int i = 0; i < d; ++i) g2.sigma2.push_back(g1.sigma2[i] + draw(0.0, 0.1));

    // Three-factor loadings in [0.1, 0.5] keep the idiosyncratic variance at
    // least 0.25; the second copula perturbs them slightly.
    auto copula = [&](const Eigen::MatrixXd& l, double nu) {
        CopulaModel c;
        c.loadings = l;
        c.factor_var = Eigen::VectorXd::Ones(3);
        c.idio = (1.0 - (l * l.transpose()).diagonal().array()).matrix();
        c.nu = nu;
        return c;
    };
    Eigen::MatrixXd l1(d, 3), l2(d, 3);
    for (int i = 0; i < d; ++i)
        for (int f = 0; f < 3; ++f) {
            l1(i, f) = draw(0.1, 0.5);
            l2(i, f) = std::clamp(l1(i, f) + draw(-0.05, 0.05), 0.0, 0.55);
        }
    const CopulaModel c1 = copula(l1, 3.0), c2 = copula(l2, 20.0);

    ModelFamily fam;
    fam.seed = seed;
    fam.mc_samples = mc_samples;
    for (const auto* g : {&g1, &g2})
        for (const auto* c : {&c1, &c2}) fam.models.push_back({*g, *c});
    return fam;
}

std::vector<Instrument> exp2_instruments(std::uint64_t seed, int d) {
    if (d < 2) throw InvalidArgument("exp2: need at least two assets");
    const CounterRng rng(seed, 0xE3);
    std::uint64_t ctr = 0;
    auto pick = [&](int n) { return static_cast<int>(rng.bits(ctr++) % static_cast<std::uint64_t>(n)); };

    std::vector<Instrument> out;
    for (int i = 0; i < d; ++i) out.push_back({"x" + std::to_string(i + 1), "asset", payoff::asset(d, i)});
    for (int i = 0; i < d; ++i)
        for (double k : {0.5, 1.0, 1.5})
            out.push_back({"call_x" + std::to_string(i + 1) + "_" + fmt(k), "vanilla", payoff::call(d, i, k)});

    const int half = d / 2;
    const std::vector<std::vector<int>> baskets = {range(0, d), range(0, half), range(half, d)};
    for (std::size_t b = 0; b < baskets.size(); ++b) {
        std::vector<double> w(d, 0.0);
        for (int i : baskets[b]) w[i] = 1.0 / static_cast<double>(baskets[b].size());
        out.push_back({"basket" + std::to_string(b + 1) + "_1", "basket", payoff::basket_call(w, 1.0)});
    }

    const int spread_count = std::min(147 * d / 60 + (d < 60 ? 1 : 0), d * (d - 1));
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(used.size()) < spread_count) {
        const int a = pick(d), b = pick(d);
        if (a == b || !used.insert({a, b}).second) continue;
        const int lng[] = {a};
        const int sht[] = {b};
        out.push_back({"spread_x" + std::to_string(a + 1) + "_x" + std::to_string(b + 1) + "_0", "spread",
                       payoff::spread_call(d, lng, sht, 0.0)});
    }

    const int pool = std::min(50, d);
    const int group = std::min(10, pool);
    for (int r = 0; r < 10; ++r) {
        std::set<int> g;
        while (static_cast<int>(g.size()) < group) g.insert(pick(pool));
        const std::vector<int> assets(g.begin(), g.end());
        const double k = 0.1 * (r % 5 + 1);
        out.push_back({"min" + std::to_string(r + 1) + "_" + fmt(k), "rainbow", payoff::call_on_min(d, assets, k)});
    }
    return out;
}

}  // namespace mfpb::gen
