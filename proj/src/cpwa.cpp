#include "mfpb/cpwa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfpb/error.hpp"

namespace mfpb {

namespace {

std::vector<double> unit(int dimension, int index) {
    std::vector<double> e(dimension, 0.0);
    e[index] = 1.0;
    return e;
}

void check_index(int dimension, int index) {
    if (index < 0 || index >= dimension)
        throw InvalidArgument("asset index " + std::to_string(index) +
                              " out of range for dimension " + std::to_string(dimension));
}

void check_assets(int dimension, std::span<const int> assets) {
    if (assets.empty()) throw InvalidArgument("payoff needs at least one asset");
    for (int i : assets) check_index(dimension, i);
}

}  // namespace

double AffinePiece::operator()(std::span<const double> x) const {
    double v = offset;
    for (std::size_t j = 0; j < slope.size(); ++j) v += slope[j] * x[j];
    return v;
}

double CpwaTerm::operator()(std::span<const double> x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) best = std::max(best, p(x));
    return sign * best;
}

CpwaFunction::CpwaFunction(int dimension, std::vector<CpwaTerm> terms)
    : dimension_(dimension), terms_(std::move(terms)) {
    if (dimension_ < 1) throw InvalidArgument("CPWA dimension must be positive");
    if (terms_.empty()) throw InvalidArgument("CPWA function needs at least one term");
    for (const auto& t : terms_) {
        if (t.sign != 1 && t.sign != -1) throw InvalidArgument("term sign must be +1 or -1");
        if (t.pieces.empty()) throw InvalidArgument("CPWA term needs at least one piece");
        for (const auto& p : t.pieces) {
            if (static_cast<int>(p.slope.size()) != dimension_)
                throw InvalidArgument("piece slope has length " + std::to_string(p.slope.size()) +
                                      ", expected " + std::to_string(dimension_));
            if (!std::isfinite(p.offset)) throw InvalidArgument("non-finite piece offset");
            for (double a : p.slope)
                if (!std::isfinite(a)) throw InvalidArgument("non-finite piece slope");
        }
    }
}

CpwaFunction CpwaFunction::zero(int dimension) {
    return CpwaFunction(dimension, {CpwaTerm{1, {AffinePiece{std::vector<double>(dimension, 0.0), 0.0}}}});
}

CpwaFunction CpwaFunction::affine(std::vector<double> slope, double offset) {
    const int d = static_cast<int>(slope.size());
    return CpwaFunction(d, {CpwaTerm{1, {AffinePiece{std::move(slope), offset}}}});
}

double CpwaFunction::operator()(std::span<const double> x) const {
    double v = 0.0;
    for (const auto& t : terms_) v += t(x);
    return v;
}

CpwaFunction CpwaFunction::radial() const {
    auto terms = terms_;
    for (auto& t : terms)
        for (auto& p : t.pieces) p.offset = 0.0;
    return CpwaFunction(dimension_, std::move(terms));
}

CpwaFunction CpwaFunction::negated() const {
    auto terms = terms_;
    for (auto& t : terms) t.sign = -t.sign;
    return CpwaFunction(dimension_, std::move(terms));
}

double CpwaFunction::max_abs_offset() const {
    double m = 0.0;
    for (const auto& t : terms_)
        for (const auto& p : t.pieces) m = std::max(m, std::abs(p.offset));
    return m;
}

CpwaFunction linear_combination(std::span<const double> coeffs,
                                std::span<const CpwaFunction> fns) {
    if (coeffs.size() != fns.size())
        throw InvalidArgument("linear_combination: coefficient/function count mismatch");
    if (fns.empty()) throw InvalidArgument("linear_combination: no functions");
    const int d = fns.front().dimension();
    std::vector<CpwaTerm> terms;
    for (std::size_t k = 0; k < fns.size(); ++k) {
        if (fns[k].dimension() != d)
            throw InvalidArgument("linear_combination: dimension mismatch");
        const double c = coeffs[k];
        if (!std::isfinite(c)) throw InvalidArgument("linear_combination: non-finite coefficient");
        if (c == 0.0) continue;
        const double scale = std::abs(c);
        const int flip = c > 0 ? 1 : -1;
        for (const auto& t : fns[k].terms()) {
            CpwaTerm scaled{t.sign * flip, t.pieces};
            for (auto& p : scaled.pieces) {
                for (double& a : p.slope) a *= scale;
                p.offset *= scale;
            }
            terms.push_back(std::move(scaled));
        }
    }
    if (terms.empty()) return CpwaFunction::zero(d);
    return CpwaFunction(d, std::move(terms));
}

namespace payoff {

CpwaFunction asset(int dimension, int index) {
    check_index(dimension, index);
    return CpwaFunction::affine(unit(dimension, index), 0.0);
}

CpwaFunction call(int dimension, int index, double strike) {
    check_index(dimension, index);
    return CpwaFunction(dimension, {CpwaTerm{1, {AffinePiece{unit(dimension, index), -strike},
                                                 AffinePiece{std::vector<double>(dimension, 0.0), 0.0}}}});
}

CpwaFunction put(int dimension, int index, double strike) {
    check_index(dimension, index);
    auto a = unit(dimension, index);
    a[index] = -1.0;
    return CpwaFunction(dimension, {CpwaTerm{1, {AffinePiece{std::move(a), strike},
                                                 AffinePiece{std::vector<double>(dimension, 0.0), 0.0}}}});
}

CpwaFunction basket_call(std::vector<double> weights, double strike) {
    const int d = static_cast<int>(weights.size());
    if (d < 1) throw InvalidArgument("basket needs weights");
    return CpwaFunction(d, {CpwaTerm{1, {AffinePiece{std::move(weights), -strike},
                                         AffinePiece{std::vector<double>(d, 0.0), 0.0}}}});
}

CpwaFunction spread_call(int dimension, std::span<const int> long_assets,
                         std::span<const int> short_assets, double strike) {
    check_assets(dimension, long_assets);
    check_assets(dimension, short_assets);
    std::vector<double> a(dimension, 0.0);
    for (int i : long_assets) a[i] += 1.0;
    for (int i : short_assets) a[i] -= 1.0;
    return CpwaFunction(dimension, {CpwaTerm{1, {AffinePiece{std::move(a), -strike},
                                                 AffinePiece{std::vector<double>(dimension, 0.0), 0.0}}}});
}

CpwaFunction call_on_max(int dimension, std::span<const int> assets, double strike) {
    check_assets(dimension, assets);
    CpwaTerm t{1, {}};
    for (int i : assets) t.pieces.push_back({unit(dimension, i), -strike});
    t.pieces.push_back({std::vector<double>(dimension, 0.0), 0.0});
    return CpwaFunction(dimension, {std::move(t)});
}

// (min_i x_i - k)^+ = max(-x_i + k over i, 0) - max(-x_i + k over i)
CpwaFunction call_on_min(int dimension, std::span<const int> assets, double strike) {
    check_assets(dimension, assets);
    CpwaTerm with_floor{1, {}};
    CpwaTerm without_floor{-1, {}};
    for (int i : assets) {
        auto a = std::vector<double>(dimension, 0.0);
        a[i] = -1.0;
        with_floor.pieces.push_back({a, strike});
        without_floor.pieces.push_back({std::move(a), strike});
    }
    with_floor.pieces.push_back({std::vector<double>(dimension, 0.0), 0.0});
    return CpwaFunction(dimension, {std::move(with_floor), std::move(without_floor)});
}

CpwaFunction put_on_min(int dimension, std::span<const int> assets, double strike) {
    check_assets(dimension, assets);
    CpwaTerm t{1, {}};
    for (int i : assets) {
        auto a = std::vector<double>(dimension, 0.0);
        a[i] = -1.0;
        t.pieces.push_back({std::move(a), strike});
    }
    t.pieces.push_back({std::vector<double>(dimension, 0.0), 0.0});
    return CpwaFunction(dimension, {std::move(t)});
}

CpwaFunction best_of_calls(int dimension, std::span<const int> assets,
                           std::span<const double> strikes) {
    check_assets(dimension, assets);
    if (strikes.size() != assets.size())
        throw InvalidArgument("best_of_calls: one strike per asset required");
    CpwaTerm t{1, {}};
    for (std::size_t k = 0; k < assets.size(); ++k)
        t.pieces.push_back({unit(dimension, assets[k]), -strikes[k]});
    t.pieces.push_back({std::vector<double>(dimension, 0.0), 0.0});
    return CpwaFunction(dimension, {std::move(t)});
}

}  // namespace payoff

SlackTemplate::SlackTemplate(std::span<const CpwaFunction> traded, const CpwaFunction& target)
    : dimension_(target.dimension()), instruments_(static_cast<int>(traded.size())) {
    for (std::size_t j = 0; j < traded.size(); ++j) {
        if (traded[j].dimension() != dimension_)
            throw InvalidArgument("slack template: traded payoff " + std::to_string(j) +
                                  " has the wrong dimension");
        for (const auto& t : traded[j].terms()) {
            TemplateTerm tt{std::vector<double>(instruments_, 0.0), 0.0, t.pieces};
            tt.weight[j] = t.sign;
            terms_.push_back(std::move(tt));
        }
    }
    for (const auto& t : target.terms())
        terms_.push_back({std::vector<double>(instruments_, 0.0), static_cast<double>(-t.sign), t.pieces});
}

CpwaFunction SlackTemplate::instantiate(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != instruments_)
        throw InvalidArgument("slack template: portfolio has the wrong length");
    std::vector<CpwaTerm> terms;
    for (const auto& t : terms_) {
        double c = t.constant;
        for (int j = 0; j < instruments_; ++j) c += y[j] * t.weight[j];
        if (c == 0.0) continue;
        CpwaTerm out{c > 0 ? 1 : -1, t.pieces};
        const double s = std::abs(c);
        for (auto& p : out.pieces) {
            for (double& a : p.slope) a *= s;
            p.offset *= s;
        }
        terms.push_back(std::move(out));
    }
    if (terms.empty()) return CpwaFunction::zero(dimension_);
    return CpwaFunction(dimension_, std::move(terms));
}

double SlackTemplate::operator()(std::span<const double> y, std::span<const double> x) const {
    double v = 0.0;
    for (const auto& t : terms_) {
        double c = t.constant;
        for (int j = 0; j < instruments_; ++j) c += y[j] * t.weight[j];
        if (c == 0.0) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& p : t.pieces) best = std::max(best, p(x));
        v += c * best;
    }
    return v;
}

SlackTemplate SlackTemplate::radial() const {
    SlackTemplate r;
    r.dimension_ = dimension_;
    r.instruments_ = instruments_;
    r.terms_ = terms_;
    for (auto& t : r.terms_)
        for (auto& p : t.pieces) p.offset = 0.0;
    return r;
}

}  // namespace mfpb
