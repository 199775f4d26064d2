#include <doctest.h>

#include <cmath>

#include "mfpb/ecp.hpp"
#include "mfpb/error.hpp"
#include "mfpb/milp_encoding.hpp"
#include "support.hpp"

using namespace mfpb;
using testsupport::Rng;

namespace {

// Underlying with bid 0 and ask 1 on the half-line; the call struck at 1 has
// superhedging price exactly 1 (hold one unit) although no hedge attains the
// infimum in the cash component.
MarketInstance half_line_market() {
    MarketInstance m;
    m.dimension = 1;
    m.domain = DomainKind::Orthant;
    m.payoffs = {payoff::asset(1, 0)};
    m.bid = {0.0};
    m.ask = {1.0};
    m.validate();
    return m;
}

MarketInstance two_asset_box_market(Rng& rng) {
    std::vector<CpwaFunction> g;
    for (int a = 0; a < 2; ++a) {
        g.push_back(payoff::asset(2, a));
        for (double k : {1.0, 2.0, 3.0}) g.push_back(payoff::call(2, a, k));
    }
    std::vector<std::vector<double>> atoms;
    for (int i = 0; i < 8; ++i) atoms.push_back(testsupport::random_vector(rng, 2, 0.0, 5.0));
    return testsupport::consistent_market(std::move(g), atoms, {5.0, 5.0}, 0.02);
}

double hedge_shortfall(const MarketInstance& m, const CpwaFunction& f, const BoundsResult& r) {
    std::vector<double> coeffs(r.units);
    std::vector<CpwaFunction> fns(m.payoffs);
    coeffs.push_back(-1.0);
    fns.push_back(f);
    coeffs.push_back(1.0);
    fns.push_back(CpwaFunction::affine(std::vector<double>(m.dimension, 0.0), r.cash));
    return minimize_over_box(linear_combination(coeffs, fns), r.box).bound;
}

}  // namespace

TEST_CASE("pricing functional buys at the ask and sells at the bid") {
    auto m = half_line_market();
    CHECK(price_pi(std::vector<double>{1.0}, m) == doctest::Approx(1.0));
    CHECK(price_pi(std::vector<double>{-1.0}, m) == doctest::Approx(0.0));
    Rng rng(1);
    MarketInstance mm;
    mm.dimension = 1;
    mm.domain = DomainKind::Box;
    mm.upper = {1.0};
    for (int j = 0; j < 4; ++j) {
        mm.payoffs.push_back(payoff::asset(1, 0));
        const double b = testsupport::uniform(rng, 0, 1);
        mm.bid.push_back(b);
        mm.ask.push_back(b + testsupport::uniform(rng, 0, 1));
    }
    mm.validate();
    for (int n = 0; n < 100; ++n) {
        const auto a = testsupport::random_vector(rng, 4, -3, 3);
        const auto b = testsupport::random_vector(rng, 4, -3, 3);
        std::vector<double> s(4);
        for (int j = 0; j < 4; ++j) s[j] = a[j] + b[j];
        CHECK(price_pi(s, mm) <= price_pi(a, mm) + price_pi(b, mm) + 1e-12);
    }
}

TEST_CASE("lower bound from explicit and automatic portfolios") {
    auto m = half_line_market();
    const auto lp_zero = compute_lower_phi(m, payoff::call(1, 0, 1.0));
    CHECK(lp_zero.value == doctest::Approx(0.0));
    // -f = -x is dominated by short cash 0 and one unit held.
    const auto neg = linear_combination(std::vector<double>{-1.0}, std::vector<CpwaFunction>{payoff::asset(1, 0)});
    const auto phi = compute_lower_phi(m, neg, Portfolio{0.0, {1.0}});
    CHECK(phi.value == doctest::Approx(-1.0));
    CHECK_THROWS_AS(compute_lower_phi(m, neg, Portfolio{0.0, {0.5}}), InvalidArgument);
    const auto automatic = compute_lower_phi(m, neg);
    CHECK(automatic.value == doctest::Approx(-1.0));
}

TEST_CASE("call on the half-line: upper bound 1") {
    const auto m = half_line_market();
    EcpOptions o;
    o.box = std::vector<double>{100.0};
    const auto r = solve_ecp(m, payoff::call(1, 0, 1.0), o);
    REQUIRE(r.status == BoundsStatus::Converged);
    CHECK(r.upper >= 1.0 - o.epsilon);
    CHECK(r.upper <= 1.0 + o.epsilon);
    CHECK(r.upper - r.lower <= o.epsilon + 1e-12);
    CHECK(r.units[0] >= 1.0 - 1e-9);
    CHECK_FALSE(r.default_box);
}

TEST_CASE("default orthant box is flagged") {
    const auto r = solve_ecp(half_line_market(), payoff::call(1, 0, 1.0));
    CHECK(r.default_box);
    CHECK(r.box[0] == doctest::Approx(10.0));
}

TEST_CASE("zero payoff prices to zero without arbitrage") {
    Rng rng(5);
    const auto m = two_asset_box_market(rng);
    const auto r = solve_ecp(m, CpwaFunction::zero(2));
    REQUIRE(r.status == BoundsStatus::Converged);
    CHECK(std::abs(r.upper) <= 1e-3);
    CHECK(std::abs(r.lower) <= 1e-3);
}

TEST_CASE("a traded payoff is superhedged at its ask") {
    Rng rng(6);
    const auto m = two_asset_box_market(rng);
    const auto r = solve_ecp(m, m.payoffs[2]);
    REQUIRE(r.status == BoundsStatus::Converged);
    CHECK(r.upper <= m.ask[2] + 1e-3);
}

TEST_CASE("box bounds match the grid-discretized dual") {
    for (unsigned seed : {11u, 12u, 13u}) {
        Rng rng(seed);
        const auto m = two_asset_box_market(rng);
        const int both[] = {0, 1};
        for (const auto& f : {payoff::call_on_max(2, both, 2.0), payoff::call_on_min(2, both, 1.0)}) {
            EcpOptions o;
            const auto r = solve_ecp(m, f, o);
            REQUIRE(r.status == BoundsStatus::Converged);
            const double oracle = testsupport::grid_dual_oracle(m, f, 0.05);
            // Kinks sit at integers, so the 0.05 grid holds every vertex.
            CHECK(r.upper >= oracle - 1e-6);
            CHECK(r.lower <= oracle + 1e-6);
            CHECK(r.upper - oracle <= o.epsilon + 1e-6);
        }
    }
}

TEST_CASE("iteration invariants and a verifiable hedge") {
    Rng rng(21);
    const auto m = two_asset_box_market(rng);
    const int both[] = {0, 1};
    const auto f = payoff::call_on_max(2, both, 1.5);
    const auto r = solve_ecp(m, f);
    REQUIRE(r.status == BoundsStatus::Converged);
    REQUIRE(!r.history.empty());
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        CHECK(r.history[i].slack <= 1e-9);
        CHECK(r.history[i].lower <= r.history[i].upper + 1e-12);
        if (i > 0) CHECK(r.history[i].lower >= r.history[i - 1].lower - 1e-9);
    }
    CHECK(hedge_shortfall(m, f, r) >= -1e-6);
    CHECK(price_pi(r.units, m) + r.cash == doctest::Approx(r.upper).epsilon(1e-9));
}

TEST_CASE("reusing the support set converges almost immediately") {
    Rng rng(22);
    const auto m = two_asset_box_market(rng);
    const int both[] = {0, 1};
    const auto f = payoff::call_on_min(2, both, 1.0);
    const auto first = solve_ecp(m, f);
    REQUIRE(first.status == BoundsStatus::Converged);
    EcpOptions o;
    o.initial_points = first.support;
    const auto second = solve_ecp(m, f, o);
    CHECK(second.status == BoundsStatus::Converged);
    CHECK(second.lp_solves <= 2);
    CHECK(second.upper == doctest::Approx(first.upper).epsilon(1e-3));
}

TEST_CASE("orthant bounds for a spread agree with a wide box") {
    // Calls on both assets plus the assets themselves; the spread call is
    // bounded by holding asset 0.
    std::vector<CpwaFunction> g;
    for (int a = 0; a < 2; ++a) {
        g.push_back(payoff::asset(2, a));
        g.push_back(payoff::call(2, a, 1.0));
        g.push_back(payoff::call(2, a, 2.0));
    }
    const std::vector<std::vector<double>> atoms = {{0.5, 1.0}, {1.5, 0.5}, {2.5, 2.0}, {1.0, 3.0}};
    const auto m = testsupport::consistent_market(g, atoms, {}, 0.01);
    const int longs[] = {0};
    const int shorts[] = {1};
    const auto f = payoff::spread_call(2, longs, shorts, 0.5);
    EcpOptions o;
    o.box = std::vector<double>{50.0, 50.0};
    const auto r = solve_ecp(m, f, o);
    REQUIRE(r.status == BoundsStatus::Converged);
    CHECK(r.upper <= m.ask[0] + 1e-3);
    CHECK(r.upper >= r.lower);
    // Measure on the atoms is feasible, so the upper bound dominates its price.
    double mean = 0.0;
    for (const auto& x : atoms) mean += f(x) / atoms.size();
    CHECK(r.upper >= mean - 0.01 * 6 - 1e-9);
}

TEST_CASE("mispriced calls are flagged as unbounded") {
    // Call struck at 1 bid above the call struck at 0.5's ask on [0, 4]:
    // buy the cheap low-strike call, sell the dear one.
    MarketInstance m;
    m.dimension = 1;
    m.domain = DomainKind::Box;
    m.upper = {4.0};
    m.payoffs = {payoff::call(1, 0, 0.5), payoff::call(1, 0, 1.0)};
    m.bid = {0.9, 1.2};
    m.ask = {1.0, 1.3};
    m.validate();
    EcpOptions o;
    o.lower_phi = 0.0;
    const auto r = solve_ecp(m, CpwaFunction::zero(1), o);
    CHECK(r.status == BoundsStatus::Unbounded);
    CHECK(r.arbitrage());
    CHECK(r.upper < 0.0);
    CHECK(hedge_shortfall(m, CpwaFunction::zero(1), r) >= -1e-6);
}

TEST_CASE("invalid options are rejected") {
    EcpOptions o;
    o.delta = 0.0;
    CHECK_THROWS_AS(solve_ecp(half_line_market(), payoff::call(1, 0, 1.0), o), InvalidArgument);
    o = {};
    o.epsilon = -1;
    CHECK_THROWS_AS(solve_ecp(half_line_market(), payoff::call(1, 0, 1.0), o), InvalidArgument);
}
