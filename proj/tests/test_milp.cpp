#include <doctest.h>

#include <cmath>

#include "mfpb/error.hpp"
#include "mfpb/milp.hpp"
#include "mfpb/milp_encoding.hpp"
#include "support.hpp"

using namespace mfpb;
using testsupport::Rng;

namespace {

// Enumerates every binary assignment and solves the remaining LP.
double brute_force(const milp::MixedIntegerProgram& p) {
    const int nb = static_cast<int>(p.binaries.size());
    double best = lp::kInf;
    for (int mask = 0; mask < (1 << nb); ++mask) {
        auto sub = p.base;
        for (int k = 0; k < nb; ++k) {
            const double v = (mask >> k) & 1;
            sub.lower[p.binaries[k]] = v;
            sub.upper[p.binaries[k]] = v;
        }
        const auto s = lp::solve(sub);
        if (s.status == lp::Status::Optimal) best = std::min(best, s.objective);
    }
    return best;
}

milp::MixedIntegerProgram random_milp(Rng& rng) {
    milp::MixedIntegerProgram p;
    const int nc = testsupport::uniform_int(rng, 1, 15);
    const int nb = testsupport::uniform_int(rng, 1, 8);
    for (int j = 0; j < nc; ++j) {
        const double lo = testsupport::uniform(rng, -2, 0);
        p.base.add_variable(testsupport::uniform(rng, -1, 1), lo, lo + testsupport::uniform(rng, 1, 4));
    }
    for (int k = 0; k < nb; ++k) p.binaries.push_back(p.base.add_variable(testsupport::uniform(rng, -2, 2), 0.0, 1.0));
    const int rows = testsupport::uniform_int(rng, 1, 8);
    const int n = nc + nb;
    for (int i = 0; i < rows; ++i) {
        lp::Row r;
        for (int j = 0; j < n; ++j)
            if (testsupport::uniform(rng, 0, 1) < 0.4) r.coeffs.push_back({j, std::round(testsupport::uniform(rng, -3, 3) * 2) / 2});
        r.relation = testsupport::uniform_int(rng, 0, 1) ? lp::Relation::LessEqual : lp::Relation::GreaterEqual;
        r.rhs = testsupport::uniform(rng, -2, 2);
        p.base.add_row(std::move(r));
    }
    return p;
}

}  // namespace

TEST_CASE("program without binaries reduces to the LP") {
    milp::MixedIntegerProgram p;
    p.base.add_variable(1.0, -lp::kInf, lp::kInf);
    p.base.add_row({{{0, 1.0}}, lp::Relation::GreaterEqual, 3.0});
    p.base.add_row({{{0, 1.0}}, lp::Relation::LessEqual, 10.0});
    const auto r = milp::solve(p);
    CHECK(r.status == milp::Status::Optimal);
    CHECK(r.incumbent_value == doctest::Approx(lp::solve(p.base).objective));
    CHECK(r.best_bound == doctest::Approx(3.0));
}

TEST_CASE("three binaries with a cardinality row") {
    milp::MixedIntegerProgram p;
    for (double c : {-1.0, -2.0, -3.0}) p.binaries.push_back(p.base.add_variable(c, 0.0, 1.0));
    p.base.add_row({{{0, 1.0}, {1, 1.0}, {2, 1.0}}, lp::Relation::LessEqual, 2.0});
    const auto r = milp::solve(p);
    REQUIRE(r.status == milp::Status::Optimal);
    CHECK(r.incumbent_value == doctest::Approx(-5.0));
    CHECK(r.incumbent[0] == doctest::Approx(0.0));
    CHECK(r.incumbent[1] == doctest::Approx(1.0));
    CHECK(r.incumbent[2] == doctest::Approx(1.0));
    CHECK(brute_force(p) == doctest::Approx(-5.0));
}

TEST_CASE("concave piece selection through the encoding") {
    const auto h = linear_combination(std::vector<double>{-1.0}, std::vector<CpwaFunction>{payoff::call(1, 0, 1.0)});
    const double box[] = {10.0};
    const Encoding enc(h, box);
    const auto r = milp::solve(enc.program());
    REQUIRE(r.status == milp::Status::Optimal);
    CHECK(r.incumbent_value == doctest::Approx(-9.0));
    CHECK(enc.decode_x(r.incumbent)[0] == doctest::Approx(10.0));
}

TEST_CASE("random small programs match enumeration over binary assignments") {
    Rng rng(2024);
    int feasible = 0;
    for (int n = 0; n < 200; ++n) {
        const auto p = random_milp(rng);
        const double expected = brute_force(p);
        const auto r = milp::solve(p);
        if (!std::isfinite(expected)) {
            CHECK(r.status == milp::Status::Infeasible);
            continue;
        }
        ++feasible;
        REQUIRE(r.status == milp::Status::Optimal);
        CHECK(std::abs(r.incumbent_value - expected) <= 1e-6 * (1 + std::abs(expected)));
        CHECK(r.best_bound <= r.incumbent_value + 1e-9);
        CHECK(milp::is_feasible(p, r.incumbent));
        for (std::size_t i = 1; i < r.incumbent_history.size(); ++i)
            CHECK(r.incumbent_history[i] <= r.incumbent_history[i - 1]);
        for (std::size_t i = 1; i < r.bound_history.size(); ++i)
            CHECK(r.bound_history[i] >= r.bound_history[i - 1] - 1e-9);
        for (const auto& e : r.pool) CHECK(milp::is_feasible(p, e.x));
    }
    CHECK(feasible > 100);
}

TEST_CASE("pool keeps solutions below the threshold plus the incumbent") {
    Rng rng(8);
    const int d = 2;
    for (int n = 0; n < 20; ++n) {
        const auto h = testsupport::random_cpwa(rng, d, 3, 3);
        const std::vector<double> box(d, 10.0);
        const Encoding enc(h, box);
        milp::Options opts;
        opts.pool_threshold = 0.7;
        opts.heuristic = [&enc](std::span<const double> s) -> std::optional<std::vector<double>> {
            return enc.complete(enc.decode_x(s));
        };
        const auto r = milp::solve(enc.program(), opts);
        REQUIRE(!r.pool.empty());
        bool has_incumbent = false;
        for (const auto& e : r.pool) {
            CHECK(milp::is_feasible(enc.program(), e.x));
            if (e.x == r.incumbent) has_incumbent = true;
            else if (r.incumbent_value < 0) CHECK(e.value <= 0.7 * r.incumbent_value + 1e-12);
        }
        CHECK(has_incumbent);
    }
}

TEST_CASE("node limit stops the search with valid bounds") {
    Rng rng(99);
    const auto h = testsupport::random_cpwa(rng, 2, 4, 4);
    const std::vector<double> box(2, 10.0);
    const Encoding enc(h, box);
    milp::Options opts;
    opts.node_limit = 1;
    opts.heuristic = [&enc](std::span<const double> s) -> std::optional<std::vector<double>> {
        return enc.complete(enc.decode_x(s));
    };
    const auto r = milp::solve(enc.program(), opts);
    if (!enc.program().binaries.empty() && r.status == milp::Status::NodeLimit) {
        CHECK(r.best_bound <= r.incumbent_value);
    }
    const double truth = testsupport::box_min_oracle(h, box);
    CHECK(r.best_bound <= truth + 1e-7);
}

TEST_CASE("binary bounds are validated") {
    milp::MixedIntegerProgram p;
    p.binaries.push_back(p.base.add_variable(1.0, 0.0, 2.0));
    CHECK_THROWS_AS(milp::solve(p), InvalidArgument);
}
