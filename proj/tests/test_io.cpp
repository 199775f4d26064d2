#include <doctest.h>

#include <cmath>

#include "mfpb/error.hpp"
#include "mfpb/json_io.hpp"
#include "mfpb/payoff_spec.hpp"
#include "support.hpp"

using namespace mfpb;
using io::json;

namespace {

void check_same_function(const CpwaFunction& a, const CpwaFunction& b, int d) {
    testsupport::Rng rng(1);
    REQUIRE(a.dimension() == b.dimension());
    for (int i = 0; i < 50; ++i) {
        const auto x = testsupport::random_vector(rng, d, 0.0, 10.0);
        CHECK(a(x) == b(x));
    }
}

}  // namespace

TEST_CASE("payoff specs build the library payoffs") {
    const int d = 4;
    const int a23[] = {1, 2};
    const int l1[] = {0}, s2[] = {1};
    const double ks[] = {1.0, 2.0};
    check_same_function(parse_payoff("call:asset=2,strike=5", d), payoff::call(d, 1, 5.0), d);
    check_same_function(parse_payoff("put: asset=1, strike=3", d), payoff::put(d, 0, 3.0), d);
    check_same_function(parse_payoff("asset:asset=4", d), payoff::asset(d, 3), d);
    check_same_function(parse_payoff("basket:weights=0.25/0.25/0.25/0.25,strike=1", d),
                        payoff::basket_call({0.25, 0.25, 0.25, 0.25}, 1.0), d);
    check_same_function(parse_payoff("spread:long=1,short=2,strike=-3", d), payoff::spread_call(d, l1, s2, -3.0), d);
    check_same_function(parse_payoff("max:assets=2/3,strike=1.5", d), payoff::call_on_max(d, a23, 1.5), d);
    check_same_function(parse_payoff("min:assets=2/3,strike=1", d), payoff::call_on_min(d, a23, 1.0), d);
    check_same_function(parse_payoff("putmin:assets=2/3,strike=4", d), payoff::put_on_min(d, a23, 4.0), d);
    check_same_function(parse_payoff("best:assets=2/3,strikes=1/2", d), payoff::best_of_calls(d, a23, ks), d);

    const auto sweep = PayoffSpec::parse("max:assets=2/3");
    CHECK_FALSE(sweep.has_strike());
    check_same_function(sweep.build(d, 2.0), payoff::call_on_max(d, a23, 2.0), d);
    CHECK_THROWS_AS(sweep.build(d), InvalidArgument);
}

TEST_CASE("malformed payoff specs are rejected") {
    for (const char* bad : {"digital:asset=1,strike=1", "call:asset=0,strike=1", "call:asset=5,strike=1",
                            "call:asset=1", "call:asset=1,strike=x", "call:asset=1,strike=1,colour=red",
                            "basket:weights=1/1,strike=1", "call:asset=1,asset=2,strike=1", "call:asset"})
        CHECK_THROWS_AS(parse_payoff(bad, 4), InvalidArgument);
}

TEST_CASE("CPWA and instance JSON round trip") {
    testsupport::Rng rng(4);
    const auto f = testsupport::random_cpwa(rng, 3);
    const auto back = io::cpwa_from_json(json::parse(io::to_json(f).dump()));
    check_same_function(f, back, 3);
    CHECK(io::to_json(back) == io::to_json(f));

    MarketInstance m;
    m.dimension = 2;
    m.domain = DomainKind::Box;
    m.upper = {5.0, 7.0};
    m.payoffs = {payoff::asset(2, 0), payoff::call(2, 1, 2.0)};
    m.bid = {1.0, 0.5};
    m.ask = {1.1, 0.6};
    m.names = {"x1", "c"};
    m.validate();
    const auto m2 = io::instance_from_json(json::parse(io::to_json(m).dump()));
    CHECK(io::to_json(m2) == io::to_json(m));

    // Payoff-spec strings and a scalar box corner are accepted on input.
    const auto j = json::parse(R"({"dimension": 2, "domain": "box", "upper": 10,
        "instruments": [{"name": "c", "payoff": "call:asset=1,strike=2", "bid": 0.1, "ask": 0.2}]})");
    const auto m3 = io::instance_from_json(j);
    CHECK(m3.upper == std::vector<double>{10.0, 10.0});
    check_same_function(m3.payoffs[0], payoff::call(2, 0, 2.0), 2);

    auto orth = io::to_json(m);
    orth["domain"] = "orthant";
    orth.erase("upper");
    CHECK(io::instance_from_json(orth).domain == DomainKind::Orthant);
    auto bad = io::to_json(m);
    bad["instruments"][0]["bid"] = 2.0;  // above the ask
    CHECK_THROWS_AS(io::instance_from_json(bad), InvalidArgument);
    bad = io::to_json(m);
    bad.erase("dimension");
    CHECK_THROWS_AS(io::instance_from_json(bad), InvalidArgument);
}

TEST_CASE("chain, measure and bounds JSON") {
    const auto c = io::chain_from_json(json::parse(R"({"strikes": [1, 2],
        "call": {"bid": [0.9, 0.3], "ask": [1.0, 0.4]}, "put": {"bid": [0.0, 0.2], "ask": [0.1, 0.3]}})"));
    CHECK(c.xbar == 4.0);
    CHECK(io::chain_from_json(io::to_json(c)).strikes == c.strikes);
    const auto r = repair_chain(c);
    const auto rj = io::to_json(r);
    CHECK(rj["certificate"]["mass"].size() == 4);
    CHECK(rj.contains("total"));

    DiscreteMeasure mu{{{{1.0, 2.0}, 0.25}, {{3.0, 0.0}, 0.75}}, 1.5};
    const auto mj = io::to_json(mu);
    CHECK(mj["atoms"].size() == 2);
    CHECK(mj["atoms"][1]["mass"] == 0.75);

    BoundsResult b;
    b.status = BoundsStatus::Stalled;
    b.lower = -std::numeric_limits<double>::infinity();
    b.history.push_back({});
    const auto bj = io::to_json(b, true);
    CHECK(bj["status"] == "stalled");
    CHECK(bj["lower"] == "-inf");
    CHECK(bj["history"].size() == 1);
}

TEST_CASE("market spec JSON") {
    const auto preset = io::market_spec_from_json(json::parse(R"({"preset": "exp1", "mc_samples": 10})"));
    CHECK(preset.instruments.size() == 439);
    CHECK(preset.family.models.size() == 4);
    const auto single = io::market_spec_from_json(
        json::parse(R"({"preset": "single", "categories": ["asset", "vanilla"], "mc_samples": 10})"));
    CHECK(single.family.models.size() == 1);
    CHECK(single.instruments.size() == 55);

    const auto expl = io::market_spec_from_json(json::parse(R"({
        "seed": 3, "mc_samples": 500,
        "models": [{"mu": [0, 0], "sigma2": [0.2, 0.3], "upper": 20,
                    "loadings": [[0.6], [0.5]], "nu": 4},
                   {"mu": [0, 0], "sigma2": [0.25, 0.3], "upper": 20,
                    "loadings": [[0.6], [0.5]], "nu": "inf"}],
        "instruments": [{"name": "x1", "payoff": "asset:asset=1"},
                        {"name": "m", "category": "rainbow", "payoff": "max:assets=1/2,strike=1"}]})"));
    CHECK(expl.family.models.size() == 2);
    CHECK(std::isinf(expl.family.models[1].copula.nu));
    CHECK(expl.family.models[0].copula.idio[0] == doctest::Approx(0.64));
    const auto m = gen::build_market(expl.family, expl.instruments);
    CHECK(m.instrument_count() == 2);
    CHECK(m.names[1] == "m");

    CHECK_THROWS_AS(io::market_spec_from_json(json::parse(R"({"preset": "exp9"})")), InvalidArgument);
    CHECK_THROWS_AS(io::market_spec_from_json(json::parse(
                        R"({"models": [{"mu": [0], "sigma2": [-1], "upper": 5}], "instruments": []})")),
                    InvalidArgument);
}
