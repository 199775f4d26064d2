#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mfpb/accp.hpp"
#include "mfpb/arbitrage.hpp"
#include "mfpb/bounds.hpp"
#include "mfpb/cpwa.hpp"
#include "mfpb/market.hpp"
#include "mfpb/market_gen.hpp"

namespace mfpb::io {

using json = nlohmann::json;

// All readers throw InvalidArgument with the offending field on bad input.

json to_json(const CpwaFunction& f);
CpwaFunction cpwa_from_json(const json& j);

// {"dimension", "domain": "box"|"orthant", "upper", "instruments":
//  [{"name", "payoff", "bid", "ask"}]}; a payoff may be a CPWA object or a
// payoff-spec string.
json to_json(const MarketInstance& m);
MarketInstance instance_from_json(const json& j);

json to_json(const DiscreteMeasure& mu);
json to_json(const Portfolio& p);

json to_json(const OptionChain& c);
OptionChain chain_from_json(const json& j);
json to_json(const RepairResult& r);

json to_json(const BoundsResult& r, bool with_history = false);

// Either {"preset": "exp1" | "exp2" | "single", ...} or explicit
// {"models": [...], "instruments": [...]}; see the README for the fields.
struct MarketSpec {
    gen::ModelFamily family;
    std::vector<gen::Instrument> instruments;
};
MarketSpec market_spec_from_json(const json& j);
json to_json(const gen::MarketModel& m);

json read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const json& j);

}  // namespace mfpb::io
