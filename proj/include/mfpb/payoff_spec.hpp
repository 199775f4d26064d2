#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mfpb/cpwa.hpp"

namespace mfpb {

// Textual payoff description, e.g.
//
//   call:asset=2,strike=5        put:asset=1,strike=3      asset:asset=4
//   basket:weights=0.5/0.5,strike=1
//   spread:long=1,short=2,strike=0
//   max:assets=2/3/4,strike=1    min:assets=1/2,strike=1   putmin:assets=1/2,strike=4
//   best:assets=1/2,strikes=1/2
//
// Asset numbers are 1-based; lists use '/'.  A missing strike can be filled
// in later, which is how strike sweeps are driven.
class PayoffSpec {
public:
    static PayoffSpec parse(std::string_view text);

    const std::string& kind() const { return kind_; }
    bool has_strike() const { return params_.count("strike") > 0; }
    // Throws InvalidArgument when the text is malformed for dimension d or a
    // required strike is absent and not supplied.
    CpwaFunction build(int dimension, std::optional<double> strike = std::nullopt) const;
    std::string text() const;

private:
    std::string kind_;
    std::map<std::string, std::string> params_;
};

inline CpwaFunction parse_payoff(std::string_view text, int dimension) {
    return PayoffSpec::parse(text).build(dimension);
}

}  // namespace mfpb
