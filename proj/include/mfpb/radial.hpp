#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfpb/cpwa.hpp"
#include "mfpb/lp.hpp"

namespace mfpb {

// Odometer over the Cartesian product of {0..sizes[k]-1}.
class TupleEnumerator {
public:
    explicit TupleEnumerator(std::vector<int> sizes);
    // Writes the next tuple; false once exhausted.
    bool next(std::vector<int>& tuple);
    double count() const;

private:
    std::vector<int> sizes_;
    std::vector<int> current_;
    bool started_ = false;
    bool done_ = false;
};

// True iff some convex combination of the vectors is componentwise <= 0,
// i.e. { z >= 0 : <v, z> <= 0 for all v } has empty interior.
bool cone_interior_empty(std::span<const std::vector<double>> vectors);

struct RadialOptions {
    std::size_t row_cap = 100000;
    double tuple_cap = 1e7;
};

// Linear system over (y, eta) whose feasibility is equivalent to the radial
// slack  z -> s~_y(z)  being nonnegative on the orthant, i.e. to the slack
// being bounded below.  Variables 0..instruments-1 are y, the rest are eta >= 0.
struct RadialSystem {
    int dimension = 0;
    int instruments = 0;
    int aux_count = 0;
    std::vector<lp::Row> rows;
    // For each generated block of `dimension` rows, the piece tuple over the
    // merged radial terms that produced it.
    std::vector<std::vector<int>> tuple_index;
    std::size_t tuples_visited = 0;
    std::size_t tuples_skipped = 0;

    // LP feasibility of the system with y fixed.
    bool admits(std::span<const double> y) const;
};

RadialSystem generate_radial_system(const SlackTemplate& tmpl, const RadialOptions& opts = {});

}  // namespace mfpb
