#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mfpb/cpwa.hpp"
#include "mfpb/milp.hpp"

namespace mfpb {

// M[k][i]: how far piece i of term k can fall below the other pieces of the
// same term over the box [0, upper].
std::vector<std::vector<double>> big_m(const CpwaFunction& h, std::span<const double> upper);

struct EncodingOptions {
    // Terms whose slopes and offsets are all within this magnitude are left
    // out of the program and accounted for by a closed-form bound.
    double prune_threshold = 1e-6;
};

// Minimization of a CPWA function over [0, upper] as a MILP.  Convex terms
// (sign +1) become an epigraph variable; concave terms (sign -1) become a
// hypograph variable with one binary selector per piece.
class Encoding {
public:
    Encoding(const CpwaFunction& h, std::span<const double> upper, const EncodingOptions& opts = {});

    const milp::MixedIntegerProgram& program() const { return program_; }
    const std::vector<int>& x_indices() const { return x_indices_; }
    const std::vector<double>& upper() const { return upper_; }
    // Lower bound over the box of the terms left out by pruning.
    double pruned_lower_bound() const { return pruned_lower_; }
    int pruned_terms() const { return pruned_terms_; }

    std::vector<double> decode_x(std::span<const double> solution) const;
    // Integer-feasible program point with the given x (clamped to the box).
    std::vector<double> complete(std::span<const double> x) const;

private:
    struct Block {
        int sign;
        std::vector<AffinePiece> pieces;
        int aux;          // epigraph or hypograph variable
        int first_delta;  // concave terms only
        int first_iota;
    };

    milp::MixedIntegerProgram program_;
    std::vector<int> x_indices_;
    std::vector<double> upper_;
    std::vector<Block> blocks_;
    double pruned_lower_ = 0.0;
    int pruned_terms_ = 0;
};

struct BoxPoint {
    std::vector<double> x;
    double value = 0.0;  // exact function value at x
};

struct BoxMinimum {
    milp::Status status = milp::Status::Infeasible;
    double value = 0.0;   // exact value at the best point found
    double bound = 0.0;   // rigorous lower bound on the box minimum
    std::vector<double> x;
    std::vector<BoxPoint> pool;  // ascending by exact value
    long nodes = 0;
};

struct BoxMinOptions {
    double rel_gap = 1e-9;
    long node_limit = 200000;
    double pool_threshold = 1.0;
    std::size_t pool_capacity = 512;
    EncodingOptions encoding;
};

BoxMinimum minimize_over_box(const CpwaFunction& h, std::span<const double> upper,
                             const BoxMinOptions& opts = {});

}  // namespace mfpb
