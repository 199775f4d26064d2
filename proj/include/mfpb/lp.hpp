#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mfpb::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Row {
    std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
    Relation relation = Relation::GreaterEqual;
    double rhs = 0.0;
};

// minimize <objective, x> + objective_offset  s.t. rows, lower <= x <= upper
struct LinearProgram {
    std::vector<double> objective;
    double objective_offset = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Row> rows;

    int variable_count() const { return static_cast<int>(objective.size()); }
    // Appends a variable and returns its index.
    int add_variable(double cost, double lo, double hi);
    void add_row(Row row) { rows.push_back(std::move(row)); }
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

struct Tolerances {
    double feasibility = 1e-9;
    double optimality = 1e-9;
    double pivot = 1e-7;  // smaller entries of a ratio-test column are treated as zero
    long max_iterations = 200000;
    double max_row_ratio = 1e12;
};

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    // Row multipliers in the Lagrangian sense: objective = sum_i duals_i * rhs_i
    // + sum_j reduced_costs_j * x_j.  Nonnegative on binding >= rows when
    // minimizing.
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    // Infeasible: multipliers of the phase-one problem (a Farkas-type
    // combination of rows).  Unbounded: a primal direction of descent.
    std::vector<double> farkas;
    std::vector<double> ray;
    long iterations = 0;
};

// Rejects rows whose nonzero coefficient magnitudes span more than
// tol.max_row_ratio; throws NumericalError naming the row.
void check_conditioning(const LinearProgram& lp, const Tolerances& tol = {});

Solution solve(const LinearProgram& lp, const Tolerances& tol = {});

// Basis snapshot, reusable across bound changes of the same program.
struct Basis {
    std::vector<int> head;
    std::vector<std::int8_t> state;
};

// Bounded revised simplex (dense explicit inverse, rank-one updates with
// periodic reinversion).  Supports bound changes followed by a dual simplex
// warm start, which is what branch-and-bound needs.
class Simplex {
public:
    explicit Simplex(const LinearProgram& lp, const Tolerances& tol = {});

    Solution solve();
    // Re-solve after set_bounds(); uses the dual simplex when the current
    // basis is dual feasible, primal otherwise.
    Solution resolve();

    void set_bounds(int var, double lo, double hi);
    Basis basis() const;
    void load_basis(const Basis& b);

    int rows() const { return m_; }
    int structurals() const { return n_; }

private:
    enum State : std::int8_t { kBasic, kAtLower, kAtUpper, kFree };

    void refactor();
    void compute_primal();
    void compute_duals(const Eigen::VectorXd& basic_cost);
    double column_dot(int j, const Eigen::VectorXd& v) const;
    void column_ftran(int j, Eigen::VectorXd& out) const;
    // column_ftran, refactoring instead when the result fails a residual check.
    bool ftran_accurate(int j, Eigen::VectorXd& out);
    void pivot(int row, int entering, const Eigen::VectorXd& alpha);
    bool primal_feasible() const;
    double infeasibility(int var) const;
    Solution primal();
    std::optional<Solution> dual();
    Solution finish(Status st);
    void place_nonbasic(int j);

    int n_ = 0, m_ = 0;
    Tolerances tol_;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> cost_, lo_, hi_;
    double offset_ = 0.0;

    std::vector<int> head_;
    std::vector<std::int8_t> state_;
    std::vector<double> x_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd y_;
    int updates_since_refactor_ = 0;
    long iterations_ = 0;
    std::vector<double> farkas_, ray_;
};

// Largest ball (weighted by each row's scale) inside
// { v : <a_i, v> >= b_i, lower <= v <= upper }.
struct HalfSpace {
    std::vector<double> a;
    double b = 0.0;
    std::optional<double> scale;  // defaults to ||a||_2
};

struct ChebyshevCenter {
    bool feasible = false;
    std::vector<double> center;
    double radius = 0.0;
};

ChebyshevCenter chebyshev_center(std::span<const HalfSpace> rows, std::span<const double> lower,
                                 std::span<const double> upper, const Tolerances& tol = {});

// Plain-text dump for debugging.
void write_text(std::ostream& os, const LinearProgram& lp);

}  // namespace mfpb::lp
