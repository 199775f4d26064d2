#include "mfpb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mfpb/error.hpp"

namespace mfpb::lp {

namespace {

constexpr int kRefactorInterval = 64;
constexpr int kDegenerateBeforeBland = 40;

}  // namespace

int LinearProgram::add_variable(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(objective.size()) - 1;
}

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
    }
    return "?";
}

void check_conditioning(const LinearProgram& lp, const Tolerances& tol) {
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        double lo = kInf, hi = 0.0;
        for (const auto& [j, a] : lp.rows[i].coeffs) {
            if (!std::isfinite(a))
                throw NumericalError("LP row " + std::to_string(i) + " has a non-finite coefficient");
            if (a == 0.0) continue;
            lo = std::min(lo, std::abs(a));
            hi = std::max(hi, std::abs(a));
        }
        if (hi > 0.0 && hi / lo > tol.max_row_ratio)
            throw NumericalError("LP row " + std::to_string(i) + " is badly scaled: coefficient ratio " +
                                 std::to_string(hi / lo));
    }
}

Solution solve(const LinearProgram& lp, const Tolerances& tol) {
    Simplex s(lp, tol);
    return s.solve();
}

Simplex::Simplex(const LinearProgram& lp, const Tolerances& tol)
    : n_(lp.variable_count()), m_(static_cast<int>(lp.rows.size())), tol_(tol) {
    if (lp.lower.size() != lp.objective.size() || lp.upper.size() != lp.objective.size())
        throw InvalidArgument("LP bound vectors do not match the objective length");
    check_conditioning(lp, tol);
    const int total = n_ + m_;
    cols_.assign(total, {});
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    offset_ = lp.objective_offset;
    for (int j = 0; j < n_; ++j) {
        cost_[j] = lp.objective[j];
        lo_[j] = lp.lower[j];
        hi_[j] = lp.upper[j];
        if (lo_[j] > hi_[j]) throw InvalidArgument("LP variable " + std::to_string(j) + " has lower > upper");
    }
    for (int i = 0; i < m_; ++i) {
        const auto& row = lp.rows[i];
        for (const auto& [j, a] : row.coeffs) {
            if (j < 0 || j >= n_) throw InvalidArgument("LP row references an unknown variable");
            if (a != 0.0) cols_[j].push_back({i, a});
        }
        cols_[n_ + i].push_back({i, -1.0});
        switch (row.relation) {
            case Relation::LessEqual: lo_[n_ + i] = -kInf; hi_[n_ + i] = row.rhs; break;
            case Relation::GreaterEqual: lo_[n_ + i] = row.rhs; hi_[n_ + i] = kInf; break;
            case Relation::Equal: lo_[n_ + i] = row.rhs; hi_[n_ + i] = row.rhs; break;
        }
    }
    // Merge duplicate entries within a column.
    for (auto& col : cols_) {
        std::sort(col.begin(), col.end());
        std::vector<std::pair<int, double>> merged;
        for (const auto& e : col) {
            if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
            else merged.push_back(e);
        }
        col.swap(merged);
    }
    head_.resize(m_);
    state_.assign(total, kAtLower);
    x_.assign(total, 0.0);
    for (int i = 0; i < m_; ++i) {
        head_[i] = n_ + i;
        state_[n_ + i] = kBasic;
    }
    for (int j = 0; j < n_; ++j) place_nonbasic(j);
    binv_ = -Eigen::MatrixXd::Identity(m_, m_);
    y_ = Eigen::VectorXd::Zero(m_);
    compute_primal();
}

void Simplex::place_nonbasic(int j) {
    if (std::isfinite(lo_[j])) {
        state_[j] = kAtLower;
        x_[j] = lo_[j];
    } else if (std::isfinite(hi_[j])) {
        state_[j] = kAtUpper;
        x_[j] = hi_[j];
    } else {
        state_[j] = kFree;
        x_[j] = 0.0;
    }
}

void Simplex::set_bounds(int var, double lo, double hi) {
    if (var < 0 || var >= n_) throw InvalidArgument("set_bounds: unknown variable");
    if (lo > hi) throw InvalidArgument("set_bounds: lower > upper");
    lo_[var] = lo;
    hi_[var] = hi;
    if (state_[var] == kBasic) return;
    if (state_[var] == kAtUpper && std::isfinite(hi)) x_[var] = hi;
    else if (state_[var] == kAtLower && std::isfinite(lo)) x_[var] = lo;
    else place_nonbasic(var);
}

Basis Simplex::basis() const { return {head_, state_}; }

void Simplex::load_basis(const Basis& b) {
    if (static_cast<int>(b.head.size()) != m_ || static_cast<int>(b.state.size()) != n_ + m_)
        throw InvalidArgument("load_basis: basis shape mismatch");
    head_ = b.head;
    state_ = b.state;
    for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == kBasic) continue;
        if (state_[j] == kAtUpper && std::isfinite(hi_[j])) x_[j] = hi_[j];
        else if (state_[j] == kAtLower && std::isfinite(lo_[j])) x_[j] = lo_[j];
        else place_nonbasic(j);
    }
    refactor();
    compute_primal();
}

void Simplex::refactor() {
    updates_since_refactor_ = 0;
    if (m_ == 0) return;
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
        for (const auto& [r, a] : cols_[head_[i]]) basis(r, i) = a;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    Eigen::MatrixXd inv = lu.inverse();
    // Partial pivoting never reports singularity; check the product instead.
    const double err = (basis * inv - Eigen::MatrixXd::Identity(m_, m_)).cwiseAbs().maxCoeff();
    if (std::isfinite(err) && err < 1e-6) {
        binv_ = std::move(inv);
        return;
    }
    // Singular or badly conditioned basis: fall back to the all-logical basis.
    for (int j = 0; j < n_ + m_; ++j)
        if (state_[j] == kBasic) place_nonbasic(j);
    for (int i = 0; i < m_; ++i) {
        head_[i] = n_ + i;
        state_[n_ + i] = kBasic;
    }
    binv_ = -Eigen::MatrixXd::Identity(m_, m_);
}

void Simplex::compute_primal() {
    if (m_ == 0) return;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == kBasic || x_[j] == 0.0) continue;
        for (const auto& [i, a] : cols_[j]) r(i) += a * x_[j];
    }
    Eigen::VectorXd xb = -(binv_ * r);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = xb(i);
}

void Simplex::compute_duals(const Eigen::VectorXd& basic_cost) {
    y_ = binv_.transpose() * basic_cost;
}

double Simplex::column_dot(int j, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (const auto& [i, a] : cols_[j]) s += a * v(i);
    return s;
}

void Simplex::column_ftran(int j, Eigen::VectorXd& out) const {
    out.setZero(m_);
    for (const auto& [i, a] : cols_[j]) out.noalias() += a * binv_.col(i);
}

bool Simplex::ftran_accurate(int j, Eigen::VectorXd& out) {
    column_ftran(j, out);
    if (updates_since_refactor_ == 0) return true;
    // Residual of B * out = a_j; drift here is what turns near-parallel
    // columns (y+ and y- pairs) into a singular basis.
    Eigen::VectorXd res = Eigen::VectorXd::Zero(m_);
    double scale = 1.0;
    for (const auto& [i, a] : cols_[j]) {
        res(i) += a;
        scale = std::max(scale, std::abs(a));
    }
    for (int i = 0; i < m_; ++i)
        if (out(i) != 0.0)
            for (const auto& [r, a] : cols_[head_[i]]) res(r) -= a * out(i);
    if (res.cwiseAbs().maxCoeff() <= 1e-9 * scale * (1.0 + out.cwiseAbs().maxCoeff())) return true;
    refactor();
    compute_primal();
    return false;
}

void Simplex::pivot(int row, int entering, const Eigen::VectorXd& alpha) {
    Eigen::RowVectorXd pr = binv_.row(row) / alpha(row);
    binv_.noalias() -= alpha * pr;
    binv_.row(row) = pr;
    head_[row] = entering;
    state_[entering] = kBasic;
    if (++updates_since_refactor_ >= kRefactorInterval) {
        refactor();
        compute_primal();
    }
}

double Simplex::infeasibility(int var) const {
    const double v = x_[var];
    if (v < lo_[var] - tol_.feasibility * (1.0 + std::abs(lo_[var]))) return lo_[var] - v;
    if (v > hi_[var] + tol_.feasibility * (1.0 + std::abs(hi_[var]))) return v - hi_[var];
    return 0.0;
}

bool Simplex::primal_feasible() const {
    for (int i = 0; i < m_; ++i)
        if (infeasibility(head_[i]) > 0.0) return false;
    return true;
}

Solution Simplex::solve() { return primal(); }

Solution Simplex::resolve() {
    compute_primal();
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_[head_[i]];
    compute_duals(cb);
    bool dual_feasible = true;
    for (int j = 0; j < n_ + m_ && dual_feasible; ++j) {
        if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
        const double d = cost_[j] - column_dot(j, y_);
        const double t = tol_.optimality * (1.0 + std::abs(cost_[j]));
        if ((state_[j] == kAtLower && d < -t) || (state_[j] == kAtUpper && d > t) ||
            (state_[j] == kFree && std::abs(d) > t))
            dual_feasible = false;
    }
    if (dual_feasible && !primal_feasible()) {
        if (auto res = dual()) return *res;
    }
    return primal();
}

std::optional<Solution> Simplex::dual() {
    const long cap = iterations_ + 20L * (n_ + m_) + 1000;
    Eigen::VectorXd cb(m_), rho(m_), alpha(m_);
    for (;;) {
        if (++iterations_ > tol_.max_iterations)
            throw ResourceLimit("simplex iteration limit reached");
        if (iterations_ > cap) return std::nullopt;
        // Leaving row: largest bound violation.
        int r = -1;
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double v = infeasibility(head_[i]);
            if (v > worst) {
                worst = v;
                r = i;
            }
        }
        if (r < 0) return std::nullopt;  // primal feasible: let primal() certify optimality
        for (int i = 0; i < m_; ++i) cb(i) = cost_[head_[i]];
        compute_duals(cb);
        const int leave = head_[r];
        const bool raise = x_[leave] < lo_[leave];
        const double target = raise ? lo_[leave] : hi_[leave];
        rho = binv_.row(r).transpose();

        // Harris two-pass dual ratio test.
        double bound = kInf;
        std::vector<std::pair<int, double>> cand;
        for (int j = 0; j < n_ + m_; ++j) {
            if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
            const double a = column_dot(j, rho);
            if (std::abs(a) <= tol_.pivot) continue;
            // x_leave moves by -a * dx_j; need the sign that heads to target.
            const double s = raise ? -a : a;
            bool ok = false;
            if (state_[j] == kAtLower) ok = s > 0;
            else if (state_[j] == kAtUpper) ok = s < 0;
            else ok = true;
            if (!ok) continue;
            const double d = cost_[j] - column_dot(j, y_);
            double dj = std::abs(d);
            if (state_[j] == kAtLower && d < 0) dj = 0.0;
            if (state_[j] == kAtUpper && d > 0) dj = 0.0;
            cand.push_back({j, a});
            bound = std::min(bound, (dj + tol_.optimality) / std::abs(a));
        }
        if (cand.empty()) {
            Solution s;
            s.status = Status::Infeasible;
            s.x.assign(x_.begin(), x_.begin() + n_);
            s.farkas.assign(rho.data(), rho.data() + m_);
            s.iterations = iterations_;
            return s;
        }
        int q = -1;
        double best = 0.0;
        for (const auto& [j, a] : cand) {
            const double d = cost_[j] - column_dot(j, y_);
            double dj = std::abs(d);
            if (state_[j] == kAtLower && d < 0) dj = 0.0;
            if (state_[j] == kAtUpper && d > 0) dj = 0.0;
            if (dj / std::abs(a) <= bound && std::abs(a) > best) {
                best = std::abs(a);
                q = j;
            }
        }
        if (!ftran_accurate(q, alpha)) continue;
        const double step = (x_[leave] - target) / alpha(r);
        x_[q] += step;
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= alpha(i) * step;
        x_[leave] = target;
        state_[leave] = raise ? kAtLower : kAtUpper;
        pivot(r, q, alpha);
    }
}

Solution Simplex::primal() {
    Eigen::VectorXd cb(m_), alpha(m_);
    int degenerate = 0;
    std::vector<double> d(n_ + m_);
    for (;;) {
        if (++iterations_ > tol_.max_iterations)
            throw ResourceLimit("simplex iteration limit reached");
        bool phase_one = false;
        for (int i = 0; i < m_; ++i) {
            const int v = head_[i];
            const double inf = infeasibility(v);
            if (inf > 0.0) {
                phase_one = true;
                cb(i) = x_[v] < lo_[v] ? -1.0 : 1.0;
            } else {
                cb(i) = 0.0;
            }
        }
        if (!phase_one)
            for (int i = 0; i < m_; ++i) cb(i) = cost_[head_[i]];
        compute_duals(cb);

        const bool bland = degenerate >= kDegenerateBeforeBland;
        int q = -1;
        int dir = 0;
        double best = 0.0;
        for (int j = 0; j < n_ + m_; ++j) {
            if (state_[j] == kBasic || lo_[j] == hi_[j]) continue;
            const double cj = phase_one ? 0.0 : cost_[j];
            const double dj = cj - column_dot(j, y_);
            const double t = tol_.optimality * (1.0 + std::abs(cj));
            int s = 0;
            if (state_[j] == kAtLower && dj < -t) s = 1;
            else if (state_[j] == kAtUpper && dj > t) s = -1;
            else if (state_[j] == kFree && std::abs(dj) > t) s = dj < 0 ? 1 : -1;
            if (s == 0) continue;
            if (bland) {
                q = j;
                dir = s;
                break;
            }
            if (std::abs(dj) > best) {
                best = std::abs(dj);
                q = j;
                dir = s;
            }
        }
        if (q < 0) {
            if (phase_one) {
                Solution s;
                s.status = Status::Infeasible;
                s.x.assign(x_.begin(), x_.begin() + n_);
                s.farkas.assign(y_.data(), y_.data() + m_);
                s.iterations = iterations_;
                return s;
            }
            // Confirm on a fresh factorization before declaring optimality.
            if (updates_since_refactor_ > 0) {
                refactor();
                compute_primal();
                continue;
            }
            return finish(Status::Optimal);
        }

        if (!ftran_accurate(q, alpha)) continue;
        // Basic variable i moves at rate delta_i = -dir * alpha_i per unit step.
        auto rate = [&](int i) { return -dir * alpha(i); };
        auto limit = [&](int i, double slack_tol, double& ratio) -> bool {
            const int v = head_[i];
            const double dl = rate(i);
            if (std::abs(dl) <= tol_.pivot) return false;
            const double tl = tol_.feasibility * (1.0 + std::abs(lo_[v]));
            const double th = tol_.feasibility * (1.0 + std::abs(hi_[v]));
            double target;
            if (dl < 0) {
                if (x_[v] < lo_[v] - tl) return false;
                target = x_[v] > hi_[v] + th ? hi_[v] : lo_[v];
                if (!std::isfinite(target)) return false;
                ratio = (x_[v] - target + slack_tol * (target == lo_[v] ? tl : th)) / -dl;
            } else {
                if (x_[v] > hi_[v] + th) return false;
                target = x_[v] < lo_[v] - tl ? lo_[v] : hi_[v];
                if (!std::isfinite(target)) return false;
                ratio = (target - x_[v] + slack_tol * (target == lo_[v] ? tl : th)) / dl;
            }
            return true;
        };
        double bound = kInf;
        for (int i = 0; i < m_; ++i) {
            double ratio;
            if (limit(i, 1.0, ratio)) bound = std::min(bound, ratio);
        }
        int r = -1;
        double step = kInf;
        if (std::isfinite(bound)) {
            double best_alpha = 0.0;
            for (int i = 0; i < m_; ++i) {
                double ratio;
                if (!limit(i, 0.0, ratio) || ratio > bound) continue;
                const double a = std::abs(alpha(i));
                const bool better = bland ? (r < 0 || (ratio < step - 1e-15) ||
                                             (ratio <= step + 1e-15 && head_[i] < head_[r]))
                                          : a > best_alpha;
                if (better) {
                    best_alpha = a;
                    r = i;
                    step = std::max(ratio, 0.0);
                }
            }
        }
        const double flip = (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) ? hi_[q] - lo_[q] : kInf;
        if (r < 0 && !std::isfinite(flip)) {
            if (phase_one) {
                // Cannot happen in exact arithmetic; refactor and retry once.
                refactor();
                compute_primal();
                if (++degenerate > 1000) throw NumericalError("simplex phase one stalled");
                continue;
            }
            Solution s;
            s.status = Status::Unbounded;
            s.x.assign(x_.begin(), x_.begin() + n_);
            s.ray.assign(n_, 0.0);
            if (q < n_) s.ray[q] = dir;
            for (int i = 0; i < m_; ++i)
                if (head_[i] < n_) s.ray[head_[i]] = rate(i);
            s.iterations = iterations_;
            return s;
        }
        if (flip <= step) {
            for (int i = 0; i < m_; ++i) x_[head_[i]] += rate(i) * flip;
            if (state_[q] == kAtLower) {
                state_[q] = kAtUpper;
                x_[q] = hi_[q];
            } else {
                state_[q] = kAtLower;
                x_[q] = lo_[q];
            }
            degenerate = 0;
            continue;
        }
        degenerate = step < 1e-12 ? degenerate + 1 : 0;
        const int leave = head_[r];
        const double dl = rate(r);
        // Position before the step decides which bound was the target.
        bool to_lower;
        if (dl < 0) to_lower = !(x_[leave] > hi_[leave] + tol_.feasibility * (1.0 + std::abs(hi_[leave])));
        else to_lower = x_[leave] < lo_[leave] - tol_.feasibility * (1.0 + std::abs(lo_[leave]));
        for (int i = 0; i < m_; ++i) x_[head_[i]] += rate(i) * step;
        x_[q] += dir * step;
        if (to_lower) {
            x_[leave] = lo_[leave];
            state_[leave] = kAtLower;
        } else {
            x_[leave] = hi_[leave];
            state_[leave] = kAtUpper;
        }
        pivot(r, q, alpha);
    }
}

Solution Simplex::finish(Status st) {
    Solution s;
    s.status = st;
    s.iterations = iterations_;
    s.x.assign(x_.begin(), x_.begin() + n_);
    double obj = offset_;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
    s.objective = obj;
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_[head_[i]];
    compute_duals(cb);
    s.duals.assign(y_.data(), y_.data() + m_);
    s.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) s.reduced_costs[j] = state_[j] == kBasic ? 0.0 : cost_[j] - column_dot(j, y_);
    return s;
}

ChebyshevCenter chebyshev_center(std::span<const HalfSpace> rows, std::span<const double> lower,
                                 std::span<const double> upper, const Tolerances& tol) {
    const int n = static_cast<int>(lower.size());
    if (static_cast<int>(upper.size()) != n) throw InvalidArgument("chebyshev_center: bound size mismatch");
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.add_variable(0.0, -kInf, kInf);
    const int radius = lp.add_variable(-1.0, 0.0, kInf);
    for (const auto& h : rows) {
        if (static_cast<int>(h.a.size()) != n) throw InvalidArgument("chebyshev_center: row length mismatch");
        double norm = 0.0;
        Row row;
        for (int j = 0; j < n; ++j) {
            norm += h.a[j] * h.a[j];
            if (h.a[j] != 0.0) row.coeffs.push_back({j, h.a[j]});
        }
        const double scale = h.scale.value_or(std::sqrt(norm));
        if (row.coeffs.empty()) {
            if (h.b > tol.feasibility) return {};
            continue;
        }
        row.coeffs.push_back({radius, -scale});
        row.relation = Relation::GreaterEqual;
        row.rhs = h.b;
        lp.add_row(std::move(row));
    }
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(lower[j])) lp.add_row({{{j, 1.0}, {radius, -1.0}}, Relation::GreaterEqual, lower[j]});
        if (std::isfinite(upper[j])) lp.add_row({{{j, -1.0}, {radius, -1.0}}, Relation::GreaterEqual, -upper[j]});
    }
    const Solution sol = solve(lp, tol);
    ChebyshevCenter out;
    if (sol.status == Status::Infeasible) return out;
    if (sol.status == Status::Unbounded) throw InvalidArgument("chebyshev_center: polytope is unbounded");
    out.feasible = true;
    out.center.assign(sol.x.begin(), sol.x.begin() + n);
    out.radius = std::max(0.0, sol.x[radius]);
    return out;
}

void write_text(std::ostream& os, const LinearProgram& lp) {
    const auto precision = os.precision(17);
    os << "minimize";
    for (int j = 0; j < lp.variable_count(); ++j)
        if (lp.objective[j] != 0.0) os << ' ' << (lp.objective[j] >= 0 ? "+" : "") << lp.objective[j] << " x" << j;
    if (lp.objective_offset != 0.0) os << " + " << lp.objective_offset;
    os << "\nsubject to\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& r = lp.rows[i];
        os << "  r" << i << ':';
        for (const auto& [j, a] : r.coeffs) os << ' ' << (a >= 0 ? "+" : "") << a << " x" << j;
        os << (r.relation == Relation::LessEqual ? " <= " : r.relation == Relation::GreaterEqual ? " >= " : " = ")
           << r.rhs << '\n';
    }
    os << "bounds\n";
    for (int j = 0; j < lp.variable_count(); ++j)
        os << "  " << lp.lower[j] << " <= x" << j << " <= " << lp.upper[j] << '\n';
    os.precision(precision);
}

}  // namespace mfpb::lp
