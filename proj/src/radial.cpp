#include "mfpb/radial.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "mfpb/error.hpp"

namespace mfpb {

namespace {

void append_bytes(std::string& key, double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof v);
    key.append(buf, sizeof buf);
}

std::string vector_key(const std::vector<std::vector<double>>& vs) {
    std::string key;
    for (const auto& v : vs) {
        for (double x : v) append_bytes(key, x);
        key.push_back('|');
    }
    return key;
}

struct MergedTerm {
    std::vector<double> weight;
    double constant = 0.0;
    std::vector<std::vector<double>> slopes;  // sorted, distinct
};

// Radial terms with identical slope sets are the same function up to the
// scalar coefficient, so their coefficients add.
std::vector<MergedTerm> merge_terms(const SlackTemplate& tmpl) {
    const int m = tmpl.instrument_count();
    std::vector<MergedTerm> out;
    std::map<std::vector<std::vector<double>>, std::size_t> index;
    for (const auto& t : tmpl.terms()) {
        std::vector<std::vector<double>> slopes;
        for (const auto& p : t.pieces) {
            auto s = p.slope;
            for (double& x : s)
                if (x == 0.0) x = 0.0;
            slopes.push_back(std::move(s));
        }
        std::sort(slopes.begin(), slopes.end());
        slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
        const bool all_zero = slopes.size() == 1 &&
                              std::all_of(slopes[0].begin(), slopes[0].end(), [](double x) { return x == 0.0; });
        if (all_zero) continue;
        auto it = index.find(slopes);
        if (it == index.end()) {
            index.emplace(slopes, out.size());
            out.push_back({std::vector<double>(m, 0.0), 0.0, std::move(slopes)});
            it = index.find(out.back().slopes);
        }
        auto& mt = out[it->second];
        for (int j = 0; j < m; ++j) mt.weight[j] += t.weight[j];
        mt.constant += t.constant;
    }
    // Drop terms whose coefficient vanished identically after merging.
    std::erase_if(out, [](const MergedTerm& t) {
        return t.constant == 0.0 && std::all_of(t.weight.begin(), t.weight.end(), [](double w) { return w == 0.0; });
    });
    return out;
}

}  // namespace

TupleEnumerator::TupleEnumerator(std::vector<int> sizes) : sizes_(std::move(sizes)), current_(sizes_.size(), 0) {
    for (int s : sizes_)
        if (s < 1) throw InvalidArgument("tuple enumeration needs nonempty index sets");
}

bool TupleEnumerator::next(std::vector<int>& tuple) {
    if (done_) return false;
    if (!started_) {
        started_ = true;
        tuple = current_;
        return true;
    }
    std::size_t k = 0;
    while (k < sizes_.size()) {
        if (++current_[k] < sizes_[k]) break;
        current_[k] = 0;
        ++k;
    }
    if (k == sizes_.size()) {
        done_ = true;
        return false;
    }
    tuple = current_;
    return true;
}

double TupleEnumerator::count() const {
    double c = 1.0;
    for (int s : sizes_) c *= s;
    return c;
}

bool cone_interior_empty(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) return false;
    const int d = static_cast<int>(vectors.front().size());
    lp::LinearProgram prog;
    lp::Row simplex{{}, lp::Relation::Equal, 1.0};
    for (std::size_t v = 0; v < vectors.size(); ++v) {
        prog.add_variable(0.0, 0.0, lp::kInf);
        simplex.coeffs.push_back({static_cast<int>(v), 1.0});
    }
    prog.add_row(std::move(simplex));
    for (int c = 0; c < d; ++c) {
        lp::Row r{{}, lp::Relation::LessEqual, 0.0};
        for (std::size_t v = 0; v < vectors.size(); ++v)
            if (vectors[v][c] != 0.0) r.coeffs.push_back({static_cast<int>(v), vectors[v][c]});
        if (!r.coeffs.empty()) prog.add_row(std::move(r));
    }
    return lp::solve(prog).status == lp::Status::Optimal;
}

RadialSystem generate_radial_system(const SlackTemplate& tmpl, const RadialOptions& opts) {
    RadialSystem sys;
    sys.dimension = tmpl.dimension();
    sys.instruments = tmpl.instrument_count();
    const int d = sys.dimension;
    const int m = sys.instruments;
    const auto terms = merge_terms(tmpl);
    if (terms.empty()) return sys;

    std::vector<int> sizes;
    for (const auto& t : terms) sizes.push_back(static_cast<int>(t.slopes.size()));
    TupleEnumerator tuples(sizes);
    if (tuples.count() > opts.tuple_cap)
        throw ResourceLimit("radial constraints: " + std::to_string(tuples.count()) +
                            " piece tuples exceed the cap");

    std::unordered_map<std::string, bool> emptiness;
    std::unordered_set<std::string> seen_blocks;
    std::vector<int> tuple;
    while (tuples.next(tuple)) {
        ++sys.tuples_visited;
        // Differences between the chosen piece and its competitors.
        std::vector<std::vector<double>> diffs;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto& chosen = terms[k].slopes[tuple[k]];
            for (std::size_t i = 0; i < terms[k].slopes.size(); ++i) {
                if (static_cast<int>(i) == tuple[k]) continue;
                std::vector<double> v(d);
                bool nonzero = false;
                for (int c = 0; c < d; ++c) {
                    v[c] = chosen[c] - terms[k].slopes[i][c];
                    if (v[c] == 0.0) v[c] = 0.0;
                    nonzero |= v[c] != 0.0;
                }
                if (nonzero) diffs.push_back(std::move(v));
            }
        }
        std::sort(diffs.begin(), diffs.end());
        diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
        const std::string akey = vector_key(diffs);
        auto em = emptiness.find(akey);
        if (em == emptiness.end()) em = emptiness.emplace(akey, cone_interior_empty(diffs)).first;
        if (em->second) {
            ++sys.tuples_skipped;
            continue;
        }
        // Row c: sum_j y_j W[c][j] - sum_v eta_v v_c >= -Z[c]
        std::vector<std::vector<double>> w(d, std::vector<double>(m, 0.0));
        std::vector<double> z(d, 0.0);
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const auto& a = terms[k].slopes[tuple[k]];
            for (int c = 0; c < d; ++c) {
                if (a[c] == 0.0) continue;
                for (int j = 0; j < m; ++j) w[c][j] += terms[k].weight[j] * a[c];
                z[c] += terms[k].constant * a[c];
            }
        }
        std::string bkey = akey;
        for (int c = 0; c < d; ++c) {
            for (int j = 0; j < m; ++j) append_bytes(bkey, w[c][j]);
            append_bytes(bkey, z[c]);
        }
        if (!seen_blocks.insert(bkey).second) continue;

        const int eta0 = m + sys.aux_count;
        bool any_row = false;
        for (int c = 0; c < d; ++c) {
            lp::Row r{{}, lp::Relation::GreaterEqual, -z[c]};
            for (int j = 0; j < m; ++j)
                if (w[c][j] != 0.0) r.coeffs.push_back({j, w[c][j]});
            for (std::size_t v = 0; v < diffs.size(); ++v)
                if (diffs[v][c] != 0.0) r.coeffs.push_back({eta0 + static_cast<int>(v), -diffs[v][c]});
            if (r.coeffs.empty() && r.rhs <= 0.0) continue;  // 0 >= nonpositive: vacuous
            sys.rows.push_back(std::move(r));
            any_row = true;
            if (sys.rows.size() > opts.row_cap)
                throw ResourceLimit("radial constraints: row cap of " + std::to_string(opts.row_cap) + " exceeded");
        }
        if (any_row) {
            sys.aux_count += static_cast<int>(diffs.size());
            sys.tuple_index.push_back(tuple);
        }
    }
    return sys;
}

bool RadialSystem::admits(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != instruments) throw InvalidArgument("radial system: portfolio length mismatch");
    lp::LinearProgram prog;
    for (int v = 0; v < aux_count; ++v) prog.add_variable(0.0, 0.0, lp::kInf);
    for (const auto& r : rows) {
        lp::Row out{{}, r.relation, r.rhs};
        for (const auto& [j, a] : r.coeffs) {
            if (j < instruments) out.rhs -= a * y[j];
            else out.coeffs.push_back({j - instruments, a});
        }
        if (out.coeffs.empty()) {
            if (out.rhs > 1e-9 * (1.0 + std::abs(r.rhs))) return false;
            continue;
        }
        prog.add_row(std::move(out));
    }
    if (prog.rows.empty()) return true;
    return lp::solve(prog).status == lp::Status::Optimal;
}

}  // namespace mfpb
