#include "mfpb/json_io.hpp"

#include <cmath>
#include <fstream>

#include "mfpb/error.hpp"
#include "mfpb/payoff_spec.hpp"

namespace mfpb::io {

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("json: missing field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("json: field '") + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.is_object() && j.contains(key) ? get<T>(j, key) : fallback;
}

json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double read_number(const json& j, const char* key) {
    const json& v = field(j, key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw InvalidArgument(std::string("json: field '") + key + "' must be a number");
}

Eigen::MatrixXd read_matrix(const json& j, const char* key, int rows) {
    const auto data = get<std::vector<std::vector<double>>>(j, key);
    if (static_cast<int>(data.size()) != rows) throw InvalidArgument(std::string("json: '") + key + "' has the wrong row count");
    const int cols = data.empty() ? 0 : static_cast<int>(data.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(data[r].size()) != cols) throw InvalidArgument(std::string("json: '") + key + "' is ragged");
        for (int c = 0; c < cols; ++c) m(r, c) = data[r][c];
    }
    return m;
}

CpwaFunction payoff_from_json(const json& j, int d) {
    if (j.is_string()) return parse_payoff(j.get<std::string>(), d);
    auto f = cpwa_from_json(j);
    if (f.dimension() != d) throw InvalidArgument("json: payoff dimension differs from the instance");
    return f;
}

gen::MarketModel model_from_json(const json& j) {
    gen::MarketModel m;
    m.marginal.mu = get<std::vector<double>>(j, "mu");
    const int d = m.marginal.dimension();
    m.marginal.sigma2 = get<std::vector<double>>(j, "sigma2");
    const json& up = field(j, "upper");
    m.marginal.upper = up.is_number() ? std::vector<double>(d, up.get<double>()) : get<std::vector<double>>(j, "upper");
    auto& c = m.copula;
    c.loadings = j.contains("loadings") ? read_matrix(j, "loadings", d) : Eigen::MatrixXd(d, 0);
    const int k = static_cast<int>(c.loadings.cols());
    if (j.contains("factor_var")) {
        const auto v = get<std::vector<double>>(j, "factor_var");
        c.factor_var = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else {
        c.factor_var = Eigen::VectorXd::Ones(k);
    }
    if (j.contains("idio")) {
        const auto v = get<std::vector<double>>(j, "idio");
        c.idio = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (c.factor_var.size() == k) {
        // Unit diagonal by default.
        c.idio = (1.0 - (c.loadings * c.factor_var.asDiagonal() * c.loadings.transpose()).diagonal().array()).matrix();
    }
    c.nu = j.contains("nu") ? read_number(j, "nu") : std::numeric_limits<double>::infinity();
    m.validate();
    return m;
}

}  // namespace

json to_json(const CpwaFunction& f) {
    json terms = json::array();
    for (const auto& t : f.terms()) {
        json pieces = json::array();
        for (const auto& p : t.pieces) pieces.push_back({{"a", p.slope}, {"b", p.offset}});
        terms.push_back({{"sign", t.sign}, {"pieces", std::move(pieces)}});
    }
    return {{"d", f.dimension()}, {"terms", std::move(terms)}};
}

CpwaFunction cpwa_from_json(const json& j) {
    const int d = get<int>(j, "d");
    std::vector<CpwaTerm> terms;
    for (const auto& t : field(j, "terms")) {
        CpwaTerm term{get<int>(t, "sign"), {}};
        for (const auto& p : field(t, "pieces"))
            term.pieces.push_back({get<std::vector<double>>(p, "a"), get<double>(p, "b")});
        terms.push_back(std::move(term));
    }
    return CpwaFunction(d, std::move(terms));  // validates shapes
}

json to_json(const MarketInstance& m) {
    json ins = json::array();
    for (int j = 0; j < m.instrument_count(); ++j) {
        ins.push_back({{"name", j < static_cast<int>(m.names.size()) ? m.names[j] : "g" + std::to_string(j + 1)},
                       {"payoff", to_json(m.payoffs[j])},
                       {"bid", m.bid[j]},
                       {"ask", m.ask[j]}});
    }
    json out = {{"dimension", m.dimension},
                {"domain", m.domain == DomainKind::Box ? "box" : "orthant"},
                {"instruments", std::move(ins)}};
    if (m.domain == DomainKind::Box) out["upper"] = m.upper;
    return out;
}

MarketInstance instance_from_json(const json& j) {
    MarketInstance m;
    m.dimension = get<int>(j, "dimension");
    const auto domain = get_or<std::string>(j, "domain", "box");
    if (domain == "box") {
        m.domain = DomainKind::Box;
        const json& up = field(j, "upper");
        m.upper = up.is_number() ? std::vector<double>(m.dimension, up.get<double>())
                                 : get<std::vector<double>>(j, "upper");
    } else if (domain == "orthant") {
        m.domain = DomainKind::Orthant;
    } else {
        throw InvalidArgument("json: domain must be 'box' or 'orthant'");
    }
    for (const auto& i : field(j, "instruments")) {
        m.names.push_back(get_or<std::string>(i, "name", "g" + std::to_string(m.names.size() + 1)));
        m.payoffs.push_back(payoff_from_json(field(i, "payoff"), m.dimension));
        m.bid.push_back(get<double>(i, "bid"));
        m.ask.push_back(get<double>(i, "ask"));
    }
    m.validate();
    return m;
}

json to_json(const DiscreteMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms) atoms.push_back({{"x", a.x}, {"mass", a.mass}});
    return {{"atoms", std::move(atoms)}, {"value", mu.value}};
}

json to_json(const Portfolio& p) { return {{"cash", p.cash}, {"units", p.units}}; }

json to_json(const OptionChain& c) {
    return {{"strikes", c.strikes},
            {"call", {{"bid", c.call_bid}, {"ask", c.call_ask}}},
            {"put", {{"bid", c.put_bid}, {"ask", c.put_ask}}},
            {"xbar", c.xbar}};
}

OptionChain chain_from_json(const json& j) {
    OptionChain c;
    c.strikes = get<std::vector<double>>(j, "strikes");
    c.call_bid = get<std::vector<double>>(field(j, "call"), "bid");
    c.call_ask = get<std::vector<double>>(field(j, "call"), "ask");
    c.put_bid = get<std::vector<double>>(field(j, "put"), "bid");
    c.put_ask = get<std::vector<double>>(field(j, "put"), "ask");
    c.xbar = get_or<double>(j, "xbar", 0.0);
    c.validate();
    return c;
}

json to_json(const RepairResult& r) {
    return {{"adjusted", to_json(r.adjusted)},
            {"adjustments",
             {{"call_minus", r.call_minus}, {"call_plus", r.call_plus}, {"put_minus", r.put_minus}, {"put_plus", r.put_plus}}},
            {"total", r.total},
            {"adjusted_quotes", r.adjusted_quotes},
            {"max_change", r.max_change},
            {"certificate", {{"support", r.support}, {"mass", r.mass}, {"min_mass", r.min_mass}}}};
}

json to_json(const BoundsResult& r, bool with_history) {
    json out = {{"status", to_string(r.status)},
                {"lower", number_or_string(r.lower)},
                {"upper", number_or_string(r.upper)},
                {"cash", r.cash},
                {"units", r.units},
                {"support", r.support},
                {"initial_lower", number_or_string(r.initial_lower)},
                {"box", r.box},
                {"default_box", r.default_box},
                {"heuristic_assisted", r.heuristic_assisted},
                {"iterations", r.iterations},
                {"lp_solves", r.lp_solves},
                {"milp_solves", r.milp_solves},
                {"milp_nodes", r.milp_nodes},
                {"seconds", r.seconds}};
    if (with_history) {
        json h = json::array();
        for (const auto& it : r.history)
            h.push_back({{"lower", number_or_string(it.lower)},
                         {"upper", number_or_string(it.upper)},
                         {"slack", it.slack},
                         {"radius", it.radius},
                         {"cuts", it.cuts}});
        out["history"] = std::move(h);
    }
    return out;
}

json to_json(const gen::MarketModel& m) {
    std::vector<std::vector<double>> loadings(m.copula.loadings.rows());
    for (Eigen::Index r = 0; r < m.copula.loadings.rows(); ++r)
        for (Eigen::Index c = 0; c < m.copula.loadings.cols(); ++c) loadings[r].push_back(m.copula.loadings(r, c));
    return {{"mu", m.marginal.mu},
            {"sigma2", m.marginal.sigma2},
            {"upper", m.marginal.upper},
            {"loadings", loadings},
            {"factor_var", std::vector<double>(m.copula.factor_var.begin(), m.copula.factor_var.end())},
            {"idio", std::vector<double>(m.copula.idio.begin(), m.copula.idio.end())},
            {"nu", number_or_string(m.copula.nu)}};
}

MarketSpec market_spec_from_json(const json& j) {
    MarketSpec spec;
    const auto seed = get_or<std::uint64_t>(j, "seed", 1);
    const auto samples = get_or<long>(j, "mc_samples", 100000);
    if (samples < 1) throw InvalidArgument("json: mc_samples must be positive");
    if (j.contains("preset")) {
        const auto preset = get<std::string>(j, "preset");
        if (preset == "exp1" || preset == "single") {
            spec.family = gen::exp1_family(seed, samples);
            if (preset == "single") spec.family.models.resize(1);
            spec.instruments = gen::exp1_instruments();
        } else if (preset == "exp2") {
            const int d = get_or<int>(j, "dimension", 60);
            spec.family = gen::exp2_family(seed, d, samples);
            spec.instruments = gen::exp2_instruments(seed, d);
        } else {
            throw InvalidArgument("json: unknown preset '" + preset + "'");
        }
    } else {
        for (const auto& m : field(j, "models")) spec.family.models.push_back(model_from_json(m));
        if (spec.family.models.empty()) throw InvalidArgument("json: 'models' is empty");
        spec.family.seed = seed;
        spec.family.mc_samples = samples;
        const int d = spec.family.models.front().dimension();
        for (const auto& i : field(j, "instruments")) {
            gen::Instrument ins;
            ins.payoff = payoff_from_json(field(i, "payoff"), d);
            ins.name = get_or<std::string>(i, "name", "g" + std::to_string(spec.instruments.size() + 1));
            ins.category = get_or<std::string>(i, "category", "other");
            spec.instruments.push_back(std::move(ins));
        }
    }
    if (j.contains("categories")) spec.instruments = gen::select(spec.instruments, get<std::vector<std::string>>(j, "categories"));
    if (spec.instruments.empty()) throw InvalidArgument("json: no instruments selected");
    return spec;
}

json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace mfpb::io
