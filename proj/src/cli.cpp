#include "tasep/cli.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "tasep/akernel.hpp"
#include "tasep/fkernel.hpp"
#include "tasep/scaling.hpp"
#include "tasep/sim.hpp"

namespace tasep::cli {

using experiments::Check;
using KV = std::map<std::string, std::string>;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// keys that do not influence results
const std::set<std::string> volatile_keys = {"out", "workers"};

const KV common = {{"seed", "1"}, {"out", "."}, {"workers", "1"}};

// keys read by `compare`, across its experiments
const KV compare_keys = {
    {"experiment", "shock"}, {"M", "1"},        {"alpha", "0.25"}, {"n", "2"},          {"t", "2000"},
    {"eta", "0"},            {"nu", "0.01"},     {"replicas", "20000"}, {"tol", "0.02"}, {"times", "1000,2000,4000"},
    {"bin", "20"},           {"exclude", "0.05"}, {"xi_lo", "-0.5"}, {"labels", "2,3,4,5"}, {"p_lo", "0.02"},
    {"z", "3"},              {"shock_cut", "1"},  {"n_alpha", "200"}, {"n_nu", "200"},     {"alpha_max", "1"},
    {"nu_max", "0.5"}};

std::map<std::string, std::string> quadrature_meta(const ak::LimitOptions& lo) {
    const fk::KernelOptions ko;
    return {{"nystrom_nodes", std::to_string(lo.nodes)},
            {"ray_order", std::to_string(lo.ray_order)},
            {"ray_radius", std::to_string(lo.ray_radius)},
            {"lambda_nodes", std::to_string(lo.lambda_nodes)},
            {"circle_n0", std::to_string(ko.circle.n0)},
            {"circle_tol", std::to_string(ko.circle.tol)},
            {"double_contour_nodes", std::to_string(ko.double_nodes)}};
}

SystemSpec system_of(const ExperimentConfig& c) {
    const double alpha = c.real("alpha");
    if (c.str("M") == "inf") return SystemSpec::infinite(alpha);
    const long M = c.integer("M");
    if (M < 0) throw ConfigError("M must be >= 0 or inf");
    return SystemSpec::finite(int(M), alpha);
}

// t broadcasts when it has one entry
std::vector<SpaceTimePoint> points_of(const ExperimentConfig& c) {
    const auto n = c.integers("n");
    const auto t = c.reals("t");
    if (n.empty()) throw ConfigError("n: need at least one label");
    if (t.size() != 1 && t.size() != n.size()) throw ConfigError("t: need one time or one per label");
    std::vector<SpaceTimePoint> p;
    for (std::size_t k = 0; k < n.size(); ++k) {
        if (n[k] < 1) throw ConfigError("n: labels start at 1");
        const double tk = t.size() == 1 ? t[0] : t[k];
        if (!(tk >= 0.0)) throw ConfigError("t: times must be >= 0");
        p.push_back({n[k], tk});
    }
    return p;
}

long replicas_of(const ExperimentConfig& c) {
    const long r = c.integer("replicas");
    if (r < 1) throw ConfigError("replicas must be >= 1");
    return r;
}

experiments::RunOptions run_of(const ExperimentConfig& c) {
    const long w = c.integer("workers");
    if (w < 1) throw ConfigError("workers must be >= 1");
    return {c.u64("seed"), int(w)};
}

Output from_report(const experiments::Report& r) {
    Output o;
    o.name = r.experiment;
    o.columns = r.columns;
    o.rows = r.rows;
    o.checks = r.checks;
    o.quadrature = quadrature_meta({});
    return o;
}

// shortest text that reads back to the same double
std::string number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string ExperimentConfig::str(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

double ExperimentConfig::real(const std::string& key) const {
    const std::string s = str(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
    }
}

long ExperimentConfig::integer(const std::string& key) const {
    const std::string s = str(key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
    }
}

std::uint64_t ExperimentConfig::u64(const std::string& key) const {
    const std::string s = str(key);
    try {
        std::size_t pos = 0;
        if (!s.empty() && s[0] == '-') throw ConfigError("");
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + s + "'");
    }
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(str(key))) {
        ExperimentConfig tmp;
        tmp.values[key] = item;
        out.push_back(tmp.real(key));
    }
    return out;
}

std::vector<long> ExperimentConfig::integers(const std::string& key) const {
    std::vector<long> out;
    for (const auto& item : split(str(key))) {
        ExperimentConfig tmp;
        tmp.values[key] = item;
        out.push_back(tmp.integer(key));
    }
    return out;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "command=" << command << '\n';
    for (const auto& [k, v] : values)
        if (!volatile_keys.count(k)) os << k << '=' << v << '\n';
    return os.str();
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

KV parse_key_values(std::istream& is) {
    KV out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (k.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out[k] = v;
    }
    return out;
}

KV read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_key_values(f);
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"simulate", "exact", "compare", "tables", "diagram"};
    return c;
}

KV defaults(const std::string& command) {
    KV d = common;
    if (command == "simulate") {
        d.insert({{"M", "1"}, {"alpha", "0.5"}, {"n", "1"}, {"t", "1"}, {"replicas", "10"}});
    } else if (command == "exact") {
        d.insert({{"M", "1"},
                  {"alpha", "0.5"},
                  {"n", "2"},
                  {"t", "2"},
                  {"a0", ""},
                  {"a_lo", "-6"},
                  {"a_hi", "6"},
                  {"tol", "1e-6"},
                  {"tol_free", "1e-8"}});
    } else if (command == "compare") {
        d.insert(compare_keys.begin(), compare_keys.end());
    } else if (command == "tables") {
        d.insert({{"law", "A2"},
                  {"M", "1"},
                  {"kappa", "0"},
                  {"tau", "0"},
                  {"s_lo", "-6"},
                  {"s_hi", "6"},
                  {"s_step", "0.5"},
                  {"nodes", "60"},
                  {"ray_order", "160"},
                  {"tol", "1e-6"},
                  {"endpoint_lo", "-12"},
                  {"endpoint_hi", "14"},
                  {"endpoint_tol", "1e-3"}});
    } else if (command == "diagram") {
        d.insert({{"n_alpha", "200"}, {"n_nu", "200"}, {"alpha_max", "1"}, {"nu_max", "0.5"}});
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    return d;
}

ExperimentConfig make_config(const std::string& command, const std::string& file, const KV& overrides) {
    ExperimentConfig c;
    c.command = command;
    c.values = defaults(command);
    auto apply = [&](const KV& kv, const char* origin) {
        for (const auto& [k, v] : kv) {
            if (!c.values.count(k)) throw ConfigError(std::string(origin) + ": unknown key '" + k + "' for " + command);
            c.values[k] = v;
        }
    };
    if (!file.empty()) apply(read_config_file(file), "config file");
    apply(overrides, "flags");
    return c;
}

bool Output::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<Output> cmd_simulate(const ExperimentConfig& c) {
    const SystemSpec spec = system_of(c);
    const auto pts = points_of(c);
    const long R = replicas_of(c);
    const auto run = run_of(c);
    const sim::Ensemble e = sim::sample_positions(spec, pts, R, run.seed, run.workers);
    Output o;
    o.name = "simulate";
    o.columns = {"replica", "n", "t", "x"};
    for (long r = 0; r < e.replicas; ++r)
        for (std::size_t q = 0; q < pts.size(); ++q)
            o.rows.push_back({double(r), double(pts[q].n), pts[q].t, double(e.at(r, q))});
    o.checks.push_back({"rows = replicas x queries", double(o.rows.size()), double(R * long(pts.size())),
                        o.rows.size() == std::size_t(R) * pts.size(), ""});
    if (e.wall_window > 0) o.quadrature["wall_window"] = std::to_string(e.wall_window);
    return {o};
}

std::vector<Output> cmd_exact(const ExperimentConfig& c) {
    const SystemSpec spec = system_of(c);
    const auto pts = points_of(c);
    std::vector<long> a0 = c.str("a0").empty() ? std::vector<long>(pts.size(), 0) : c.integers("a0");
    if (a0.size() != pts.size()) throw ConfigError("a0: need one base threshold per point");
    const long lo = c.integer("a_lo"), hi = c.integer("a_hi");
    if (hi < lo) throw ConfigError("a_hi < a_lo");
    const double tol = c.real("tol"), tol_free = c.real("tol_free");
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (!is_space_like(pts[i], pts[j])) throw ConfigError("exact: points must be mutually space-like");

    const bool shock = !spec.is_infinite() &&
                       std::all_of(pts.begin(), pts.end(), [&](const SpaceTimePoint& p) { return p.n >= spec.M(); });
    const bool free_col = pts.size() == 1 && pts[0].n == 1 && !spec.is_infinite();
    const fk::KernelVariant base = spec.is_infinite() ? fk::KernelVariant::Minf : fk::KernelVariant::general;

    Output o;
    o.name = "exact";
    o.columns = {"offset", to_string(base)};
    if (shock) o.columns.push_back("shock");
    if (free_col) o.columns.push_back("free_particle");
    double max_shock = 0.0, max_free = 0.0, worst_rise = 0.0, worst_range = 0.0;
    double prev = 2.0;
    for (long d = lo; d <= hi; ++d) {
        std::vector<long> th(pts.size());
        for (std::size_t k = 0; k < pts.size(); ++k) th[k] = a0[k] + d;
        const SpaceLikeSequence seq = sort_space_like(pts, th);
        std::vector<double> row{double(d)};
        const double p = fk::joint_probability(base, seq, spec);
        row.push_back(p);
        if (shock) {
            const double q = fk::joint_probability(fk::KernelVariant::shock, seq, spec);
            row.push_back(q);
            max_shock = std::max(max_shock, std::abs(p - q));
        }
        if (free_col) {
            // the first particle jumps freely at rate v_1
            const long k = th[0] - spec.initial_position(1);
            const boost::math::poisson_distribution<double> P(spec.jump_rate(1) * pts[0].t);
            const double f = k <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(P, double(k - 1)));
            row.push_back(f);
            max_free = std::max(max_free, std::abs(p - f));
        }
        worst_rise = std::max(worst_rise, p - prev);
        worst_range = std::max({worst_range, -p, p - 1.0});
        prev = p;
        o.rows.push_back(row);
    }
    o.checks.push_back({"nonincreasing in a (largest rise)", worst_rise, 1e-9, worst_rise <= 1e-9, ""});
    o.checks.push_back({"within [0,1] (largest excursion)", worst_range, 1e-9, worst_range <= 1e-9, ""});
    if (shock) o.checks.push_back({"|general - shock|", max_shock, tol, max_shock <= tol, ""});
    if (free_col) o.checks.push_back({"|general - Poisson tail|", max_free, tol_free, max_free <= tol_free, ""});
    const fk::KernelOptions ko;
    o.quadrature = quadrature_meta({});
    o.quadrature["window_tail_bound"] = "0";
    o.quadrature["circle_n_max"] = std::to_string(ko.circle.n_max);
    return {o};
}

std::vector<Output> cmd_compare(const ExperimentConfig& c) {
    const std::string e = c.str("experiment");
    const auto run = run_of(c);
    if (e == "diagram") {
        ExperimentConfig d;
        d.command = "diagram";
        d.values = defaults("diagram");
        for (auto& [k, v] : d.values)
            if (c.has(k)) v = c.str(k);
        return cmd_diagram(d);
    }
    const long R = replicas_of(c);
    const double tol = c.real("tol");
    if (e == "exact_mc") {
        experiments::ExactVsMc x;
        x.M = int(c.integer("M"));
        x.alpha = c.real("alpha");
        x.n = c.integer("n");
        x.t = c.real("t");
        x.replicas = R;
        x.p_lo = c.real("p_lo");
        x.z = c.real("z");
        return {from_report(experiments::exact_vs_mc(x, run))};
    }
    if (e == "shock") {
        experiments::ShockLaw x;
        x.alpha = c.real("alpha");
        x.t = c.real("t");
        x.eta = c.real("eta");
        x.replicas = R;
        x.tol = tol;
        return {from_report(experiments::shock_law(x, run))};
    }
    if (e == "diffusion") {
        experiments::ShockDiffusion x;
        x.alpha = c.real("alpha");
        x.times = c.reals("times");
        x.replicas = R;
        x.shock_cut = c.real("shock_cut");
        x.rel_tol = tol;
        return {from_report(experiments::shock_diffusion(x, run))};
    }
    if (e == "density") {
        experiments::DensityProfile x;
        x.alpha = c.real("alpha");
        x.t = c.real("t");
        x.xi_lo = c.real("xi_lo");
        x.bin = c.integer("bin");
        x.replicas = R;
        x.exclude = c.real("exclude");
        x.tol = tol;
        return {from_report(experiments::density_profile(x, run))};
    }
    if (e == "burke") {
        experiments::Burke x;
        x.alpha = c.real("alpha");
        x.t = c.real("t");
        x.labels = c.integers("labels");
        x.replicas = R;
        x.level = tol;
        return {from_report(experiments::burke(x, run))};
    }
    if (e == "dbm") {
        experiments::DbmRegion x;
        x.M = int(c.integer("M"));
        x.alpha = c.real("alpha");
        x.t = c.real("t");
        x.nu = c.real("nu");
        x.replicas = R;
        x.tol = tol;
        return {from_report(experiments::dbm_region(x, run))};
    }
    if (e == "wall") {
        experiments::Wall x;
        x.t = c.real("t");
        x.n = c.integer("n");
        x.replicas = R;
        x.tol = tol;
        return {from_report(experiments::wall(x, run))};
    }
    throw ConfigError("compare: unknown experiment '" + e +
                      "' (exact_mc, shock, diffusion, density, burke, dbm, wall, diagram)");
}

std::vector<Output> cmd_tables(const ExperimentConfig& c) {
    ak::LimitLaw law;
    try {
        law.kind = ak::parse_law_kind(c.str("law"));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    law.M = int(c.integer("M"));
    law.kappa = c.real("kappa");
    law.tau = {c.real("tau")};
    if (law.kind == ak::LawKind::aGUE) law.n = {c.integer("M")};
    law.options.nodes = int(c.integer("nodes"));
    law.options.ray_order = int(c.integer("ray_order"));
    ak::LimitLaw fine = law;
    fine.options.nodes *= 2;
    fine.options.ray_order *= 2;
    fine.options.lambda_nodes *= 2;

    const double lo = c.real("s_lo"), hi = c.real("s_hi"), step = c.real("s_step");
    if (!(step > 0.0) || hi < lo) throw ConfigError("tables: need s_lo <= s_hi and s_step > 0");
    const double tol = c.real("tol"), etol = c.real("endpoint_tol");
    const bool reference = law.kind == ak::LawKind::Trans && law.M == 0;
    ak::LimitLaw ref = law;
    ref.kind = ak::LawKind::A21;

    Output o;
    o.name = "tables_" + ak::to_string(law.kind);
    o.columns = {"s", "cdf", "cdf_doubled_nodes", "delta"};
    if (reference) o.columns.push_back("A21");
    double max_delta = 0.0, max_ref = 0.0, worst_drop = 0.0, worst_range = 0.0, prev = -1.0;
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
        const double s = lo + double(k) * step;
        const double f = ak::limit_cdf(law, {s});
        const double g = ak::limit_cdf(fine, {s});
        std::vector<double> row{s, f, g, std::abs(f - g)};
        max_delta = std::max(max_delta, std::abs(f - g));
        if (reference) {
            const double a = ak::limit_cdf(ref, {s});
            row.push_back(a);
            max_ref = std::max(max_ref, std::abs(f - a));
        }
        if (k > 0) worst_drop = std::max(worst_drop, prev - f);
        worst_range = std::max({worst_range, -f, f - 1.0});
        prev = f;
        o.rows.push_back(row);
    }
    const double e_lo = ak::limit_cdf(law, {c.real("endpoint_lo")});
    const double e_hi = 1.0 - ak::limit_cdf(law, {c.real("endpoint_hi")});
    o.checks.push_back({"monotone (largest drop)", worst_drop, 1e-9, worst_drop <= 1e-9, ""});
    o.checks.push_back({"within [0,1] (largest excursion)", worst_range, 1e-9, worst_range <= 1e-9, ""});
    o.checks.push_back({"F(endpoint_lo)", e_lo, etol, std::abs(e_lo) <= etol, "s=" + c.str("endpoint_lo")});
    o.checks.push_back({"1 - F(endpoint_hi)", e_hi, etol, std::abs(e_hi) <= etol, "s=" + c.str("endpoint_hi")});
    o.checks.push_back({"node doubling delta", max_delta, tol, max_delta <= tol, ""});
    if (reference) o.checks.push_back({"|Trans(M=0) - A21|", max_ref, tol, max_ref <= tol, ""});
    o.quadrature = quadrature_meta(law.options);
    o.quadrature["law"] = law.describe();
    return {o};
}

std::vector<Output> cmd_diagram(const ExperimentConfig& c) {
    scaling::DiagramGrid g;
    g.n_alpha = int(c.integer("n_alpha"));
    g.n_nu = int(c.integer("n_nu"));
    g.alpha_max = c.real("alpha_max");
    g.nu_max = c.real("nu_max");
    if (g.n_alpha < 1 || g.n_nu < 1 || !(g.alpha_max > 0.0) || !(g.nu_max > 0.0))
        throw ConfigError("diagram: grid sizes and ranges must be positive");
    Output o;
    o.name = "diagram";
    o.columns = {"alpha", "nu", "regime", "boundary"};
    long unclassified = 0, boundary = 0;
    for (int i = 1; i <= g.n_alpha; ++i)
        for (int j = 1; j <= g.n_nu; ++j) {
            const double a = g.alpha_max * i / g.n_alpha, nu = g.nu_max * j / g.n_nu;
            try {
                const scaling::Regime r = scaling::classify(a, nu);
                boundary += r.boundary;
                o.rows.push_back({a, nu, double(int(r.tag)), r.boundary ? 1.0 : 0.0});
            } catch (const Error&) {
                ++unclassified;
            }
        }
    o.checks.push_back({"unclassified cells", double(unclassified), 0.0, unclassified == 0,
                        std::to_string(boundary) + " boundary cells"});
    std::string legend;
    for (int k = 0; k <= int(scaling::RegimeTag::Wall); ++k)
        legend += (k ? " " : "") + std::to_string(k) + "=" + scaling::to_string(scaling::RegimeTag(k));
    o.quadrature["regime_codes"] = legend;
    return {o};
}

std::vector<Output> run_command(const ExperimentConfig& c) {
    try {
        if (c.command == "simulate") return cmd_simulate(c);
        if (c.command == "exact") return cmd_exact(c);
        if (c.command == "compare") return cmd_compare(c);
        if (c.command == "tables") return cmd_tables(c);
        if (c.command == "diagram") return cmd_diagram(c);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown command '" + c.command + "'");
}

void write_csv(const ExperimentConfig& c, const Output& o, std::ostream& os) {
    os << "# tool: tasep\n# version: " << version << "\n# command: " << c.command << "\n# config_hash: " << c.hash()
       << "\n# seed: " << c.str("seed") << '\n';
    for (const auto& [k, v] : o.quadrature) os << "# quadrature." << k << ": " << v << '\n';
    for (const auto& [k, v] : c.values)
        if (!volatile_keys.count(k)) os << "# config." << k << ": " << v << '\n';
    for (const auto& ch : o.checks)
        os << "# check: " << (ch.pass ? "PASS" : "FAIL") << " | " << ch.name << " | value " << number(ch.value)
           << " | tolerance " << number(ch.tolerance) << (ch.detail.empty() ? "" : " | " + ch.detail) << '\n';
    for (std::size_t k = 0; k < o.columns.size(); ++k) os << (k ? "," : "") << o.columns[k];
    os << '\n';
    for (const auto& row : o.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << number(row[k]);
        os << '\n';
    }
}

void write_json(const ExperimentConfig& c, const Output& o, std::ostream& os) {
    nlohmann::ordered_json j;
    j["schema"] = "tasep.output/1";
    j["meta"] = {{"tool", "tasep"},        {"version", version}, {"command", c.command},
                 {"config_hash", c.hash()}, {"seed", c.u64("seed")}};
    for (const auto& [k, v] : o.quadrature) j["meta"]["quadrature"][k] = v;
    for (const auto& [k, v] : c.values)
        if (!volatile_keys.count(k)) j["config"][k] = v;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& ch : o.checks)
        j["checks"].push_back({{"name", ch.name},
                               {"value", ch.value},
                               {"tolerance", ch.tolerance},
                               {"pass", ch.pass},
                               {"detail", ch.detail}});
    j["columns"] = o.columns;
    j["rows"] = o.rows;
    os << j.dump(1) << '\n';
}

int execute(const ExperimentConfig& c, std::ostream& log) {
    const std::vector<Output> outs = run_command(c);
    const std::filesystem::path dir = c.str("out");
    std::filesystem::create_directories(dir);
    bool ok = true;
    for (const Output& o : outs) {
        std::ofstream csv(dir / (o.name + ".csv")), json(dir / (o.name + ".json"));
        if (!csv || !json) throw Error("cannot write outputs to '" + dir.string() + "'");
        write_csv(c, o, csv);
        write_json(c, o, json);
        for (const auto& ch : o.checks)
            log << (ch.pass ? "PASS " : "FAIL ") << o.name << ": " << ch.name << " = " << number(ch.value)
                << " (tolerance " << number(ch.tolerance) << ")" << (ch.detail.empty() ? "" : ", " + ch.detail)
                << '\n';
        log << "wrote " << (dir / (o.name + ".csv")).string() << " and .json\n";
        ok = ok && o.pass();
    }
    return ok ? 0 : 1;
}

}  // namespace tasep::cli
