#include "tasep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "tasep/fkernel.hpp"
#include "tasep/hydro.hpp"
#include "tasep/scaling.hpp"
#include "tasep/sim.hpp"

namespace tasep::experiments {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::vector<double> to_double(const std::vector<long>& v) { return {v.begin(), v.end()}; }

// The CDF evaluated once per distinct argument; samples are lattice valued.
std::function<double(double)> memoized(std::function<double(double)> f) {
    auto cache = std::make_shared<std::map<double, double>>();
    return [f = std::move(f), cache](double x) {
        auto it = cache->find(x);
        if (it != cache->end()) return it->second;
        const double v = f(x);
        cache->emplace(x, v);
        return v;
    };
}

}  // namespace

bool Report::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void Report::add(const std::string& name, double value, double tolerance, bool ok, const std::string& detail) {
    checks.push_back({name, value, tolerance, ok, detail});
}

double ks_distance(std::vector<double> s, const std::function<double(double)>& cdf, const std::vector<double>& jumps) {
    if (s.empty()) throw InvalidArgument("ks_distance: empty sample");
    std::sort(s.begin(), s.end());
    const double n = double(s.size());
    auto left = [&](double x) { return cdf(x - 1e-12 * std::max(1.0, std::abs(x))); };
    auto is_jump = [&](double x) { return std::find(jumps.begin(), jumps.end(), x) != jumps.end(); };
    double d = 0.0;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        const double f = cdf(s[i]);
        const double fl = is_jump(s[i]) ? left(s[i]) : f;
        d = std::max({d, std::abs(f - double(j) / n), std::abs(fl - double(i) / n)});
        i = j;
    }
    for (double x : jumps) {
        const double below = double(std::lower_bound(s.begin(), s.end(), x) - s.begin()) / n;
        const double upto = double(std::upper_bound(s.begin(), s.end(), x) - s.begin()) / n;
        d = std::max({d, std::abs(left(x) - below), std::abs(cdf(x) - upto)});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

double ks_two_sample_pvalue(double d, long n1, long n2) {
    const double ne = double(n1) * double(n2) / double(n1 + n2);
    const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    if (lam < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lam * lam);
        q += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

Report exact_vs_mc(const ExactVsMc& c, const RunOptions& run) {
    Report r;
    r.experiment = "exact_vs_mc";
    r.columns = {"a", "exact", "mc", "stderr", "z"};
    const SystemSpec spec = SystemSpec::finite(c.M, c.alpha);
    const SpaceTimePoint pt{c.n, c.t};
    const sim::Ensemble e = sim::sample_positions(spec, {pt}, c.replicas, run.seed, run.workers);
    double worst = 0.0;
    for (long a = spec.initial_position(c.n);; ++a) {
        const SpaceLikeSequence seq = sort_space_like({pt}, {a});
        const double p = fk::joint_probability(fk::KernelVariant::general, seq, spec);
        if (p < c.p_lo) break;
        if (p > 1.0 - c.p_lo) continue;
        const double q = e.tail(0, a);
        const double se = std::sqrt(p * (1.0 - p) / double(c.replicas));
        const double z = (q - p) / se;
        worst = std::max(worst, std::abs(z));
        r.rows.push_back({double(a), p, q, se, z});
    }
    if (r.rows.empty()) throw InvalidArgument("exact_vs_mc: no threshold inside the probability window");
    std::ostringstream name;
    name << "M=" << c.M << " alpha=" << c.alpha << " n=" << c.n << " t=" << c.t << " max|z|";
    r.add(name.str(), worst, c.z, worst <= c.z, std::to_string(r.rows.size()) + " thresholds");
    return r;
}

Report shock_law(const ShockLaw& c, const RunOptions& run) {
    Report r;
    r.experiment = "shock_law";
    const long n = std::lround((1.0 - c.alpha) * c.t / 2.0 + c.eta * std::sqrt(c.t));
    const double eta = (double(n) - (1.0 - c.alpha) * c.t / 2.0) / std::sqrt(c.t);
    const sim::Ensemble e =
        sim::sample_positions(SystemSpec::finite(1, c.alpha), {{n, c.t}}, c.replicas, run.seed, run.workers);
    std::vector<double> xi;
    xi.reserve(std::size_t(c.replicas));
    for (long x : e.column(0)) xi.push_back((c.t / 2.0 - 2.0 * double(n) - double(x)) / std::sqrt(c.t));
    const auto law = [&](double s) { return hydro::shock_cdf(c.alpha, eta, s); };
    const double d = ks_distance(xi, law, {0.0});
    r.columns = {"xi", "mc_cdf", "limit_cdf"};
    std::vector<double> sorted = xi;
    std::sort(sorted.begin(), sorted.end());
    for (double s = -1.0; s <= 1.5 + 1e-12; s += 0.05) {
        const double emp = double(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / sorted.size();
        r.rows.push_back({s, emp, law(s)});
    }
    r.add(fmt("alpha=%g t=%g n=%g sup distance", c.alpha, c.t, double(n)), d, c.tol, d <= c.tol,
          fmt("atom mass %.4f at xi=0", hydro::shock_atom_mass(c.alpha, eta)));
    return r;
}

Report shock_diffusion(const ShockDiffusion& c, const RunOptions& run) {
    Report r;
    r.experiment = "shock_diffusion";
    r.columns = {"t", "mean_x_shock", "var_x_shock", "var_over_t"};
    std::vector<double> ts, vs;
    for (std::size_t k = 0; k < c.times.size(); ++k) {
        const double t = c.times[k];
        const auto s = sim::sample_shock(c.alpha, t, c.shock_cut, c.replicas, run.seed + k, run.workers);
        double m = 0.0;
        for (const auto& x : s) m += double(x.x);
        m /= double(s.size());
        double v = 0.0;
        for (const auto& x : s) v += (double(x.x) - m) * (double(x.x) - m);
        v /= double(s.size() - 1);
        ts.push_back(t);
        vs.push_back(v);
        r.rows.push_back({t, m, v, v / t});
    }
    if (ts.size() < 2) throw InvalidArgument("shock_diffusion: need at least two times");
    const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / ts.size();
    const double vm = std::accumulate(vs.begin(), vs.end(), 0.0) / vs.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        sxy += (ts[k] - tm) * (vs[k] - vm);
        sxx += (ts[k] - tm) * (ts[k] - tm);
    }
    const double slope = sxy / sxx;
    const double D = hydro::diffusion_coefficient(c.alpha);
    const double rel = std::abs(slope - D) / D;
    r.add(fmt("alpha=%g regression slope of Var(x_shock) on t vs D=%g (relative error)", c.alpha, D), rel, c.rel_tol,
          rel <= c.rel_tol, fmt("slope %.4f", slope));
    return r;
}

Report density_profile(const DensityProfile& c, const RunOptions& run) {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw InvalidArgument("density_profile: alpha must lie in (0, 1]");
    Report r;
    r.experiment = "density_profile";
    r.columns = {"xi", "mc", "rho", "compared"};
    const long lo = long(std::floor(c.xi_lo * c.t));
    const long hi = long(std::ceil(c.alpha * c.t));
    const std::vector<double> occ =
        sim::density_profile(SystemSpec::finite(1, c.alpha), c.t, lo, hi, c.replicas, run.seed, run.workers);
    std::vector<double> marks;
    if (c.alpha < 0.5) marks = {c.alpha - 0.5, c.alpha};
    else marks = {0.0, 2.0 * c.alpha - 1.0, c.alpha};
    double worst = 0.0, at = 0.0;
    for (long b0 = lo; b0 + c.bin - 1 <= hi; b0 += c.bin) {
        double mc = 0.0, rho = 0.0;
        for (long x = b0; x < b0 + c.bin; ++x) {
            mc += occ[std::size_t(x - lo)];
            rho += hydro::density(double(x) / c.t, c.alpha);
        }
        mc /= double(c.bin);
        rho /= double(c.bin);
        const double xa = double(b0) / c.t, xb = double(b0 + c.bin - 1) / c.t;
        const bool excluded = std::any_of(marks.begin(), marks.end(), [&](double m) {
            return xb > m - c.exclude && xa < m + c.exclude;
        }) || xb > c.alpha;
        const double xi = 0.5 * (xa + xb);
        r.rows.push_back({xi, mc, rho, excluded ? 0.0 : 1.0});
        if (!excluded && std::abs(mc - rho) > worst) {
            worst = std::abs(mc - rho);
            at = xi;
        }
    }
    r.add(fmt("alpha=%g t=%g sup |rho_mc - rho|", c.alpha, c.t), worst, c.tol, worst <= c.tol,
          fmt("attained at xi=%.3f", at));
    return r;
}

Report burke(const Burke& c, const RunOptions& run) {
    Report r;
    r.experiment = "burke";
    r.columns = {"n", "ks", "p_value"};
    std::vector<SpaceTimePoint> q;
    for (long n : c.labels) q.push_back({n, c.t});
    const sim::Ensemble a = sim::sample_positions(SystemSpec::finite(1, c.alpha), q, c.replicas, run.seed, run.workers);
    const sim::Ensemble b = sim::sample_positions_bernoulli(c.alpha, q, c.replicas, run.seed + 1, run.workers);
    const double level = c.level / double(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double d = ks_two_sample(to_double(a.column(k)), to_double(b.column(k)));
        const double p = ks_two_sample_pvalue(d, c.replicas, c.replicas);
        r.rows.push_back({double(q[k].n), d, p});
        r.add(fmt("n=%g t=%g two-sample KS p-value", double(q[k].n), c.t), p, level, p >= level,
              fmt("D=%.4f", d));
    }
    return r;
}

Report dbm_region(const DbmRegion& c, const RunOptions& run) {
    Report r;
    r.experiment = "dbm_region";
    const long n = c.M + std::lround(c.nu * c.t);
    scaling::ScalingParams p;
    p.regime = scaling::RegimeTag::DBM;
    p.alpha = c.alpha;
    p.M = c.M;
    p.T = c.t;
    p.path = scaling::SpacePath::fixed_time(double(n - c.M) / c.t);
    const sim::Ensemble e =
        sim::sample_positions(SystemSpec::finite(c.M, c.alpha), {{n, c.t}}, c.replicas, run.seed, run.workers);
    std::vector<double> X;
    for (long x : e.column(0)) X.push_back(scaling::rescale(p, double(x), n, c.t));
    const auto law = memoized([p](double s) { return scaling::predicted_cdf(p, s); });
    const double d = ks_distance(X, law);
    r.columns = {"s", "mc_cdf", "limit_cdf"};
    std::vector<double> sorted = X;
    std::sort(sorted.begin(), sorted.end());
    for (double s = -3.0; s <= 3.0 + 1e-12; s += 0.25) {
        const double emp = double(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / sorted.size();
        r.rows.push_back({s, emp, law(s)});
    }
    r.add(fmt("M=%g alpha=%g t=%g n=%g KS", c.M, c.alpha, c.t, double(n)), d, c.tol, d <= c.tol);
    return r;
}

Report wall(const Wall& c, const RunOptions& run) {
    Report r;
    r.experiment = "wall";
    scaling::ScalingParams p;
    p.regime = scaling::RegimeTag::Wall;
    p.alpha = 2.0;
    p.n_wall = c.n;
    const sim::Ensemble e =
        sim::sample_positions(SystemSpec::infinite(2.0), {{c.n, c.t}}, c.replicas, run.seed, run.workers);
    std::vector<double> xi;
    for (long x : e.column(0)) xi.push_back(scaling::rescale(p, double(x), c.n, c.t));
    const auto law = memoized([p](double s) { return scaling::predicted_cdf(p, s); });
    const double d = ks_distance(xi, law);
    r.columns = {"xi", "mc_cdf", "limit_cdf"};
    std::vector<double> sorted = xi;
    std::sort(sorted.begin(), sorted.end());
    for (double s = 0.0; s <= 3.0 + 1e-12; s += 0.125) {
        const double emp = double(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / sorted.size();
        r.rows.push_back({s, emp, law(s)});
    }
    r.add(fmt("t=%g n=%g KS", c.t, double(c.n)), d, c.tol, d <= c.tol, fmt("slow window %g", double(e.wall_window)));
    return r;
}

}  // namespace tasep::experiments
