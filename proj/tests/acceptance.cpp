// Acceptance run: one PASS/FAIL line per criterion, `--only N` to run a subset.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tasep/akernel.hpp"
#include "tasep/core.hpp"
#include "tasep/experiments.hpp"
#include "tasep/fkernel.hpp"

using namespace tasep;
namespace ex = tasep::experiments;

namespace {

struct Outcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> notes;

    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Folds an experiment report into the outcome: every check must pass.
void absorb(Outcome& o, const ex::Report& r) {
    for (const auto& c : r.checks) {
        o.pass = o.pass && c.pass;
        o.note(c.name + " = " + fmt("%.6g", c.value) + " (tol " + fmt("%.6g", c.tolerance) + ")" +
               (c.detail.empty() ? "" : ", " + c.detail) + (c.pass ? "" : "  <-- outside tolerance"));
    }
}

Outcome max_within(double worst, double tol, const std::string& what) {
    Outcome o;
    o.pass = worst < tol;
    o.summary = what + fmt(" = %.3g (tol %.0e)", worst, tol);
    return o;
}

Outcome orthogonality(std::uint64_t) {
    double worst = 0.0;
    for (int M : {1, 2, 3})
        for (double a : {0.3, 0.5, 0.8})
            for (double t : {0.5, 2.0})
                for (long n = 1; n <= 6; ++n) {
                    const Eigen::MatrixXd G = fk::orthogonality_matrix(n, t, SystemSpec::finite(M, a));
                    worst = std::max(worst, (G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
                }
    return max_within(worst, 1e-8, "max |<Phi,Psi> - delta| over n<=6, M in {1,2,3}, alpha in {0.3,0.5,0.8}, t in {0.5,2}");
}

Outcome q_relations(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    auto draw = [&] {
        double t = 0.0;
        while (t == 0.0) t = 3.0 - u(rng);  // (0, 3]
        return t;
    };
    double worst = 0.0;
    long cases = 0, phi_cases = 0;
    for (int M : {1, 2})
        for (double a : {0.3, 0.7, 1.0})
            for (long n1 = M; n1 <= M + 3; ++n1)
                for (long n2 = M; n2 <= M + 3; ++n2) {
                    double t1 = draw(), t2 = draw();
                    if (t1 == t2) continue;
                    // space-like: the smaller label carries the later time
                    if ((n1 < n2 && t1 < t2) || (n1 > n2 && t1 > t2)) std::swap(t1, t2);
                    const SpaceTimePoint p1{n1, t1}, p2{n2, t2};
                    for (long j = 1; j <= M; ++j) {
                        const auto r = fk::q_relations(p1, p2, j, 2 * M - 2 * n2 - 4, 2 * M - 2 * n2 + 12,
                                                       SystemSpec::finite(M, a));
                        worst = std::max({worst, r.qk1, r.qk2, r.qphi});
                        ++cases;
                        phi_cases += r.qphi_checked;
                    }
                }
    Outcome o = max_within(worst, 1e-8, "max residual of QK1, QK2, Qphi over n1,n2 in {M..M+3}, M in {1,2}, random t in (0,3]");
    o.note(fmt("%g (n1,n2,j) cases, Qphi checked on %g of them", double(cases), double(phi_cases)));
    return o;
}

Outcome shock_kernel(std::uint64_t) {
    double worst = 0.0;
    long dets = 0;
    for (double a : {0.3, 0.45}) {
        const auto s = SystemSpec::finite(1, a);
        for (long n = 1; n <= 5; ++n)
            for (double t : {1.0, 4.0, 8.0})
                for (long x = -2 * n - 6; x <= 10; ++x) {
                    const auto q = sort_space_like({{n, t}}, {x});
                    worst = std::max(worst, std::abs(fk::joint_probability(fk::KernelVariant::general, q, s) -
                                                     fk::joint_probability(fk::KernelVariant::shock, q, s)));
                    ++dets;
                }
        const std::vector<std::pair<SpaceTimePoint, SpaceTimePoint>> pairs{
            {{2, 8.0}, {5, 3.0}}, {{3, 6.0}, {3, 2.0}}, {{1, 8.0}, {4, 8.0}}, {{1, 5.0}, {2, 1.0}}};
        for (const auto& [p1, p2] : pairs)
            for (long a1 = -4; a1 <= 8; a1 += 2)
                for (long a2 = -10; a2 <= 4; a2 += 2) {
                    const auto q = sort_space_like({p1, p2}, {a1, a2});
                    worst = std::max(worst, std::abs(fk::joint_probability(fk::KernelVariant::general, q, s) -
                                                     fk::joint_probability(fk::KernelVariant::shock, q, s)));
                    ++dets;
                }
    }
    Outcome o = max_within(worst, 1e-6, "max |det(1-K) - det(1-K_shock)|, one and two points, M=1, alpha in {0.3,0.45}, n<=5, t<=8");
    o.note(fmt("%g determinant pairs", double(dets)));
    return o;
}

Outcome exact_mc(std::uint64_t seed) {
    Outcome o;
    double worst = 0.0;
    std::uint64_t k = 0;
    for (double a : {0.3, 0.7})
        for (auto [n, t] : std::vector<std::pair<long, double>>{{2, 5.0}, {3, 8.0}, {5, 10.0}}) {
            ex::ExactVsMc c;
            c.alpha = a;
            c.n = n;
            c.t = t;
            c.replicas = 100000;
            const auto r = ex::exact_vs_mc(c, {seed + 1000 * k++, 1});
            absorb(o, r);
            worst = std::max(worst, r.checks.front().value);
        }
    o.summary = fmt("max |exact - MC| / stderr = %.3g (tol 3), R = 1e5, (n,t) in {(2,5),(3,8),(5,10)}, alpha in {0.3,0.7}", worst);
    return o;
}

Outcome shock_law(std::uint64_t seed) {
    Outcome o;
    const auto r = ex::shock_law(ex::ShockLaw{}, {seed, 1});
    absorb(o, r);
    o.summary = fmt("alpha=0.25 t=2000 eta=0 R=2e4: sup |F_MC - F_shock| = %.4g (tol 0.02)", r.checks.front().value);
    return o;
}

Outcome shock_diffusion(std::uint64_t seed) {
    Outcome o;
    const auto r = ex::shock_diffusion(ex::ShockDiffusion{}, {seed, 1});
    absorb(o, r);
    for (const auto& row : r.rows) o.note(fmt("t=%g Var(x_shock)/t = %.4f", row[0], row[3]));
    o.summary = fmt("alpha=0.25, t in {1000,2000,4000}: |slope - 0.75| / 0.75 = %.3g (tol 0.15)", r.checks.front().value);
    return o;
}

Outcome density(std::uint64_t seed) {
    Outcome o;
    double worst = 0.0;
    std::uint64_t k = 0;
    for (double a : {0.25, 0.75, 1.0}) {
        ex::DensityProfile c;
        c.alpha = a;
        const auto r = ex::density_profile(c, {seed + 1000 * k++, 1});
        absorb(o, r);
        worst = std::max(worst, r.checks.front().value);
    }
    o.summary = fmt("t=1000, alpha in {0.25,0.75,1}: sup |rho_MC - rho| = %.4f (tol 0.02)", worst);
    return o;
}

Outcome burke(std::uint64_t seed) {
    Outcome o;
    const auto r = ex::burke(ex::Burke{}, {seed, 1});
    absorb(o, r);
    double pmin = 1.0;
    for (const auto& c : r.checks) pmin = std::min(pmin, c.value);
    o.summary = fmt("alpha=0.5 t=50 n in {2..5}: smallest two-sample KS p-value = %.3g (Bonferroni level %.4g)", pmin,
                    0.01 / 4.0);
    return o;
}

Outcome ague(std::uint64_t) {
    double worst = 0.0;
    const std::vector<double> grid{0.1, 0.6, 1.1, 1.6, 2.1};
    for (long n1 = 1; n1 <= 3; ++n1)
        for (long n2 = 1; n2 <= 3; ++n2)
            for (auto [th1, th2] : std::vector<std::pair<double, double>>{{0.5, 0.0}, {0.0, 0.5}})
                for (double x1 : grid)
                    for (double x2 : grid) {
                        const double a = ak::ague_kernel_sum(n1, th1, x1, n2, th2, x2);
                        const double b = ak::ague_kernel_integral(n1, th1, x1, n2, th2, x2) /
                                         ak::ague_conjugation(n1, th1, n2, th2);
                        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
                    }
    return max_within(worst, 1e-8, "max |K_sum - K_integral| (relative above 1), (n1,n2) in {1,2,3}^2, theta gap 0.5, 25 xi pairs");
}

Outcome reductions(std::uint64_t) {
    Outcome o;
    double trans = 0.0;
    for (double kappa : {-1.0, 0.0, 2.0})
        for (double t1 : {-0.5, 0.0, 0.7})
            for (double t2 : {-0.5, 0.0, 0.7})
                for (double s1 : {-2.0, -0.5, 1.0})
                    for (double s2 : {-1.5, 0.0, 1.5})
                        trans = std::max(trans, std::abs(ak::trans_kernel(0, kappa, t1, s1, t2, s2) -
                                                         ak::airy_family(ak::AiryKind::A21, t1, s1, t2, s2)));
    auto F = [](ak::LawKind k, int M, double kappa, double tau, double s, bool fine, long n = 0) {
        ak::LimitLaw L = ak::LimitLaw::one_point(k, M, kappa, tau);
        if (k == ak::LawKind::aGUE) L.n = {n};
        if (fine) {
            L.options.nodes *= 2;
            L.options.ray_order *= 2;
            L.options.lambda_nodes *= 2;
        }
        return ak::limit_cdf(L, {s});
    };
    double dbm2 = 0.0;
    for (double s = -5.0; s <= 3.0; s += 0.5)
        dbm2 = std::max(dbm2, std::abs(F(ak::LawKind::DBM2, 0, 0, 0, s, false) - F(ak::LawKind::A2, 0, 0, 0, s, false)));

    struct Law {
        const char* name;
        ak::LawKind k;
        int M;
        double kappa, tau;
        long n;
        double lo, hi;
    };
    const std::vector<Law> laws{{"DBM(1)", ak::LawKind::DBM, 1, 0, 0, 0, -12, 14},
                                {"DBM(2)", ak::LawKind::DBM, 2, 0, 0, 0, -12, 14},
                                {"A1", ak::LawKind::A1, 0, 0, 0, 0, -12, 14},
                                {"A2", ak::LawKind::A2, 0, 0, 0, 0, -12, 14},
                                {"A21", ak::LawKind::A21, 0, 0, 0, 0, -12, 14},
                                {"Trans(1,0.5)", ak::LawKind::Trans, 1, 0.5, 0, 0, -12, 14},
                                {"DBM2(1)", ak::LawKind::DBM2, 1, 0, 0, 0, -12, 14},
                                {"aGUE(1)", ak::LawKind::aGUE, 0, 0, 1.0, 1, 0, 14},
                                {"aGUE(2)", ak::LawKind::aGUE, 0, 0, 1.0, 2, 0, 14}};
    double drop = 0.0, ends = 0.0, doubling = 0.0;
    for (const Law& l : laws) {
        double prev = -1.0, ld = 0.0, le = 0.0, ldd = 0.0;
        for (double s = l.lo; s <= l.hi + 1e-12; s += 0.5) {
            const double v = F(l.k, l.M, l.kappa, l.tau, s, false, l.n);
            ld = std::max(ld, prev - v);
            prev = v;
            ldd = std::max(ldd, std::abs(v - F(l.k, l.M, l.kappa, l.tau, s, true, l.n)));
        }
        le = std::max(std::abs(F(l.k, l.M, l.kappa, l.tau, l.lo, false, l.n)),
                      std::abs(1.0 - F(l.k, l.M, l.kappa, l.tau, l.hi, false, l.n)));
        o.note(std::string(l.name) + fmt(": largest drop %.2g, endpoint gap %.2g, doubling delta %.2g", ld, le, ldd));
        drop = std::max(drop, ld);
        ends = std::max(ends, le);
        doubling = std::max(doubling, ldd);
    }
    o.note(fmt("Trans(M=0) vs A21 pointwise: %.3g (tol 1e-8)", trans));
    o.note(fmt("DBM2(M=0) vs A2 one-point: %.3g (tol 1e-6)", dbm2));
    o.pass = trans < 1e-8 && dbm2 < 1e-6 && drop <= 1e-9 && ends < 1e-6 && doubling < 1e-6;
    o.summary = fmt("Trans0-A21 %.2g (1e-8), DBM2_0-A2 %.2g (1e-6), largest CDF drop %.2g (1e-9), endpoint gap %.2g (1e-6)", trans,
                    dbm2, drop, ends) +
                fmt(", doubling %.2g (1e-6)", doubling);
    return o;
}

Outcome dbm_region(std::uint64_t seed) {
    Outcome o;
    const auto r = ex::dbm_region(ex::DbmRegion{}, {seed, 1});
    absorb(o, r);
    o.summary = fmt("M=1 alpha=0.75 t=2000 nu=0.01 R=2e4: KS vs DBM(1) = %.4g (tol 0.03)", r.checks.front().value);
    return o;
}

Outcome wall(std::uint64_t seed) {
    Outcome o;
    const auto r = ex::wall(ex::Wall{}, {seed, 1});
    absorb(o, r);
    o.summary = fmt("M=inf alpha=2 t=400 n=1 R=2e4: KS vs aGUE(1) = %.4g (tol 0.03)", r.checks.front().value);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(std::uint64_t)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    std::uint64_t seed = 20240601;
    app.add_option("--only", only, "criterion numbers to run (default: all)");
    app.add_option("--seed", seed, "master seed of the Monte Carlo criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{{1, "orthogonality", orthogonality},
                                     {2, "Q relations", q_relations},
                                     {3, "shock kernel determinants", shock_kernel},
                                     {4, "exact vs Monte Carlo", exact_mc},
                                     {5, "shock law", shock_law},
                                     {6, "shock diffusion", shock_diffusion},
                                     {7, "hydrodynamic density", density},
                                     {8, "Burke equivalence", burke},
                                     {9, "aGUE representations", ague},
                                     {10, "limit-kernel reductions", reductions},
                                     {11, "DBM region", dbm_region},
                                     {12, "wall regime", wall}};
    int failed = 0;
    for (const Criterion& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(seed + std::uint64_t(c.id));
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
        std::printf("[%s] criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
