#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tasep/core.hpp"

// Monte Carlo experiments that confront simulated ensembles with exact or limit
// laws. Each returns a report of named checks with the tolerance they were held to.
namespace tasep::experiments {

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string experiment;
    std::vector<Check> checks;
    // free-form table rows (header in `columns`) for export
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    bool pass() const;
    void add(const std::string& name, double value, double tolerance, bool pass, const std::string& detail = "");
};

// sup_x |F_n(x) - F(x)| for a continuous F with jumps only at `jumps` (F right-continuous).
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf,
                   const std::vector<double>& jumps = {});

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic P(D > d) for the two-sample statistic with sizes n1, n2.
double ks_two_sample_pvalue(double d, long n1, long n2);

struct RunOptions {
    std::uint64_t seed = 1;
    int workers = 1;
};

// P(x_n(t) >= a) exact against the empirical frequency; the sweep covers the a with
// exact probability in [p_lo, 1 - p_lo]. Passes when every point is within `z` standard errors.
struct ExactVsMc {
    int M = 1;
    double alpha = 0.3;
    long n = 2;
    double t = 5.0;
    long replicas = 100000;
    double p_lo = 0.02;
    double z = 3.0;
};
Report exact_vs_mc(const ExactVsMc& cfg, const RunOptions& = {});

// Rescaled x_n(t), n = (1 - alpha) t / 2 + eta t^{1/2}, against the shock law.
struct ShockLaw {
    double alpha = 0.25;
    double t = 2000.0;
    double eta = 0.0;
    long replicas = 20000;
    double tol = 0.02;
};
Report shock_law(const ShockLaw& cfg, const RunOptions& = {});

// Var(x_shock(t)) regressed on t: the slope estimates D(alpha).
struct ShockDiffusion {
    double alpha = 0.25;
    std::vector<double> times{1000.0, 2000.0, 4000.0};
    long replicas = 2000;
    double shock_cut = 1.0;  // c in the deficit cut c t^{5/12}
    double rel_tol = 0.15;
};
Report shock_diffusion(const ShockDiffusion& cfg, const RunOptions& = {});

// Occupation density at time t averaged over bins of `bin` sites, against rho(x/t).
struct DensityProfile {
    double alpha = 0.25;
    double t = 1000.0;
    double xi_lo = -0.5;     // left end of the compared window (in x / t)
    long bin = 20;
    long replicas = 1000;
    double exclude = 0.05;   // neighbourhood width around shocks and edges
    double tol = 0.02;
};
Report density_profile(const DensityProfile& cfg, const RunOptions& = {});

// Two-sample KS between the slow-particle system and its Bernoulli counterpart.
struct Burke {
    double alpha = 0.5;
    double t = 50.0;
    std::vector<long> labels{2, 3, 4, 5};
    long replicas = 20000;
    double level = 0.01;  // family-wise, Bonferroni over labels
};
Report burke(const Burke& cfg, const RunOptions& = {});

// Jammed region: rescaled x_{M + nu t}(t) against the DBM(M) one-point law.
struct DbmRegion {
    int M = 1;
    double alpha = 0.75;
    double t = 2000.0;
    double nu = 0.01;
    long replicas = 20000;
    double tol = 0.03;
};
Report dbm_region(const DbmRegion& cfg, const RunOptions& = {});

// M = infinity, alpha = 2: xi = (t - x_n(t)) / sqrt(2t) against the aGUE gap law.
struct Wall {
    double t = 400.0;
    long n = 1;
    long replicas = 20000;
    double tol = 0.03;
};
Report wall(const Wall& cfg, const RunOptions& = {});

}  // namespace tasep::experiments
