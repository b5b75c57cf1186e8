#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tasep/akernel.hpp"
#include "tasep/core.hpp"

// Process diagram: which limit process governs x_{M + nu t}(t) for slow-particle
// rate alpha, and how raw positions are rescaled onto it.
namespace tasep::scaling {

enum class RegimeTag { DBM, Shock, Trans21, DBM2Line, Airy1, Airy2, Airy21, Wall };

std::string to_string(RegimeTag);
RegimeTag parse_regime(const std::string&);

// Points within this distance of a regime boundary are tagged with the boundary.
inline constexpr double boundary_tol = 1e-9;

struct Regime {
    RegimeTag tag;
    bool boundary = false;  // tag is a line or point of the diagram rather than an open region
    std::string where;      // the defining relation, e.g. "nu = (1-alpha)^2"
};

// For finite M. With `infinite_system` (M = infinity) only alpha = 2 is covered
// and yields Wall regardless of nu.
Regime classify(double alpha, double nu, bool infinite_system = false);

// Space-like path t = (pi + theta) T, n = M + (pi - theta) T, with pi(theta) and
// pi'(theta) given at the working theta only.
struct SpacePath {
    double theta;
    double pi;
    double pi_prime;

    static SpacePath fixed_time(double nu);  // pi(theta) = 1 - theta with (pi - theta) = nu
    double nu() const { return (pi - theta) / (pi + theta); }
};

enum class Centering {
    JamLine,    // alpha t - (n - M) / (1 - alpha)
    ShockLine,  // t/2 - 2n
    FlatLine,   // t/2 - 2(n - M)
    CurvedLine, // t - 2 sqrt(t (n - M))
    Piecewise,  // FlatLine for n - M >= t/4, CurvedLine below
    WallLine,   // t
};

std::string to_string(Centering);

struct ScalingCoeffs {
    double S_v;
    double S_h;          // 1 where the regime has no horizontal rescaling
    Centering centering;
    double exponent;     // fluctuation exponent: 1/3 or 1/2
};

// DBM region: sigma^2 = alpha (pi + theta) - alpha (pi - theta) / (1 - alpha)^2.
double dbm_sigma2(const SpacePath& path, double alpha);

// Throws InvalidArgument when the path does not sit in the requested regime.
ScalingCoeffs scaling_coeffs(RegimeTag regime, const SpacePath& path, double alpha, int M);

struct ScalingParams {
    RegimeTag regime = RegimeTag::Airy2;
    double alpha = 1.0;
    int M = 1;
    double T = 1.0;             // large parameter; equals t on fixed-time paths
    SpacePath path = SpacePath::fixed_time(0.125);
    double eta = 0.0;           // Shock: n = (1 - alpha) t / 2 + eta t^{1/2}
    double kappa = 0.0;         // Trans21: alpha = (1 + kappa T^{-1/3}) / 2
    long n_wall = 1;            // Wall: label of the normal particle

    ScalingCoeffs coeffs() const;
    std::string describe() const;
};

// Centering line subtracted from x_n(t).
double centering(Centering c, double alpha, int M, long n, double t);

// Rescaled fluctuation X of a raw position x = x_n(t); the limit law describes P(X <= s).
double rescale(const ScalingParams& p, double x, long n, double t);
// Raw position with rescaled value X.
double unscale(const ScalingParams& p, double X, long n, double t);

// Limit law the regime predicts for X at the given law times (DBM: stationary
// time; Airy types: the rescaled tau before division by S_h; Wall: tau_i with
// theta_i = ln tau_i). Throws InvalidArgument for Shock with more than one point.
ak::LimitLaw predicted_law(const ScalingParams& p, const std::vector<double>& tau);

// Limit of P(X(tau_k) <= s_k for all k).
double predicted_cdf(const ScalingParams& p, const std::vector<double>& tau, const std::vector<double>& s,
                     const ak::LimitOptions& = {});
double predicted_cdf(const ScalingParams& p, double s, const ak::LimitOptions& = {});

struct DiagramGrid {
    int n_alpha = 200;
    int n_nu = 200;
    double alpha_max = 1.0;  // alpha_i = alpha_max i / n_alpha, i = 1..n_alpha
    double nu_max = 0.5;     // nu_j = nu_max j / n_nu
};

// CSV with header alpha,nu,regime,boundary.
void write_diagram(const DiagramGrid& g, std::ostream& os);

}  // namespace tasep::scaling
