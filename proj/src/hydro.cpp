#include "tasep/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tasep/core.hpp"

namespace tasep::hydro {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void require_shock(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw InvalidArgument("shock quantities need 0 < alpha < 1/2");
}

}  // namespace

double density(double xi, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("density: alpha must lie in (0, 1]");
    if (alpha < 0.5) return xi < alpha - 0.5 ? 0.5 : 1.0 - alpha;
    if (xi <= 0.0) return 0.5;
    if (xi <= 2.0 * alpha - 1.0) return 0.5 * (1.0 - xi);
    return 1.0 - alpha;
}

double macro_position(double nu, double alpha) {
    if (!(nu > 0.0)) throw InvalidArgument("macro_position: nu must be positive");
    if (!(alpha > 0.0)) throw InvalidArgument("macro_position: alpha must be positive");
    if (alpha >= 1.0) return nu < 0.25 ? 1.0 - 2.0 * std::sqrt(nu) : 0.5 - 2.0 * nu;
    const double b = 1.0 - alpha;
    // boundaries are closed on the left branch; the branches agree there
    if (nu <= std::min(b / 2.0, b * b)) return alpha - nu / b;
    if (alpha > 0.5 && nu < 0.25) return 1.0 - 2.0 * std::sqrt(nu);
    return 0.5 - 2.0 * nu;
}

double MacroProfile::density(double xi) const { return hydro::density(xi, alpha); }
double MacroProfile::position(double nu) const { return hydro::macro_position(nu, alpha); }

ShockParams shock_params(double alpha, double eta) {
    require_shock(alpha);
    return {alpha * (1.0 - 2.0 * alpha) / (2.0 * (1.0 - alpha)), eta * (1.0 - 2.0 * alpha) / (1.0 - alpha)};
}

double diffusion_coefficient(double alpha) {
    require_shock(alpha);
    return alpha * (1.0 - alpha) / (0.5 - alpha);
}

double shock_cdf(double alpha, double eta, double xi) {
    const ShockParams p = shock_params(alpha, eta);
    if (xi < 0.0) return 0.0;
    return norm_cdf((xi + p.xi_c) / std::sqrt(p.sigma2));
}

double shock_atom_mass(double alpha, double eta) {
    const ShockParams p = shock_params(alpha, eta);
    return norm_cdf(p.xi_c / std::sqrt(p.sigma2));
}

double shock_cdf_from_jam_line(double alpha, double eta, double xi) {
    const ShockParams p = shock_params(alpha, eta);
    if (xi < p.xi_c) return 0.0;
    return norm_cdf(xi / std::sqrt(p.sigma2));
}

double shock_density_from_jam_line(double alpha, double eta, double xi) {
    const ShockParams p = shock_params(alpha, eta);
    if (xi <= p.xi_c) return 0.0;
    return std::exp(-xi * xi / (2.0 * p.sigma2)) / std::sqrt(2.0 * std::numbers::pi * p.sigma2);
}

double shock_position_tail(double alpha, double nu) {
    return 1.0 - norm_cdf(nu / std::sqrt(diffusion_coefficient(alpha)));
}

}  // namespace tasep::hydro
