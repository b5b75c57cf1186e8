#pragma once

namespace tasep::hydro {

// Macroscopic profile for the step initial density 1/2 on the left, 1 - alpha on the right.
struct MacroProfile {
    double alpha;

    double density(double xi) const;        // rho(xi, 1)
    double position(double nu) const;       // x_alpha(nu)
    bool has_shock() const { return alpha < 0.5; }
    double shock_location() const { return alpha - 0.5; }
};

double density(double xi, double alpha);
double macro_position(double nu, double alpha);

struct ShockParams {
    double sigma2;
    double xi_c;
};

ShockParams shock_params(double alpha, double eta);
double diffusion_coefficient(double alpha);

// Limit of P(x_n(t) >= t/2 - 2n - xi t^{1/2}) with n = (1-alpha)t/2 + eta t^{1/2}.
double shock_cdf(double alpha, double eta, double xi);

// Same law measured from the jam line alpha t - n/(1-alpha): zero below xi_c, an atom
// of mass shock_atom_mass at xi_c, Gaussian density above.
double shock_cdf_from_jam_line(double alpha, double eta, double xi);
double shock_atom_mass(double alpha, double eta);
double shock_density_from_jam_line(double alpha, double eta, double xi);

// Limit of P(x_shock(t) >= (alpha - 1/2) t - nu t^{1/2}).
double shock_position_tail(double alpha, double nu);

}  // namespace tasep::hydro
