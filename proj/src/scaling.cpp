#include "tasep/scaling.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "tasep/hydro.hpp"

namespace tasep::scaling {

namespace {

bool near(double a, double b) { return std::abs(a - b) <= boundary_tol; }

void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

// Path value pi(theta) that puts n/t on the given ratio: (pi - theta)/(pi + theta) = nu.
double pi_for_ratio(double theta, double nu) { return theta * (1.0 + nu) / (1.0 - nu); }

void require_on_line(const SpacePath& p, double nu, const char* what) {
    require(std::abs(p.pi - pi_for_ratio(p.theta, nu)) <= boundary_tol * std::max(1.0, std::abs(p.theta)), what);
}

}  // namespace

std::string to_string(RegimeTag t) {
    switch (t) {
        case RegimeTag::DBM: return "DBM-region";
        case RegimeTag::Shock: return "Shock";
        case RegimeTag::Trans21: return "Trans21Mkappa";
        case RegimeTag::DBM2Line: return "DBM2-line";
        case RegimeTag::Airy1: return "Airy1";
        case RegimeTag::Airy2: return "Airy2";
        case RegimeTag::Airy21: return "Airy21";
        case RegimeTag::Wall: return "Wall";
    }
    return "?";
}

RegimeTag parse_regime(const std::string& s) {
    for (RegimeTag t : {RegimeTag::DBM, RegimeTag::Shock, RegimeTag::Trans21, RegimeTag::DBM2Line, RegimeTag::Airy1,
                        RegimeTag::Airy2, RegimeTag::Airy21, RegimeTag::Wall})
        if (s == to_string(t)) return t;
    if (s == "DBM") return RegimeTag::DBM;
    if (s == "Trans21" || s == "Trans") return RegimeTag::Trans21;
    if (s == "DBM2") return RegimeTag::DBM2Line;
    throw InvalidArgument("unknown regime '" + s + "'");
}

std::string to_string(Centering c) {
    switch (c) {
        case Centering::JamLine: return "alpha t - (n-M)/(1-alpha)";
        case Centering::ShockLine: return "t/2 - 2n";
        case Centering::FlatLine: return "t/2 - 2(n-M)";
        case Centering::CurvedLine: return "t - 2 sqrt(t(n-M))";
        case Centering::Piecewise: return "t/2 - 2(n-M) if n-M >= t/4 else t - 2 sqrt(t(n-M))";
        case Centering::WallLine: return "t";
    }
    return "?";
}

Regime classify(double alpha, double nu, bool infinite_system) {
    require(alpha > 0.0, "classify: alpha must be positive");
    if (infinite_system) {
        require(near(alpha, 2.0), "classify: M = infinity is only covered at alpha = 2");
        return {RegimeTag::Wall, false, ""};
    }
    require(nu > 0.0, "classify: nu must be positive");
    if (alpha < 0.5 - boundary_tol) {
        const double shock = (1.0 - alpha) / 2.0;
        if (near(nu, shock)) return {RegimeTag::Shock, true, "nu = (1-alpha)/2"};
        return nu < shock ? Regime{RegimeTag::DBM, false, ""} : Regime{RegimeTag::Airy1, false, ""};
    }
    if (alpha <= 0.5 + boundary_tol) {
        if (near(nu, 0.25)) return {RegimeTag::Trans21, true, "alpha = 1/2, nu = 1/4"};
        return nu < 0.25 ? Regime{RegimeTag::DBM, false, ""} : Regime{RegimeTag::Airy1, false, ""};
    }
    // alpha > 1 has no jam and behaves as alpha = 1
    const double line = alpha < 1.0 ? (1.0 - alpha) * (1.0 - alpha) : 0.0;
    if (alpha < 1.0 && near(nu, line)) return {RegimeTag::DBM2Line, true, "nu = (1-alpha)^2"};
    if (nu < line) return {RegimeTag::DBM, false, ""};
    if (near(nu, 0.25)) return {RegimeTag::Airy21, true, "nu = 1/4"};
    return nu < 0.25 ? Regime{RegimeTag::Airy2, false, ""} : Regime{RegimeTag::Airy1, false, ""};
}

SpacePath SpacePath::fixed_time(double nu) {
    const double theta = (1.0 - nu) / 2.0;
    return {theta, 1.0 - theta, -1.0};
}

double dbm_sigma2(const SpacePath& p, double alpha) {
    const double b = 1.0 - alpha;
    return alpha * (p.pi + p.theta) - alpha * (p.pi - p.theta) / (b * b);
}

ScalingCoeffs scaling_coeffs(RegimeTag regime, const SpacePath& p, double alpha, int M) {
    require(M >= 0, "scaling_coeffs: M must be >= 0");
    require(p.theta > 0.0 && p.pi + p.theta > 0.0, "scaling_coeffs: path needs theta > 0 and pi + theta > 0");
    require(std::abs(p.pi_prime) <= 1.0, "scaling_coeffs: |pi'| must be <= 1");
    const double nu = p.nu();
    auto in_regime = [&](RegimeTag t) {
        if (classify(alpha, nu).tag != t)
            throw InvalidArgument("scaling_coeffs: path (nu = " + std::to_string(nu) + ", alpha = " +
                                  std::to_string(alpha) + ") is not in regime " + to_string(t));
    };
    const double third = 1.0 / 3.0;
    switch (regime) {
        case RegimeTag::DBM: {
            in_regime(regime);
            const double s2 = dbm_sigma2(p, alpha);
            require(s2 > 0.0, "scaling_coeffs: sigma^2 <= 0");
            return {std::sqrt(s2), 1.0, Centering::JamLine, 0.5};
        }
        case RegimeTag::Shock:
            require(M == 1, "scaling_coeffs: the shock law is for M = 1");
            require(alpha > 0.0 && alpha < 0.5, "scaling_coeffs: shock needs 0 < alpha < 1/2");
            return {1.0, 1.0, Centering::ShockLine, 0.5};
        case RegimeTag::Trans21:
        case RegimeTag::Airy21: {
            require_on_line(p, 0.25, "scaling_coeffs: transition needs pi(theta) = 5 theta / 3");
            if (regime == RegimeTag::Airy21) require(alpha > 0.5, "scaling_coeffs: Airy21 needs alpha > 1/2");
            const double sv = std::cbrt(4.0 * p.theta / 3.0);
            return {sv, 4.0 / (5.0 - 3.0 * p.pi_prime) * sv * sv, Centering::Piecewise, third};
        }
        case RegimeTag::DBM2Line: {
            require(alpha > 0.5 && alpha < 1.0, "scaling_coeffs: DBM2 line needs 1/2 < alpha < 1");
            const double b = 1.0 - alpha;
            require_on_line(p, b * b, "scaling_coeffs: DBM2 line needs n/t = (1-alpha)^2");
            const double sv = std::cbrt(2.0 * p.theta * alpha / ((2.0 - alpha) * b));
            const double sh = 2.0 / alpha / (1.0 + p.pi_prime + (1.0 - p.pi_prime) / (b * b)) * sv * sv;
            return {sv, sh, Centering::CurvedLine, third};
        }
        case RegimeTag::Airy1: {
            in_regime(regime);
            const double sv = std::cbrt(p.pi + p.theta);
            return {sv, 4.0 / (5.0 - 3.0 * p.pi_prime) * sv * sv, Centering::FlatLine, third};
        }
        case RegimeTag::Airy2: {
            in_regime(regime);
            const double r = nu, q = std::sqrt(r);
            const double sv = std::cbrt(p.pi + p.theta) * std::pow(r, -1.0 / 6.0) * std::pow(1.0 - q, 2.0 / 3.0);
            const double sh = 2.0 / (1.0 - q) / ((1.0 - p.pi_prime) / r + (1.0 + p.pi_prime)) * sv * sv;
            return {sv, sh, Centering::CurvedLine, third};
        }
        case RegimeTag::Wall:
            require(near(alpha, 2.0), "scaling_coeffs: the wall regime needs alpha = 2");
            return {std::sqrt(2.0), 1.0, Centering::WallLine, 0.5};
    }
    throw InvalidArgument("scaling_coeffs: unknown regime");
}

ScalingCoeffs ScalingParams::coeffs() const { return scaling_coeffs(regime, path, alpha, M); }

std::string ScalingParams::describe() const {
    std::ostringstream os;
    os << "regime=" << to_string(regime) << " alpha=" << alpha << " M=" << M << " T=" << T << " theta=" << path.theta
       << " pi=" << path.pi << " pi'=" << path.pi_prime;
    if (regime == RegimeTag::Shock) os << " eta=" << eta;
    if (regime == RegimeTag::Trans21) os << " kappa=" << kappa;
    if (regime == RegimeTag::Wall) os << " n=" << n_wall;
    return os.str();
}

double centering(Centering c, double alpha, int M, long n, double t) {
    const double m = double(n - M);
    switch (c) {
        case Centering::JamLine: return alpha * t - m / (1.0 - alpha);
        case Centering::ShockLine: return t / 2.0 - 2.0 * double(n);
        case Centering::FlatLine: return t / 2.0 - 2.0 * m;
        case Centering::CurvedLine:
            require(m >= 0.0, "centering: curved line needs n >= M");
            return t - 2.0 * std::sqrt(t * m);
        case Centering::Piecewise:
            return m >= t / 4.0 ? centering(Centering::FlatLine, alpha, M, n, t)
                                : centering(Centering::CurvedLine, alpha, M, n, t);
        case Centering::WallLine: return t;
    }
    throw InvalidArgument("centering: unknown line");
}

namespace {

// X = sign * (x - c) / d
struct Affine {
    double c, d, sign;
};

Affine affine(const ScalingParams& p, long n, double t) {
    require(t > 0.0 && p.T > 0.0, "rescale: times must be positive");
    const ScalingCoeffs k = p.coeffs();
    const double c = centering(k.centering, p.alpha, p.M, n, t);
    switch (p.regime) {
        case RegimeTag::DBM: return {c, k.S_v * std::sqrt(p.T), -1.0};
        case RegimeTag::Shock:
        case RegimeTag::Wall: return {c, k.S_v * std::sqrt(t), -1.0};
        default: return {c, std::cbrt(p.T), -1.0};
    }
}

}  // namespace

double rescale(const ScalingParams& p, double x, long n, double t) {
    const Affine a = affine(p, n, t);
    return a.sign * (x - a.c) / a.d;
}

double unscale(const ScalingParams& p, double X, long n, double t) {
    const Affine a = affine(p, n, t);
    return a.c + a.sign * X * a.d;
}

ak::LimitLaw predicted_law(const ScalingParams& p, const std::vector<double>& tau) {
    require(!tau.empty(), "predicted_law: no points");
    const ScalingCoeffs k = p.coeffs();
    ak::LimitLaw law;
    law.M = p.M;
    law.tau = tau;
    auto horizontal = [&] {
        for (double& x : law.tau) x /= k.S_h;
    };
    switch (p.regime) {
        case RegimeTag::DBM: law.kind = ak::LawKind::DBM; break;
        case RegimeTag::Shock: throw InvalidArgument("predicted_law: the shock law is not a determinantal limit");
        case RegimeTag::Trans21:
            law.kind = ak::LawKind::Trans;
            law.kappa = p.kappa * k.S_v;
            horizontal();
            break;
        case RegimeTag::DBM2Line:
            law.kind = ak::LawKind::DBM2;
            horizontal();
            break;
        case RegimeTag::Airy1: law.kind = ak::LawKind::A1; horizontal(); break;
        case RegimeTag::Airy2: law.kind = ak::LawKind::A2; horizontal(); break;
        case RegimeTag::Airy21: law.kind = ak::LawKind::A21; horizontal(); break;
        case RegimeTag::Wall:
            law.kind = ak::LawKind::aGUE;
            law.n.assign(tau.size(), p.n_wall);
            for (double& x : law.tau) {
                require(x > 0.0, "predicted_law: wall times must be positive");
                x = std::log(x);
            }
            break;
    }
    return law;
}

double predicted_cdf(const ScalingParams& p, const std::vector<double>& tau, const std::vector<double>& s,
                     const ak::LimitOptions& opts) {
    require(tau.size() == s.size(), "predicted_cdf: tau and s differ in length");
    if (p.regime == RegimeTag::Shock) {
        require(s.size() == 1, "predicted_cdf: the shock law is one-point only");
        return hydro::shock_cdf(p.alpha, p.eta, s[0]);
    }
    ak::LimitLaw law = predicted_law(p, tau);
    law.options = opts;
    std::vector<double> ss = s;
    const ScalingCoeffs k = p.coeffs();
    if (k.exponent < 0.5)
        for (double& x : ss) x /= k.S_v;
    return ak::limit_cdf(law, ss);
}

double predicted_cdf(const ScalingParams& p, double s, const ak::LimitOptions& opts) {
    const double tau = p.regime == RegimeTag::Wall ? 1.0 : 0.0;
    return predicted_cdf(p, std::vector<double>{tau}, std::vector<double>{s}, opts);
}

void write_diagram(const DiagramGrid& g, std::ostream& os) {
    require(g.n_alpha >= 1 && g.n_nu >= 1, "write_diagram: empty grid");
    os << "alpha,nu,regime,boundary\n";
    for (int i = 1; i <= g.n_alpha; ++i) {
        const double alpha = g.alpha_max * i / g.n_alpha;
        for (int j = 1; j <= g.n_nu; ++j) {
            const double nu = g.nu_max * j / g.n_nu;
            const Regime r = classify(alpha, nu);
            os << alpha << ',' << nu << ',' << to_string(r.tag) << ',' << (r.boundary ? 1 : 0) << '\n';
        }
    }
}

}  // namespace tasep::scaling
