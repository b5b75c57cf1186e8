#include "tasep/akernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace tasep::ak {

using num::cplx;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------- contours

struct Contour {
    std::vector<cplx> w, W;  // nodes and weights (with 1/(2 pi i) and orientation)
    cplx end_in, end_out;    // truncation points
    double vertex;
};

Contour make_contour(double vertex, bool right, const LimitOptions& o) {
    num::RayPair rp;
    rp.vertex = vertex;
    rp.angle_in = right ? pi / 3 : -2 * pi / 3;
    rp.angle_out = right ? -pi / 3 : 2 * pi / 3;
    rp.R = o.ray_radius;
    rp.order = o.ray_order;
    const num::ContourRule r = num::ray_rule(rp);
    return {r.nodes, r.weights, rp.vertex + std::polar(rp.R, rp.angle_in), rp.vertex + std::polar(rp.R, rp.angle_out),
            vertex};
}

cplx fexp(cplx w, double tau, double s) { return w * w * w / 3.0 + tau * w * w - s * w; }

// Throws when e^{sign f} has not decayed at the ends of the contour.
void check_decay(const Contour& c, double tau, const VectorXd& s, double sign, double node_max,
                 const VectorXd& scale) {
    for (long a = 0; a < s.size(); ++a)
        for (cplx e : {c.end_in, c.end_out}) {
            const double v = std::exp(sign * fexp(e, tau, s[a]).real() - scale[a]);
            if (v > 1e-14 * std::max(1.0, node_max))
                throw num::ContourDecayError("limit kernel: integrand has not decayed at the ray truncation radius");
        }
}

// Log-scale of row a: sign * f(vertex; tau, s_a). Large |tau| and s~ = s - tau^2
// push e^{f} towards the double range limits; factoring the scale out keeps
// the quadrature in range.
VectorXd log_scale(const Contour& c, double tau, const VectorXd& s, double sign) {
    VectorXd l(s.size());
    for (long a = 0; a < s.size(); ++a) l[a] = sign * fexp(c.vertex, tau, s[a]).real();
    return l;
}

// Rows: x-values, columns: contour nodes. Entry W_k e^{sign f(w_k; tau, s_a) - scale_a} phi(w_k).
MatrixXcd contour_matrix(const Contour& c, double tau, const VectorXd& s, double sign,
                         const std::function<cplx(cplx)>& phi) {
    MatrixXcd m(s.size(), c.w.size());
    const VectorXd scale = log_scale(c, tau, s, sign);
    double mx = 0.0;
    for (long a = 0; a < s.size(); ++a)
        for (std::size_t k = 0; k < c.w.size(); ++k) {
            const cplx e = std::exp(sign * fexp(c.w[k], tau, s[a]) - scale[a]);
            mx = std::max(mx, std::abs(e));
            m(a, long(k)) = c.W[k] * e * phi(c.w[k]);
        }
    check_decay(c, tau, s, sign, mx, scale);
    return m;
}

// K(a, b) *= e^{l1_a + l2_b}
void rescale(MatrixXd& K, const VectorXd& l1, const VectorXd& l2) {
    for (long a = 0; a < K.rows(); ++a)
        for (long b = 0; b < K.cols(); ++b) K(a, b) *= std::exp(l1[a] + l2[b]);
}

MatrixXd real_part(const MatrixXcd& m, const char* what) {
    const double re = m.size() ? m.real().cwiseAbs().maxCoeff() : 0.0;
    const double im = m.size() ? m.imag().cwiseAbs().maxCoeff() : 0.0;
    if (im > 1e-8 * std::max(1.0, re)) throw num::NumericalError(std::string(what) + ": imaginary residue too large");
    return m.real();
}

// Taylor coefficients [ (w - p)^k ] e^{f(w; tau, s) - offset}, k < order.
std::vector<double> exp_taylor(double p, double tau, double s, int order, double offset) {
    const double a[4] = {0.0, p * p + 2 * tau * p - s, p + tau, 1.0 / 3.0};
    std::vector<double> g(std::max(order, 1));
    g[0] = std::exp(fexp(p, tau, s).real() - offset);
    for (int k = 1; k < order; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= std::min(3, k); ++j) acc += j * a[j] * g[k - j];
        g[k] = acc / k;
    }
    return g;
}

VectorXd shifted(const VectorXd& s, double tau, bool tilde) {
    return tilde ? VectorXd((s.array() - tau * tau).matrix()) : s;
}

// The Airy-type kernels carry a factor e^{tau2 s2 - tau1 s1}, which ruins the
// Nystrom matrix once |tau| s is large. Blocks are returned multiplied by the
// determinant-preserving factor e^{g1_a + g2_b} (g1 = eta1 s1, g2 = -eta2 s2)
// when `symmetric` is set, with g folded into every exponent. eta = tau except
// for the finite-rank kernels at tau < 0, whose rank part is flat in s2 and
// needs eta >= 0.
struct Conj {
    VectorXd g1, g2;
};

Conj make_conj(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, bool symmetric) {
    if (!symmetric) return {VectorXd::Zero(s1.size()), VectorXd::Zero(s2.size())};
    return {tau1 * s1, -tau2 * s2};
}

// -(4 pi d)^{-1/2} exp(-(y - x)^2 / (4 d)) for d > 0, else 0.
MatrixXd heat_block(double tau1, const VectorXd& x, double tau2, const VectorXd& y, const Conj& c) {
    MatrixXd h = MatrixXd::Zero(x.size(), y.size());
    const double d = tau2 - tau1;
    if (d <= 0.0) return h;
    for (long a = 0; a < x.size(); ++a)
        for (long b = 0; b < y.size(); ++b)
            h(a, b) = -std::exp(-(y[b] - x[a]) * (y[b] - x[a]) / (4 * d) + c.g1[a] + c.g2[b]) / std::sqrt(4 * pi * d);
    return h;
}

// (1/(2 pi i)) int_{gamma2} dw e^{f2(w) - f1(-w)} in closed form:
// 2^{-1/3} e^{2T^3/3 + S T} Ai(S + T^2), T = (tau2 - tau1) 2^{-2/3}, S = (s1 + s2) 2^{-1/3}.
void add_reflection_residue(MatrixXd& K, double tau1, const VectorXd& t1, double tau2, const VectorXd& t2,
                            const Conj& c) {
    const double T = (tau2 - tau1) * std::pow(2.0, -2.0 / 3.0);
    for (long a = 0; a < t1.size(); ++a)
        for (long b = 0; b < t2.size(); ++b) {
            const double S = (t1[a] + t2[b]) * std::pow(2.0, -1.0 / 3.0);
            K(a, b) += std::pow(2.0, -1.0 / 3.0) * std::exp(2.0 / 3.0 * T * T * T + S * T + c.g1[a] + c.g2[b]) *
                       num::airy_ai(S + T * T);
        }
}

// Contour vertices sit at -tau2 + r2 (right) and -tau1 - r1 (left): the real
// saddle points of e^{f} when r = sqrt(s~ + tau^2) >= 1.
struct Saddle {
    double r1 = 1.0, r2 = 1.0;
};

// Evaluates fn(rows, cols, saddle) on groups of rows and columns that share a
// saddle offset (bucketed by 1/2) and assembles the block.
template <class F>
MatrixXd by_saddle(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, bool always_tilde, F&& fn) {
    const auto bucket = [&](double s, double tau) {
        const double u = (always_tilde || tau < 0 ? s - tau * tau : s) + tau * tau;
        return int(std::floor(2.0 * std::sqrt(std::max(u, 1.0))));
    };
    std::map<int, std::vector<long>> g1, g2;
    for (long a = 0; a < s1.size(); ++a) g1[bucket(s1[a], tau1)].push_back(a);
    for (long b = 0; b < s2.size(); ++b) g2[bucket(s2[b], tau2)].push_back(b);
    MatrixXd K(s1.size(), s2.size());
    for (const auto& [k1, rows] : g1)
        for (const auto& [k2, cols] : g2) {
            VectorXd x(rows.size()), y(cols.size());
            for (std::size_t a = 0; a < rows.size(); ++a) x[long(a)] = s1[rows[a]];
            for (std::size_t b = 0; b < cols.size(); ++b) y[long(b)] = s2[cols[b]];
            const MatrixXd part = fn(x, y, Saddle{std::max(1.0, k1 / 2.0), std::max(1.0, k2 / 2.0)});
            for (std::size_t a = 0; a < rows.size(); ++a)
                for (std::size_t b = 0; b < cols.size(); ++b) K(rows[a], cols[b]) = part(long(a), long(b));
        }
    return K;
}

// Move v away from the listed points by at least `gap`.
double avoid(double v, std::initializer_list<double> pts, double gap) {
    for (int iter = 0; iter < 16; ++iter) {
        bool ok = true;
        for (double p : pts)
            if (std::abs(v - p) < gap) {
                v = p + (v >= p ? gap : -gap);
                ok = false;
            }
        if (ok) break;
    }
    return v;
}

// ---------------------------------------------------------------- DBM

MatrixXd dbm_block(int M, double tau1, const VectorXd& x, double tau2, const VectorXd& y) {
    MatrixXd k = MatrixXd::Zero(x.size(), y.size());
    if (tau1 < tau2) {
        const double q = std::exp(-(tau2 - tau1)), v = 1.0 - q * q;
        for (long a = 0; a < x.size(); ++a)
            for (long b = 0; b < y.size(); ++b)
                k(a, b) = -std::exp(-(y[b] - x[a] * q) * (y[b] - x[a] * q) / (2 * v)) / std::sqrt(2 * pi * v);
    }
    if (M == 0) return k;
    // p_k(x) = 2^{-1/4} e^{x^2/4} h_k(x / sqrt 2) with h_k the orthonormal Hermite functions
    MatrixXd P(x.size(), M), Q(M, y.size());
    for (long a = 0; a < x.size(); ++a) {
        const auto h = num::hermite_functions(M - 1, x[a] / std::sqrt(2.0));
        for (int j = 0; j < M; ++j) P(a, j) = std::exp(j * (tau1 - tau2)) * h[j] * std::exp(x[a] * x[a] / 4);
    }
    for (long b = 0; b < y.size(); ++b) {
        const auto h = num::hermite_functions(M - 1, y[b] / std::sqrt(2.0));
        for (int j = 0; j < M; ++j) Q(j, b) = h[j] * std::exp(-y[b] * y[b] / 4);
    }
    return k + std::pow(2.0, -0.5) * P * Q;
}

// ---------------------------------------------------------------- transition kernels

VectorXd plus(const VectorXd& x, const VectorXd& y) { return x + y; }

// K_trans(1) with the s~ substitution. If the left contour ends up west of
// -gamma2, the pole w1 = -w2 is restored by its closed-form residue.
MatrixXd ktr0_block(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, const LimitOptions& o,
                    bool symmetric, Saddle sd = {}) {
    const Conj cj = make_conj(std::max(tau1, 0.0), s1, std::max(tau2, 0.0), s2, symmetric);
    const VectorXd t1 = shifted(s1, tau1, tau1 < 0), t2 = shifted(s2, tau2, tau2 < 0);
    // keep gamma1 at distance >= 1 from both gamma2 and -gamma2; prefer no residue
    const double v2 = std::max(-tau2 + sd.r2, 0.5);
    const double v1 = v2 > 1.0 ? std::clamp(-tau1 - sd.r1, -v2 + 1.0, v2 - 1.0) : std::min(-tau1 - sd.r1, -v2 - 1.0);
    const Contour L = make_contour(v1, false, o), R = make_contour(v2, true, o);
    const auto one = [](cplx) { return cplx(1.0); };
    MatrixXcd A = contour_matrix(L, tau1, t1, -1.0, one);
    MatrixXcd B = contour_matrix(R, tau2, t2, 1.0, one);
    MatrixXcd C(L.w.size(), R.w.size());
    for (std::size_t a = 0; a < L.w.size(); ++a)
        for (std::size_t b = 0; b < R.w.size(); ++b) {
            const cplx w1 = L.w[a], w2 = R.w[b];
            C(long(a), long(b)) = 2.0 * w2 / ((w1 - w2) * (w1 + w2));
        }
    MatrixXd K = real_part(A * C * B.transpose(), "K_trans(1)");
    rescale(K, plus(log_scale(L, tau1, t1, -1.0), cj.g1), plus(log_scale(R, tau2, t2, 1.0), cj.g2));
    K += heat_block(tau1, t1, tau2, t2, cj);
    if (v1 + v2 < 0.0) add_reflection_residue(K, tau1, t1, tau2, t2, cj);
    return K;
}

// K_trans(2): after the u = kappa residue it is sum_{m < M} A_m(x) B_m(y).
MatrixXd ktr1_block(int M, double kappa, double tau1, const VectorXd& s1, double tau2, const VectorXd& s2,
                    const LimitOptions& o, bool symmetric, Saddle sd = {}) {
    if (M == 0) return MatrixXd::Zero(s1.size(), s2.size());
    const Conj cj = make_conj(std::max(tau1, 0.0), s1, std::max(tau2, 0.0), s2, symmetric);
    const VectorXd t1 = shifted(s1, tau1, tau1 < 0), t2 = shifted(s2, tau2, tau2 < 0);
    const double vb = avoid(std::max(-tau2 + sd.r2, 0.5), {kappa, -kappa}, 0.3);
    const Contour L = make_contour(-tau1 - sd.r1, false, o), R = make_contour(vb, true, o);
    MatrixXd A(s1.size(), M), B(M, s2.size());
    for (int m = 0; m < M; ++m) {
        const MatrixXcd am = contour_matrix(L, tau1, t1, -1.0, [&](cplx w) { return std::pow(w - kappa, m); });
        A.col(m) = real_part(am.rowwise().sum(), "K_trans(2)");
        const MatrixXcd bm = contour_matrix(R, tau2, t2, 1.0, [&](cplx w) {
            return std::pow(w - kappa, -m - 1) + (m % 2 ? -1.0 : 1.0) * std::pow(w + kappa, -m - 1);
        });
        B.row(m) = real_part(bm.rowwise().sum(), "K_trans(2)").transpose();
    }
    // gamma2 keeps kappa to its east and -kappa to its west. Residue columns get
    // their own scale e^{f2(p)} so that neither factor overflows.
    const VectorXd l1 = plus(log_scale(L, tau1, t1, -1.0), cj.g1), l2 = log_scale(R, tau2, t2, 1.0);
    MatrixXd K = A * B;
    rescale(K, l1, plus(l2, cj.g2));
    for (int side = 0; side < 2; ++side) {
        // side 0: gamma2 crossed to the east of kappa; side 1: to the west of -kappa
        const double p = side ? -kappa : kappa;
        if (side ? !(vb < -kappa) : !(vb > kappa)) continue;
        MatrixXd E(M, t2.size());
        VectorXd lp(t2.size());
        for (long b = 0; b < t2.size(); ++b) {
            lp[b] = fexp(p, tau2, t2[b]).real() + cj.g2[b];
            const auto g = exp_taylor(p, tau2, t2[b], M, fexp(p, tau2, t2[b]).real());
            for (int m = 0; m < M; ++m) E(m, b) = side ? -(m % 2 ? -1.0 : 1.0) * g[m] : g[m];
        }
        MatrixXd R0 = A * E;
        rescale(R0, l1, lp);
        K += R0;
    }
    return K;
}

MatrixXd dbm2_block(int M, double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, const LimitOptions& o,
                    bool symmetric, Saddle sd = {}) {
    const Conj cj = make_conj(std::max(tau1, 0.0), s1, std::max(tau2, 0.0), s2, symmetric);
    const VectorXd t1 = shifted(s1, tau1, true), t2 = shifted(s2, tau2, true);
    const double v2 = avoid(-tau2 + sd.r2, {0.0}, 0.3);
    const double v1 = std::min(-tau1 - sd.r1, v2 - 1.0);
    const Contour L = make_contour(v1, false, o), R = make_contour(v2, true, o);
    MatrixXcd A = contour_matrix(L, tau1, t1, -1.0, [&](cplx w) { return std::pow(w, M); });
    MatrixXcd B = contour_matrix(R, tau2, t2, 1.0, [&](cplx w) { return std::pow(w, -M); });
    MatrixXcd C(L.w.size(), R.w.size());
    for (std::size_t a = 0; a < L.w.size(); ++a)
        for (std::size_t b = 0; b < R.w.size(); ++b) C(long(a), long(b)) = 1.0 / (L.w[a] - R.w[b]);
    MatrixXd K = real_part(A * C * B.transpose(), "K_DBM->2");
    const VectorXd l1 = log_scale(L, tau1, t1, -1.0), l2 = log_scale(R, tau2, t2, 1.0);
    rescale(K, plus(l1, cj.g1), plus(l2, cj.g2));
    if (M > 0 && v2 > 0.0) {
        // gamma2 has to pass west of 0: add the residue at w2 = 0 (where f2 = 0)
        MatrixXd Aj(t1.size(), M), E(M, t2.size());
        for (int j = 0; j < M; ++j)
            Aj.col(j) = real_part(contour_matrix(L, tau1, t1, -1.0, [&](cplx w) { return std::pow(w, j); })
                                      .rowwise()
                                      .sum(),
                                  "K_DBM->2");
        for (long b = 0; b < t2.size(); ++b) {
            const auto g = exp_taylor(0.0, tau2, t2[b], M, 0.0);
            for (int j = 0; j < M; ++j) E(j, b) = g[j];
        }
        MatrixXd R0 = Aj * E;
        rescale(R0, plus(l1, cj.g1), cj.g2);
        K += R0;
    }
    return K + heat_block(tau1, t1, tau2, t2, cj);
}

// ---------------------------------------------------------------- Airy family

MatrixXd a2_block(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, const LimitOptions& o) {
    MatrixXd K(s1.size(), s2.size());
    if (tau1 == tau2) {
        for (long a = 0; a < s1.size(); ++a)
            for (long b = 0; b < s2.size(); ++b) {
                const double x = s1[a], y = s2[b];
                const double ax = num::airy_ai(x), ay = num::airy_ai(y);
                const double px = num::airy_ai_prime(x), py = num::airy_ai_prime(y);
                K(a, b) = std::abs(x - y) < 1e-9 ? px * px - x * ax * ax : (ax * py - px * ay) / (x - y);
            }
        return K;
    }
    // int_0^Lambda e^{-l (tau1 - tau2)} Ai(s1 + l) Ai(s2 + l) dl by panels of Gauss-Legendre
    const double smin = std::min(s1.minCoeff(), s2.minCoeff());
    const double lam = std::max(1.0, 16.0 - smin + (tau2 > tau1 ? 2 * (tau2 - tau1) * (tau2 - tau1) : 0.0));
    const int panels = std::max(1, int(std::ceil(lam / 2.0)));
    const int per = std::max(8, o.lambda_nodes / 12);
    std::vector<double> gx, gw;
    num::gauss_legendre(per, gx, gw);
    const int n = panels * per;
    VectorXd l(n), wl(n);
    for (int p = 0; p < panels; ++p)
        for (int k = 0; k < per; ++k) {
            const double a = lam * p / panels, b = lam * (p + 1) / panels;
            l[p * per + k] = a + 0.5 * (b - a) * (gx[k] + 1.0);
            wl[p * per + k] = 0.5 * (b - a) * gw[k] * std::exp(-l[p * per + k] * (tau1 - tau2));
        }
    MatrixXd X(s1.size(), n), Y(n, s2.size());
    for (long a = 0; a < s1.size(); ++a)
        for (int k = 0; k < n; ++k) X(a, k) = num::airy_ai(s1[a] + l[k]) * wl[k];
    for (int k = 0; k < n; ++k)
        for (long b = 0; b < s2.size(); ++b) Y(k, b) = num::airy_ai(s2[b] + l[k]);
    K = X * Y;
    if (tau1 < tau2) {
        // subtract the full-line integral, a Gaussian in closed form
        const double d = tau2 - tau1;
        for (long a = 0; a < s1.size(); ++a)
            for (long b = 0; b < s2.size(); ++b) {
                const double x = s1[a], y = s2[b];
                K(a, b) -= std::exp(d * d * d / 12 - d * (x + y) / 2 - (x - y) * (x - y) / (4 * d)) /
                           std::sqrt(4 * pi * d);
            }
    }
    return K;
}

MatrixXd a1_block(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2) {
    MatrixXd K = heat_block(tau1, s1, tau2, s2, make_conj(tau1, s1, tau2, s2, false));
    const double d = tau2 - tau1;
    for (long a = 0; a < s1.size(); ++a)
        for (long b = 0; b < s2.size(); ++b) {
            const double S = s1[a] + s2[b];
            K(a, b) += num::airy_ai(S + d * d) * std::exp(d * S + 2.0 / 3.0 * d * d * d);
        }
    return K;
}

// Airy2->1 written independently of ktr0_block: the 1/(w1 - w2) half through
// the Airy lambda integral, the 1/(w1 + w2) half on a left contour pushed west
// of -gamma2 plus the residue at w1 = -w2.
MatrixXd a21_block(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, const LimitOptions& o,
                   bool symmetric, Saddle sd = {}) {
    const Conj cj = make_conj(tau1, s1, tau2, s2, symmetric);
    const VectorXd t1 = shifted(s1, tau1, tau1 < 0), t2 = shifted(s2, tau2, tau2 < 0);
    // first half: A2 kernel at s~ + tau^2, conjugated by e^{c}
    const VectorXd u1 = (t1.array() + tau1 * tau1).matrix(), u2 = (t2.array() + tau2 * tau2).matrix();
    MatrixXd K = a2_block(tau1, u1, tau2, u2, o);
    const double d = tau2 - tau1;
    for (long a = 0; a < t1.size(); ++a)
        for (long b = 0; b < t2.size(); ++b) {
            const double c = 2.0 / 3.0 * (tau2 * tau2 * tau2 - tau1 * tau1 * tau1) + t2[b] * tau2 - t1[a] * tau1 +
                             cj.g1[a] + cj.g2[b];
            K(a, b) *= std::exp(c);
            if (d > 0.0) {
                // a2_block subtracted the full-line Gaussian; put it back
                const double x = u1[a], y = u2[b];
                K(a, b) += std::exp(c + d * d * d / 12 - d * (x + y) / 2 - (x - y) * (x - y) / (4 * d)) /
                           std::sqrt(4 * pi * d);
            }
        }
    K += heat_block(tau1, t1, tau2, t2, cj);
    // second half: -(1/(2 pi i)^2) int int e^{f2 - f1} / (w1 + w2)
    // gamma1 stays near its saddle, at distance >= 1 from -gamma2 on either side
    const double v2 = std::max(0.5, -tau2 + sd.r2);
    const double v1 = -tau1 - sd.r1 < -v2 ? std::min(-tau1 - sd.r1, -v2 - 1.0) : std::max(-tau1 - sd.r1, -v2 + 1.0);
    const Contour L = make_contour(v1, false, o), R = make_contour(v2, true, o);
    const auto one = [](cplx) { return cplx(1.0); };
    MatrixXcd A = contour_matrix(L, tau1, t1, -1.0, one);
    MatrixXcd B = contour_matrix(R, tau2, t2, 1.0, one);
    MatrixXcd C(L.w.size(), R.w.size());
    for (std::size_t a = 0; a < L.w.size(); ++a)
        for (std::size_t b = 0; b < R.w.size(); ++b) C(long(a), long(b)) = -1.0 / (L.w[a] + R.w[b]);
    MatrixXd I = real_part(A * C * B.transpose(), "A2->1");
    rescale(I, plus(log_scale(L, tau1, t1, -1.0), cj.g1), plus(log_scale(R, tau2, t2, 1.0), cj.g2));
    K += I;
    // the defining contour has -gamma2 to the west of gamma1
    if (v1 < -v2) add_reflection_residue(K, tau1, t1, tau2, t2, cj);
    return K;
}

// ---------------------------------------------------------------- aGUE

// e^{-x^2/2} H_{-m}(x) for m >= 1, with the negative-order Hermite function
// H_{-m}(x) = (1/(m-1)!) int_0^inf e^{-t^2 - 2 t x} t^{m-1} dt.
double hermite_negative_weighted(int m, double x) {
    std::vector<double> gx, gw;
    num::gauss_legendre(200, gx, gw);
    const double T = std::max(-x, 0.0) + 10.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < gx.size(); ++k) {
        const double t = 0.5 * T * (gx[k] + 1.0);
        acc += 0.5 * T * gw[k] * std::exp(-t * t - 2 * t * x - 0.5 * x * x + (m - 1) * std::log(t));
    }
    return acc / std::tgamma(double(m));
}

// Sum form on vectors, with the conjugation e^{(xi1^2 - xi2^2)/2} removed when
// `symmetric` is set (determinants are unchanged).
MatrixXd ague_block(long n1, double th1, const VectorXd& x, long n2, double th2, const VectorXd& y, bool symmetric) {
    const bool prec = ague_precedes(n1, th1, n2, th2);
    long lmin, lmax;
    if (prec) {
        if (th1 == th2) throw InvalidArgument("aGUE kernel: infinite sum without decay (equal theta)");
        lmax = 0;
        // e^{-(theta1 - theta2)|l|} / sqrt(pi) < 1e-14
        const double L = std::ceil((32.3 - 0.5 * std::log(pi)) / (th1 - th2)) + 2;
        if (L > 20000) throw InvalidArgument("aGUE kernel: theta gap too small for the truncated sum");
        lmin = -long(L);
    } else {
        lmin = 1;
        lmax = (n2 + 1) / 2;
    }
    MatrixXd K = MatrixXd::Zero(x.size(), y.size());
    if (lmax < lmin) return K;
    const int kmax1 = int(n1 + 1 - 2 * lmin), kmax2 = int(n2 + 1 - 2 * lmin);
    std::vector<std::vector<double>> hx(x.size()), hy(y.size());
    for (long a = 0; a < x.size(); ++a) hx[a] = num::hermite_functions(std::max(kmax1, 0), x[a]);
    for (long b = 0; b < y.size(); ++b) hy[b] = num::hermite_functions(std::max(kmax2, 0), y[b]);
    for (long l = lmin; l <= lmax; ++l) {
        const long k1 = n1 + 1 - 2 * l, k2 = n2 + 1 - 2 * l;
        if (k2 < 0) continue;
        const double c = (l >= 1 ? 1.0 : -1.0) * std::exp(-(th2 - th1) * l);
        if (k1 >= 0) {
            // H_k1(x) H_k2(y) / (2^k2 k2!) = sqrt(pi) e^{(x^2+y^2)/2} h_k1 h_k2 sqrt(2^{k1-k2} k1!/k2!)
            const double ratio =
                std::exp(0.5 * ((k1 - k2) * std::log(2.0) + std::lgamma(k1 + 1.0) - std::lgamma(k2 + 1.0)));
            for (long a = 0; a < x.size(); ++a)
                for (long b = 0; b < y.size(); ++b) K(a, b) += c * ratio * hx[a][k1] * hy[b][k2];
            continue;
        }
        // k1 < 0 happens for n1 < n2; the integral representation continues H to negative order
        const double norm = std::exp(-0.25 * std::log(pi) - 0.5 * (k2 * std::log(2.0) + std::lgamma(k2 + 1.0)));
        for (long a = 0; a < x.size(); ++a) {
            const double g = hermite_negative_weighted(int(-k1), x[a]) * norm;
            for (long b = 0; b < y.size(); ++b) K(a, b) += c * g * hy[b][k2];
        }
    }
    // prefactor (2/sqrt(pi)) e^{-x^2} * sqrt(pi) e^{(x^2+y^2)/2}
    for (long a = 0; a < x.size(); ++a)
        for (long b = 0; b < y.size(); ++b)
            K(a, b) *= symmetric ? 2.0 : 2.0 * std::exp(0.5 * (y[b] * y[b] - x[a] * x[a]));
    return K;
}

// (1/(2 pi i)) int_{eps + iR} e^{a w^2 - 2 b w} w^m dw, a > 0, by the trapezoid rule.
double vertical_integral(double a, double b, long m) {
    const double eps = std::max(0.5, b / a);
    const double h = std::min(eps / 6.0, 0.3 / std::sqrt(a));
    // the integrand peaks at y = 0 and decays like e^{-a y^2}
    const double Y = std::sqrt((40.0 + std::abs(m) * std::log(1.0 + eps)) / a) + 1.0;
    const long n = long(std::ceil(Y / h));
    double s = 0.0;
    for (long k = -n; k <= n; ++k) {
        const cplx w(eps, k * h);
        s += (std::exp(a * w * w - 2.0 * b * w) * std::pow(w, double(m))).real();
    }
    return s * h / (2 * pi);
}

// K_trans(1) for any block. The direct double contour loses digits to
// cancellation once s~ + tau^2 is well below zero (complex saddles), where the
// algebraically equal Airy2->1 split is used instead, re-conjugated to match
// ktr1_block.
MatrixXd ktr0_any(double tau1, const VectorXd& s1, double tau2, const VectorXd& s2, const LimitOptions& o,
                  bool symmetric, Saddle sd) {
    const auto low = [](const VectorXd& s, double tau) {
        return (tau < 0 ? s.minCoeff() - tau * tau : s.minCoeff()) + tau * tau < -4.0;
    };
    if (!low(s1, tau1) && !low(s2, tau2)) return ktr0_block(tau1, s1, tau2, s2, o, symmetric, sd);
    MatrixXd K = a21_block(tau1, s1, tau2, s2, o, symmetric, sd);
    if (!symmetric) return K;
    const Conj want = make_conj(std::max(tau1, 0.0), s1, std::max(tau2, 0.0), s2, true);
    const Conj have = make_conj(tau1, s1, tau2, s2, true);
    for (long a = 0; a < K.rows(); ++a)
        for (long b = 0; b < K.cols(); ++b)
            K(a, b) *= std::exp(want.g1[a] - have.g1[a] + want.g2[b] - have.g2[b]);
    return K;
}

// ---------------------------------------------------------------- laws

MatrixXd law_block(const LimitLaw& law, int i, const VectorXd& x, int j, const VectorXd& y, bool symmetric) {
    const double t1 = law.tau.at(i), t2 = law.tau.at(j);
    const LimitOptions& o = law.options;
    switch (law.kind) {
        case LawKind::DBM: return dbm_block(law.M, t1, x, t2, y);
        case LawKind::A1: return a1_block(t1, x, t2, y);
        case LawKind::A2: return a2_block(t1, x, t2, y, o);
        case LawKind::A21:
            return by_saddle(t1, x, t2, y, false, [&](const VectorXd& a, const VectorXd& b, Saddle sd) {
                return a21_block(t1, a, t2, b, o, symmetric, sd);
            });
        case LawKind::Trans:
            return by_saddle(t1, x, t2, y, false, [&](const VectorXd& a, const VectorXd& b, Saddle sd) {
                return MatrixXd(ktr0_any(t1, a, t2, b, o, symmetric, sd) +
                                ktr1_block(law.M, law.kappa, t1, a, t2, b, o, symmetric, sd));
            });
        case LawKind::DBM2:
            return by_saddle(t1, x, t2, y, true, [&](const VectorXd& a, const VectorXd& b, Saddle sd) {
                return dbm2_block(law.M, t1, a, t2, b, o, symmetric, sd);
            });
        case LawKind::aGUE: return ague_block(law.n.at(i), t1, x, law.n.at(j), t2, y, symmetric);
    }
    return {};
}

void check_law(const LimitLaw& law) {
    if (law.tau.empty()) throw InvalidArgument("limit law needs at least one time");
    if ((law.kind == LawKind::DBM) && law.M < 1) throw InvalidArgument("DBM law needs M >= 1");
    if ((law.kind == LawKind::Trans || law.kind == LawKind::DBM2) && law.M < 0)
        throw InvalidArgument("limit law needs M >= 0");
    if (law.kind == LawKind::aGUE) {
        if (law.n.size() != law.tau.size()) throw InvalidArgument("aGUE law needs one n per theta");
        for (std::size_t a = 0; a < law.n.size(); ++a) {
            if (law.n[a] < 1) throw InvalidArgument("aGUE law needs n >= 1");
            for (std::size_t b = a + 1; b < law.n.size(); ++b)
                if (!ague_precedes(law.n[a], law.tau[a], law.n[b], law.tau[b]) &&
                    !ague_precedes(law.n[b], law.tau[b], law.n[a], law.tau[a]))
                    throw NotSpaceLike("aGUE law: points must be pairwise space-like");
        }
    }
}

// Scans the diagonal on a 1/2 grid past every region where |K(x, x)| > tol
// (the finite-rank parts can put mass far to the right, e.g. near tau^2 for
// DBM->2 at negative tau) and returns a point beyond the last such region.
double truncation_point(const LimitLaw& law, int i, double lo, double tol) {
    const double t = law.tau[i];
    double reach = std::max(lo, 0.0) + 8.0;
    if (law.kind == LawKind::DBM) reach += 2.0 * std::sqrt(double(law.M));
    if (law.kind == LawKind::aGUE) reach += std::sqrt(2.0 * law.n[i] + 1.0);
    if ((law.kind == LawKind::DBM2 || law.kind == LawKind::Trans) && law.M > 0)
        reach += t * t + 6.0 * std::sqrt(law.M * (1.0 + std::abs(t))) + std::max(0.0, -law.kappa) * 4.0;
    const long n = long(std::ceil((reach - lo) / 0.5)) + 1;
    VectorXd x(n);
    for (long k = 0; k < n; ++k) x[k] = lo + 0.5 * k;
    double last = lo;
    for (long k = 0; k < n; k += 64) {
        const long m = std::min<long>(64, n - k);
        const VectorXd part = x.segment(k, m);
        const MatrixXd d = law_block(law, i, part, i, part, true);
        for (long a = 0; a < m; ++a)
            if (!(std::abs(d(a, a)) <= tol)) last = part[a];
    }
    double up = std::max(last + 1.0, lo + 1.0);
    // then walk out until the diagonal is negligible
    for (int it = 0; it < 80; ++it) {
        const VectorXd e = VectorXd::Constant(1, up);
        if (std::abs(law_block(law, i, e, i, e, true)(0, 0)) <= tol) return up;
        up += 1.0;
    }
    return up;
}

}  // namespace

double dbm_pk(int k, double x) {
    const auto h = num::hermite_functions(k, x / std::sqrt(2.0));
    return std::pow(2.0, -0.25) * std::exp(x * x / 4) * h[k];
}

double dbm_kernel(int M, double tau1, double x1, double tau2, double x2) {
    if (M < 1) throw InvalidArgument("dbm_kernel: M >= 1 required");
    return dbm_block(M, tau1, VectorXd::Constant(1, x1), tau2, VectorXd::Constant(1, x2))(0, 0);
}

double trans_kernel(int M, double kappa, double tau1, double s1, double tau2, double s2, const LimitOptions& o) {
    if (M < 0) throw InvalidArgument("trans_kernel: M >= 0 required");
    const VectorXd a = VectorXd::Constant(1, s1), b = VectorXd::Constant(1, s2);
    return by_saddle(tau1, a, tau2, b, false, [&](const VectorXd& x, const VectorXd& y, Saddle sd) {
        return MatrixXd(ktr0_any(tau1, x, tau2, y, o, false, sd) + ktr1_block(M, kappa, tau1, x, tau2, y, o, false, sd));
    })(0, 0);
}

double dbm2_kernel(int M, double tau1, double s1, double tau2, double s2, const LimitOptions& o) {
    if (M < 0) throw InvalidArgument("dbm2_kernel: M >= 0 required");
    return by_saddle(tau1, VectorXd::Constant(1, s1), tau2, VectorXd::Constant(1, s2), true,
                     [&](const VectorXd& x, const VectorXd& y, Saddle sd) {
                         return dbm2_block(M, tau1, x, tau2, y, o, false, sd);
                     })(0, 0);
}

bool ague_precedes(long n1, double th1, long n2, double th2) {
    return n1 <= n2 && th1 >= th2 && !(n1 == n2 && th1 == th2);
}

double ague_kernel_sum(long n1, double th1, double xi1, long n2, double th2, double xi2) {
    if (n1 < 1 || n2 < 1) throw InvalidArgument("aGUE kernel: n >= 1 required");
    return ague_block(n1, th1, VectorXd::Constant(1, xi1), n2, th2, VectorXd::Constant(1, xi2), false)(0, 0);
}

double ague_conjugation(long n1, double th1, long n2, double th2) {
    return std::exp((n2 - n1) * std::log(2.0) + th2 * (n2 + 1) / 2.0 - th1 * (n1 + 1) / 2.0);
}

double ague_kernel_integral(long n1, double th1, double xi1, long n2, double th2, double xi2) {
    if (n1 < 1 || n2 < 1) throw InvalidArgument("aGUE kernel: n >= 1 required");
    const double tau1 = std::exp(th1), tau2 = std::exp(th2);
    const double r1 = std::sqrt(tau1), r2 = std::sqrt(tau2);
    double total = 0.0;
    if (ague_precedes(n1, th1, n2, th2)) {
        const long d = n2 - n1;
        const double sgn = (n2 + 1) % 2 ? -1.0 : 1.0;  // (-1)^{n2+1}
        for (int pass = 0; pass < 2; ++pass) {
            const double c = xi1 * r1 + (pass ? 1.0 : -1.0) * xi2 * r2;
            double v;
            if (tau1 == tau2) {
                // (1/(2 pi i)) int e^{-2 c w} w^{-d} dw: the residue at 0 when c < 0
                v = (c < 0.0 && d >= 1) ? std::exp((d - 1) * std::log(-2 * c) - std::lgamma(double(d))) : 0.0;
            } else {
                v = vertical_integral(tau1 - tau2, c, -d);
            }
            total -= 2 * r1 * v * (pass ? sgn : 1.0);
        }
    }
    // residue in w2 at 0 (|w2| < eps), then the vertical w1 integral
    for (long l = 0; 2 * l <= n2 - 1; ++l) {
        const long j = n2 - 1 - 2 * l;
        const double cj = std::pow(tau2, j / 2.0) * num::hermite(int(j), xi2) / std::tgamma(j + 1.0);
        total += 2 * r1 * 2 * cj * vertical_integral(tau1, xi1 * r1, n1 - 2 * l - 1);
    }
    return total;
}

AiryKind parse_airy_kind(const std::string& s) {
    if (s == "A1") return AiryKind::A1;
    if (s == "A2") return AiryKind::A2;
    if (s == "A21") return AiryKind::A21;
    throw InvalidArgument("unknown Airy kernel '" + s + "'");
}

double airy_family(AiryKind kind, double tau1, double s1, double tau2, double s2, const LimitOptions& o) {
    const VectorXd a = VectorXd::Constant(1, s1), b = VectorXd::Constant(1, s2);
    switch (kind) {
        case AiryKind::A1: return a1_block(tau1, a, tau2, b)(0, 0);
        case AiryKind::A2: return a2_block(tau1, a, tau2, b, o)(0, 0);
        case AiryKind::A21:
            return by_saddle(tau1, a, tau2, b, false, [&](const VectorXd& x, const VectorXd& y, Saddle sd) {
                return a21_block(tau1, x, tau2, y, o, false, sd);
            })(0, 0);
    }
    return 0.0;
}

LawKind parse_law_kind(const std::string& s) {
    if (s == "DBM") return LawKind::DBM;
    if (s == "A1") return LawKind::A1;
    if (s == "A2") return LawKind::A2;
    if (s == "A21") return LawKind::A21;
    if (s == "Trans") return LawKind::Trans;
    if (s == "DBM2") return LawKind::DBM2;
    if (s == "aGUE") return LawKind::aGUE;
    throw InvalidArgument("unknown limit law '" + s + "'");
}

std::string to_string(LawKind k) {
    switch (k) {
        case LawKind::DBM: return "DBM";
        case LawKind::A1: return "A1";
        case LawKind::A2: return "A2";
        case LawKind::A21: return "A21";
        case LawKind::Trans: return "Trans";
        case LawKind::DBM2: return "DBM2";
        case LawKind::aGUE: return "aGUE";
    }
    return "?";
}

LimitLaw LimitLaw::one_point(LawKind kind, int M, double kappa, double tau) {
    LimitLaw l;
    l.kind = kind;
    l.M = M;
    l.kappa = kappa;
    l.tau = {tau};
    if (kind == LawKind::aGUE) l.n = {M};
    return l;
}

std::string LimitLaw::describe() const {
    std::ostringstream os;
    os << to_string(kind);
    if (kind == LawKind::DBM || kind == LawKind::DBM2 || kind == LawKind::Trans) os << "(M=" << M;
    if (kind == LawKind::Trans) os << ",kappa=" << kappa;
    if (kind == LawKind::DBM || kind == LawKind::DBM2 || kind == LawKind::Trans) os << ")";
    os << " at " << (kind == LawKind::aGUE ? "(n,theta)=" : "tau=");
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (i) os << ';';
        if (kind == LawKind::aGUE) os << '(' << n[i] << ',' << tau[i] << ')';
        else os << tau[i];
    }
    return os.str();
}

double law_kernel(const LimitLaw& law, int i, double x, int j, double y) {
    check_law(law);
    return law_block(law, i, VectorXd::Constant(1, x), j, VectorXd::Constant(1, y), false)(0, 0);
}

double limit_cdf(const LimitLaw& law, const std::vector<double>& s) {
    check_law(law);
    if (s.size() != law.tau.size()) throw InvalidArgument("limit_cdf: one threshold per time required");
    num::NystromOptions nopt;
    nopt.nodes = law.options.nodes;
    std::vector<num::Slice> slices;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double lo = law.kind == LawKind::aGUE ? std::max(s[i], 0.0) : s[i];
        slices.push_back({lo, truncation_point(law, int(i), lo, 0.1 * nopt.edge_tol)});
    }
    num::BlockKernel bk = [&](int bi, const VectorXd& xi, int bj, const VectorXd& xj) {
        return law_block(law, bi, xi, bj, xj, true);
    };
    return num::fredholm_det_continuum(bk, slices, nopt);
}

std::vector<double> cdf_table(const LimitLaw& law, const std::vector<double>& s) {
    if (law.tau.size() != 1) throw InvalidArgument("cdf_table: one-point laws only");
    std::vector<double> out;
    out.reserve(s.size());
    for (double v : s) out.push_back(limit_cdf(law, {v}));
    return out;
}

}  // namespace tasep::ak
