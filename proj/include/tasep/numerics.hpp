#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "tasep/core.hpp"

namespace tasep::num {

using cplx = std::complex<double>;

struct PoleOnContour : Error {
    using Error::Error;
};
struct ContourDecayError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};

struct QuadResult {
    cplx value;
    double error = 0.0;  // |I_N - I_{N/2}| for circles, endpoint tail bound for rays
    int nodes = 0;
};

// Truncated power series in u with real coefficients, used for exact residue
// extraction at finite-order poles.
class Series {
public:
    Series() = default;
    explicit Series(int order, double c0 = 0.0) : c_(order + 1, 0.0) { c_[0] = c0; }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    double operator[](int k) const { return k >= 0 && k < int(c_.size()) ? c_[k] : 0.0; }
    double& operator[](int k) { return c_[k]; }

    // (c + b u)^e for integer e; c must be nonzero when e < 0.
    static Series power(double c, double b, long e, int order);
    // exp(a + b u)
    static Series exp(double a, double b, int order);
    // c0 + c1 u
    static Series linear(double c0, double c1, int order);

    Series operator*(const Series& o) const;
    Series operator+(const Series& o) const;
    Series operator*(double s) const;

private:
    std::vector<double> c_;
};

// Nodes and weights of a quadrature rule for (1/2 pi i) * integral f(w) dw.
struct ContourRule {
    std::vector<cplx> nodes;
    std::vector<cplx> weights;

    std::size_t size() const { return nodes.size(); }
    template <class F>
    cplx apply(F&& f) const {
        cplx s = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) s += f(nodes[k]) * weights[k];
        return s;
    }
};

struct CircleOptions {
    int n0 = 256;
    int n_max = 1 << 16;
    double tol = 1e-12;
};

// Trapezoid rule on the anticlockwise circle |w - c| = r.
ContourRule circle_rule(cplx center, double radius, int n);

// (1/2 pi i) * contour integral of f over |w - c| = r. The node count starts at
// opts.n0 and doubles until successive values agree to opts.tol (relative, with a
// floor set by the rounding level of the samples).
template <class F>
QuadResult circle_integral(F&& f, cplx center, double radius, const CircleOptions& opts = {}) {
    if (!(radius > 0.0)) throw PoleOnContour("circle radius must be positive");
    auto sample = [&](int k, int n) {
        const double th = 2.0 * std::numbers::pi * k / n;
        const cplx dz = std::polar(radius, th);
        const cplx v = f(center + dz) * dz;
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw PoleOnContour("non-finite integrand sample on circle");
        return v;
    };
    int n = opts.n0;
    cplx sum = 0.0;
    double abs_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const cplx v = sample(k, n);
        sum += v;
        abs_sum += std::abs(v);
    }
    cplx prev = sum / double(n);
    while (true) {
        if (2 * n > opts.n_max) return {prev, std::abs(prev), n};
        for (int k = 1; k < 2 * n; k += 2) {
            const cplx v = sample(k, 2 * n);
            sum += v;
            abs_sum += std::abs(v);
        }
        n *= 2;
        const cplx cur = sum / double(n);
        const double diff = std::abs(cur - prev);
        const double floor = 64.0 * 2.2e-16 * abs_sum / n;
        if (diff <= std::max(opts.tol * std::abs(cur), floor)) return {cur, diff, n};
        prev = cur;
    }
}

// Fixed-node trapezoid value; used inside matrix assembly where adaptivity is
// handled by the caller.
template <class F>
cplx circle_integral_fixed(F&& f, cplx center, double radius, int n) {
    cplx sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const cplx dz = std::polar(radius, 2.0 * std::numbers::pi * k / n);
        sum += f(center + dz) * dz;
    }
    return sum / double(n);
}

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

// Two rays meeting at `vertex`: the path comes in from vertex + R e^{i angle_in}
// and leaves towards vertex + R e^{i angle_out}. Gauss-Legendre of the given order
// on each segment, weights include the 1/(2 pi i) factor.
struct RayPair {
    cplx vertex = 0.0;
    double angle_in = -std::numbers::pi / 3;
    double angle_out = std::numbers::pi / 3;
    double R = 8.0;
    int order = 80;
};

ContourRule ray_rule(const RayPair& c);

// Contour from e^{i angle_in} infinity to e^{i angle_out} infinity. Throws
// ContourDecayError if |f| at the truncation radius is not negligible.
template <class F>
QuadResult ray_integral(F&& f, const RayPair& c, double decay_tol = 1e-14) {
    const ContourRule rule = ray_rule(c);
    cplx s = 0.0;
    double fmax = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const cplx v = f(rule.nodes[k]);
        fmax = std::max(fmax, std::abs(v));
        s += v * rule.weights[k];
    }
    const double e_in = std::abs(f(c.vertex + std::polar(c.R, c.angle_in)));
    const double e_out = std::abs(f(c.vertex + std::polar(c.R, c.angle_out)));
    const double tail = std::max(e_in, e_out);
    if (tail > decay_tol * std::max(fmax, 1e-300) && tail > 1e-300)
        throw ContourDecayError("integrand has not decayed at the ray truncation radius");
    return {s, tail * c.R, static_cast<int>(rule.size())};
}

// Physicists' Hermite polynomial H_k by the three-term recurrence. Throws
// NumericalError when the value leaves the double range; use hermite_scaled then.
double hermite(int k, double x);

// H_k(x) = mantissa * 2^exponent, computed with per-step rescaling.
struct ScaledValue {
    double mantissa;
    long exponent;
    double log_abs() const { return std::log(std::abs(mantissa)) + exponent * std::numbers::ln2; }
};
ScaledValue hermite_scaled(int k, double x);

// Orthonormal Hermite functions h_k(x) = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)),
// k = 0..kmax, by the stable normalized recurrence.
std::vector<double> hermite_functions(int kmax, double x);

double airy_ai(double x);
double airy_ai_prime(double x);

// Multiplicative diagonal factors c_i, stored as base-2 exponents so that the
// conjugation A -> C A C^{-1} is exact in floating point.
struct ConjugationRecord {
    std::vector<int> log2_factor;
    bool empty() const { return log2_factor.empty(); }
};

// Osborne balancing with power-of-two factors; returns the record that was applied.
ConjugationRecord balance_in_place(Eigen::MatrixXd& A, int sweeps = 8);
void apply_conjugation(Eigen::MatrixXd& A, const ConjugationRecord& rec);

struct SiteWindow {
    long lo;  // inclusive
    long hi;  // exclusive
    long size() const { return hi > lo ? hi - lo : 0; }
};

struct DiscreteKernelMatrix {
    Eigen::MatrixXd A;                 // chi K chi restricted to the windows
    std::vector<SiteWindow> windows;   // one per point, blocks laid out in order
    ConjugationRecord conjugation;     // applied to A (empty when none)
    double tail_bound = 0.0;           // bound on the neglected part of the operator
};

struct DeterminantResult {
    double value;
    double tail_bound;
    long dimension;
};

// det(I - A) by dense LU with full pivoting.
DeterminantResult fredholm_det_discrete(const DiscreteKernelMatrix& m);

// Extended kernel on a union of slices; returns the block between slice bi at
// points xi and slice bj at points xj.
using BlockKernel =
    std::function<Eigen::MatrixXd(int bi, const Eigen::VectorXd& xi, int bj, const Eigen::VectorXd& xj)>;

struct Slice {
    double lower;  // s_k
    double upper;  // truncation of (s_k, infinity) beyond which the kernel is negligible
};

struct NystromOptions {
    int nodes = 60;           // Gauss-Legendre nodes per slice
    double edge_tol = 1e-9;   // allowed |K(u,u)| at the truncation point
};

// det(I - chi K chi) on L^2 of the union of slices (Bornemann's Nystrom method).
double fredholm_det_continuum(const BlockKernel& kernel, const std::vector<Slice>& slices,
                              const NystromOptions& opts = {});

// Pointwise-kernel convenience overload.
double fredholm_det_continuum(const std::function<double(int, double, int, double)>& kernel,
                              const std::vector<Slice>& slices, const NystromOptions& opts = {});

}  // namespace tasep::num
