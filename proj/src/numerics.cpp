#include "tasep/numerics.hpp"

#include <boost/math/special_functions/airy.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tasep::num {

Series Series::power(double c, double b, long e, int order) {
    if (e < 0 && c == 0.0) throw NumericalError("Series::power: negative power of a series vanishing at 0");
    Series s(order);
    if (c == 0.0) {
        // (b u)^e with e >= 0
        if (e <= order) s.c_[e] = std::pow(b, double(e));
        return s;
    }
    // c^e * sum_k binom(e, k) (b u / c)^k
    double coef = std::pow(c, double(e));
    const double r = b / c;
    for (int k = 0; k <= order; ++k) {
        s.c_[k] = coef;
        coef *= double(e - k) / double(k + 1) * r;
    }
    return s;
}

Series Series::exp(double a, double b, int order) {
    Series s(order);
    double coef = std::exp(a);
    for (int k = 0; k <= order; ++k) {
        s.c_[k] = coef;
        coef *= b / double(k + 1);
    }
    return s;
}

Series Series::linear(double c0, double c1, int order) {
    Series s(order, c0);
    if (order >= 1) s.c_[1] = c1;
    return s;
}

Series Series::operator*(const Series& o) const {
    const int n = std::min(order(), o.order());
    Series r(n);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j) r.c_[i + j] += c_[i] * o.c_[j];
    return r;
}

Series Series::operator+(const Series& o) const {
    const int n = std::min(order(), o.order());
    Series r(n);
    for (int i = 0; i <= n; ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
}

Series Series::operator*(double s) const {
    Series r = *this;
    for (double& v : r.c_) v *= s;
    return r;
}

ContourRule circle_rule(cplx center, double radius, int n) {
    ContourRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const cplx dz = std::polar(radius, 2.0 * std::numbers::pi * k / n);
        r.nodes[k] = center + dz;
        r.weights[k] = dz / double(n);
    }
    return r;
}

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= m; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= m; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = m * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

ContourRule ray_rule(const RayPair& c) {
    std::vector<double> gx, gw;
    gauss_legendre(c.order, gx, gw);
    ContourRule r;
    r.nodes.reserve(2 * c.order);
    r.weights.reserve(2 * c.order);
    const cplx i2pi(0.0, 2.0 * std::numbers::pi);
    const cplx din = std::polar(1.0, c.angle_in);
    const cplx dout = std::polar(1.0, c.angle_out);
    for (int k = 0; k < c.order; ++k) {
        const double s = 0.5 * c.R * (gx[k] + 1.0);
        const double ws = 0.5 * c.R * gw[k];
        // incoming leg traversed towards the vertex: dw = -din ds
        r.nodes.push_back(c.vertex + s * din);
        r.weights.push_back(-din * ws / i2pi);
        r.nodes.push_back(c.vertex + s * dout);
        r.weights.push_back(dout * ws / i2pi);
    }
    return r;
}

ScaledValue hermite_scaled(int k, double x) {
    if (k < 0) throw InvalidArgument("hermite: negative degree");
    double h0 = 1.0, h1 = 2.0 * x;
    long ex = 0;
    if (k == 0) return {1.0, 0};
    for (int j = 1; j < k; ++j) {
        const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
        h0 = h1;
        h1 = h2;
        const double a = std::max(std::abs(h0), std::abs(h1));
        if (a > 0x1p500 || (a < 0x1p-500 && a > 0.0)) {
            int e;
            std::frexp(a, &e);
            h0 = std::ldexp(h0, -e);
            h1 = std::ldexp(h1, -e);
            ex += e;
        }
    }
    return {h1, ex};
}

double hermite(int k, double x) {
    const ScaledValue s = hermite_scaled(k, x);
    if (s.exponent > std::numeric_limits<double>::max_exponent - 2)
        throw NumericalError("hermite: value exceeds double range; use hermite_scaled");
    const double v = std::ldexp(s.mantissa, int(s.exponent));
    if (!std::isfinite(v)) throw NumericalError("hermite: value exceeds double range; use hermite_scaled");
    return v;
}

std::vector<double> hermite_functions(int kmax, double x) {
    std::vector<double> h(kmax + 1);
    h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (kmax >= 1) h[1] = std::sqrt(2.0) * x * h[0];
    for (int k = 1; k < kmax; ++k)
        h[k + 1] = std::sqrt(2.0 / (k + 1)) * x * h[k] - std::sqrt(double(k) / (k + 1)) * h[k - 1];
    return h;
}

double airy_ai(double x) { return boost::math::airy_ai(x); }
double airy_ai_prime(double x) { return boost::math::airy_ai_prime(x); }

ConjugationRecord balance_in_place(Eigen::MatrixXd& A, int sweeps) {
    const long n = A.rows();
    ConjugationRecord rec;
    rec.log2_factor.assign(n, 0);
    for (int s = 0; s < sweeps; ++s) {
        bool changed = false;
        for (long i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (long j = 0; j < n; ++j) {
                if (j == i) continue;
                r += std::abs(A(i, j));
                c += std::abs(A(j, i));
            }
            if (r == 0.0 || c == 0.0) continue;
            // factor 2^e with e chosen so that c * 2^e ~ r * 2^-e
            const int e = int(std::lround(0.5 * std::log2(r / c)));
            if (e == 0) continue;
            A.row(i) *= std::ldexp(1.0, -e);
            A.col(i) *= std::ldexp(1.0, e);
            rec.log2_factor[i] -= e;
            changed = true;
        }
        if (!changed) break;
    }
    return rec;
}

void apply_conjugation(Eigen::MatrixXd& A, const ConjugationRecord& rec) {
    for (long i = 0; i < A.rows(); ++i) {
        const int e = rec.log2_factor[i];
        if (e == 0) continue;
        A.row(i) *= std::ldexp(1.0, e);
        A.col(i) *= std::ldexp(1.0, -e);
    }
}

DeterminantResult fredholm_det_discrete(const DiscreteKernelMatrix& m) {
    const long n = m.A.rows();
    if (m.A.cols() != n) throw InvalidArgument("fredholm_det_discrete: matrix not square");
    if (n == 0) return {1.0, m.tail_bound, 0};
    if (!m.A.allFinite()) throw NumericalError("fredholm_det_discrete: non-finite kernel entries");
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - m.A;
    const double d = B.fullPivLu().determinant();
    if (!std::isfinite(d)) throw NumericalError("fredholm_det_discrete: determinant overflow");
    return {d, m.tail_bound, n};
}

double fredholm_det_continuum(const BlockKernel& kernel, const std::vector<Slice>& slices,
                              const NystromOptions& opts) {
    std::vector<double> gx, gw;
    gauss_legendre(opts.nodes, gx, gw);
    const int m = opts.nodes;
    std::vector<Eigen::VectorXd> x(slices.size()), sw(slices.size());
    std::vector<int> offset(slices.size() + 1, 0);
    for (std::size_t b = 0; b < slices.size(); ++b) {
        const double lo = slices[b].lower, hi = slices[b].upper;
        if (hi <= lo) {
            offset[b + 1] = offset[b];
            continue;
        }
        x[b].resize(m);
        sw[b].resize(m);
        for (int k = 0; k < m; ++k) {
            x[b][k] = lo + 0.5 * (hi - lo) * (gx[k] + 1.0);
            sw[b][k] = std::sqrt(0.5 * (hi - lo) * gw[k]);
        }
        offset[b + 1] = offset[b] + m;
        Eigen::VectorXd edge(1);
        edge[0] = hi;
        const double ke = std::abs(kernel(int(b), edge, int(b), edge)(0, 0));
        if (!(ke <= opts.edge_tol))
            throw NumericalError("fredholm_det_continuum: kernel does not decay at the truncation point");
    }
    const int n = offset.back();
    if (n == 0) return 1.0;
    Eigen::MatrixXd A(n, n);
    for (std::size_t bi = 0; bi < slices.size(); ++bi) {
        if (offset[bi + 1] == offset[bi]) continue;
        for (std::size_t bj = 0; bj < slices.size(); ++bj) {
            if (offset[bj + 1] == offset[bj]) continue;
            Eigen::MatrixXd blk = kernel(int(bi), x[bi], int(bj), x[bj]);
            blk = sw[bi].asDiagonal() * blk * sw[bj].asDiagonal();
            A.block(offset[bi], offset[bj], m, m) = blk;
        }
    }
    if (!A.allFinite()) throw NumericalError("fredholm_det_continuum: non-finite kernel values");
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n) - A;
    balance_in_place(B, 32);
    return B.fullPivLu().determinant();
}

double fredholm_det_continuum(const std::function<double(int, double, int, double)>& kernel,
                              const std::vector<Slice>& slices, const NystromOptions& opts) {
    BlockKernel bk = [&](int bi, const Eigen::VectorXd& xi, int bj, const Eigen::VectorXd& xj) {
        Eigen::MatrixXd out(xi.size(), xj.size());
        for (long a = 0; a < xi.size(); ++a)
            for (long b = 0; b < xj.size(); ++b) out(a, b) = kernel(bi, xi[a], bj, xj[b]);
        return out;
    };
    return fredholm_det_continuum(bk, slices, opts);
}

}  // namespace tasep::num
