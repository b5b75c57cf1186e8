#include "tasep/fkernel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tasep::fk {

using num::cplx;
using num::Series;

namespace {

double rate(long i, const SystemSpec& spec) { return spec.jump_rate(i); }

double real_checked(cplx z, const KernelOptions& o, const char* what) {
    if (std::abs(z.imag()) > o.imag_tol * std::max(1.0, std::abs(z.real())))
        throw ImaginaryResidue(std::string(what) + ": imaginary part above tolerance");
    return z.real();
}

// (c + b u)^e where a vanishing base with e < 0 is factored out as u^e and
// recorded in `shift`.
Series pole_power(double c, double b, long e, int order, long& shift) {
    if (c == 0.0 && e < 0) {
        shift += -e;
        return Series::power(b, 0.0, e, order);
    }
    return Series::power(c, b, e, order);
}

// Integer power of a complex number by repeated squaring.
cplx ipow(cplx z, long e) {
    if (e < 0) return 1.0 / ipow(z, -e);
    cplx r = 1.0;
    while (e) {
        if (e & 1) r *= z;
        z *= z;
        e >>= 1;
    }
    return r;
}

// Residue at v = alpha - 1 of H(v) * R(v), H(v) = (2v+2-alpha)/((v+1)(v+1-alpha))^p,
// where R is produced on demand at a requested series order. R may carry a pole
// at v = alpha - 1 (returned through `shift`).
template <class Build>
double residue_alpha(double alpha, long p, Build&& build) {
    // first pass to learn the pole order contributed by R
    long shift = 0;
    build(0, shift);
    const int order = int(p - 1 + shift);
    if (order < 0) return 0.0;
    long s2 = 0;
    Series r = build(order, s2);
    Series h = Series::linear(alpha, 2.0, order) * Series::power(alpha, 1.0, -p, order);
    return (h * r)[order];
}

// Sum of the residues at w = 1 and w = alpha of e^{tw} w^{-E-1} / prod_{i=lo+1}^{hi} (w - v_i).
// For E < 0 this is the whole contour integral, and it avoids the cancellation a
// large circle suffers from the growing factor w^{-E-1}.
double rate_residues(double t, long E, long lo, long hi, const SystemSpec& spec) {
    long m1 = 0, ma = 0;
    for (long i = lo + 1; i <= hi; ++i) (rate(i, spec) == 1.0 ? m1 : ma)++;
    const double a = spec.alpha();
    auto residue = [&](double c, long mc, double other, long mo) {
        const int ord = int(mc - 1);
        Series s = Series::exp(t * c, t, ord) * Series::power(c, 1.0, -E - 1, ord);
        if (mo > 0) s = s * Series::power(c - other, 1.0, -mo, ord);
        return s[ord];
    };
    double total = 0.0;
    if (m1 > 0) total += residue(1.0, m1, a, ma);
    if (ma > 0) total += residue(a, ma, 1.0, m1);
    return total;
}

// [w^E] e^{tw} / prod_{i=lo+1}^{hi} (w - v_i): the residue at 0 alone of the
// integrands of psi (j > n) and phi.
double zero_residue(double t, long E, long lo, long hi, const SystemSpec& spec) {
    if (E < 0) return 0.0;
    long m1 = 0, ma = 0;
    for (long i = lo + 1; i <= hi; ++i) (rate(i, spec) == 1.0 ? m1 : ma)++;
    const int ord = int(E);
    Series s = Series::exp(0.0, t, ord) * Series::power(-1.0, 1.0, -m1, ord);
    if (ma > 0) s = s * Series::power(-spec.alpha(), 1.0, -ma, ord);
    return s[ord];
}

}  // namespace

KernelVariant parse_variant(const std::string& s) {
    if (s == "general") return KernelVariant::general;
    if (s == "M1") return KernelVariant::M1;
    if (s == "Minf") return KernelVariant::Minf;
    if (s == "shock") return KernelVariant::shock;
    throw InvalidArgument("unknown kernel variant '" + s + "'");
}

std::string to_string(KernelVariant v) {
    switch (v) {
        case KernelVariant::general: return "general";
        case KernelVariant::M1: return "M1";
        case KernelVariant::Minf: return "Minf";
        case KernelVariant::shock: return "shock";
    }
    return "?";
}

double psi(long n, long j, double t, long x, const SystemSpec& spec, const KernelOptions& o) {
    if (n < 1 || j < 1) throw InvalidArgument("psi: indices must be >= 1");
    const int M = spec.M();
    const long E = x + n + j - 2L * M;
    if (j <= n && E < 0) return 0.0;
    if (j > n && E < 0) return rate_residues(t, E, n, j, spec);
    const double vmax = std::max(1.0, spec.alpha());
    double r = t > 0.0 ? std::max(double(E), 1.0) / t : 1.0;
    r = std::clamp(r, 1e-2, 1e3);
    if (j > n) r = std::max(r, 1.5 * vmax + 0.5);
    auto f = [&](cplx w) {
        cplx v = std::exp(t * w) * ipow(w, -E - 1);
        if (n > j)
            for (long i = j + 1; i <= n; ++i) v *= (w - rate(i, spec));
        else
            for (long i = n + 1; i <= j; ++i) v /= (w - rate(i, spec));
        return v;
    };
    return real_checked(num::circle_integral(f, 0.0, r, o.circle).value, o, "psi");
}

double phi_fn(long n, long j, double t, long x, const SystemSpec& spec) {
    if (n < 1 || j < 1) throw InvalidArgument("phi_fn: indices must be >= 1");
    if (j > n) return 0.0;
    const int M = spec.M();
    const double a = spec.alpha();
    const long d = x + 2 * n - 2L * M;
    const long p = n - j + 1;
    const int ord = int(p - 1);
    if (n <= M) {
        // residue at u = 0 (v = alpha - 1 + u)
        Series s = Series::power(a, 1.0, d - p, ord) * Series::linear(a, 2.0, ord) * Series::exp(-t * a, -t, ord);
        return s[ord];
    }
    if (j >= M + 1 || a == 1.0) {
        Series s = Series::power(1.0, 1.0, d - p, ord) * Series::linear(1.0, 2.0, ord) * Series::exp(-t, -t, ord);
        return s[ord];
    }
    return q_fn(n, j, t, x, PoleChoice::zero, spec) + q_fn(n, j, t, x, PoleChoice::v, spec);
}

double q_fn(long n, long j, double t, long x, PoleChoice pole, const SystemSpec& spec) {
    const int M = spec.M();
    if (j < 1 || j > M) throw InvalidArgument("q_fn: requires 1 <= j <= M");
    if (n < 1) throw InvalidArgument("q_fn: n must be >= 1");
    const double a = spec.alpha();
    const long nm = n - M;
    const long pp = M - j + 1;
    const long ex = x + nm;  // exponent of (1+z) after cancelling (z(1+z))^{n-M}

    switch (pole) {
        case PoleChoice::v:
            // z = v residue: G(v) with G(z) = (1+z)^{x+n-M} e^{-t(1+z)} z^{-(n-M)}
            return residue_alpha(a, pp, [&](int ord, long& sh) {
                return Series::power(a, 1.0, ex, ord) * Series::exp(-t * a, -t, ord) *
                       pole_power(a - 1.0, 1.0, -nm, ord, sh);
            });
        case PoleChoice::zero: {
            const long L = nm - 1;
            if (L < 0) return 0.0;
            // a_k = [z^k] (1+z)^{x+n-M} e^{-t(1+z)} (1+2z)
            Series ak = Series::power(1.0, 1.0, ex, int(L)) * Series::exp(-t, -t, int(L)) *
                        Series::linear(1.0, 2.0, int(L));
            double total = 0.0;
            // b_m(v) = sum_i v^{-i-1} (-1-v)^{-(m-i)-1}; each term is handled separately
            // so that a pole of v^{-i-1} at alpha = 1 can be factored out.
            for (long m = 0; m <= L; ++m)
                for (long i = 0; i <= m; ++i)
                    total += ak[int(L - m)] * residue_alpha(a, pp, [&](int ord, long& sh) {
                                 return pole_power(a - 1.0, 1.0, -i - 1, ord, sh) *
                                        Series::power(-a, -1.0, -(m - i) - 1, ord);
                             });
            return total;
        }
        case PoleChoice::minus_one: {
            const long P = -ex;
            if (P <= 0) return 0.0;
            // c_k = [s^k] e^{-ts} (s-1)^{-(n-M)} (2s-1), z = -1 + s
            Series c = Series::exp(0.0, -t, int(P)) * Series::power(-1.0, 1.0, -nm, int(P)) *
                       Series::linear(-1.0, 2.0, int(P));
            double total = 0.0;
            // e_m(v) = sum_i (1+v)^{-i-1} (-v)^{-(m-i)-1}
            for (long m = 0; m <= P - 1; ++m)
                for (long i = 0; i <= m; ++i)
                    total += c[int(P - 1 - m)] * residue_alpha(a, pp, [&](int ord, long& sh) {
                                 return Series::power(a, 1.0, -i - 1, ord) *
                                        pole_power(1.0 - a, -1.0, -(m - i) - 1, ord, sh);
                             });
            return total;
        }
    }
    return 0.0;
}

double phi_full(const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2, const SystemSpec& spec,
                const KernelOptions& o) {
    if (!precedes(p1, p2)) return 0.0;
    const double dt = p1.t - p2.t;
    const long E = x1 + p1.n - x2 - p2.n;
    if (p1.n == p2.n) {
        if (E < 0) return 0.0;
        return std::exp(E * std::log(dt) - std::lgamma(E + 1.0));
    }
    if (E < 0) return rate_residues(dt, E, p1.n, p2.n, spec);
    double r = 1.5 * std::max(1.0, spec.alpha()) + 0.5;
    if (dt > 0.0) r = std::max(r, double(E) / dt);
    auto f = [&](cplx w) {
        cplx v = std::exp(dt * w) * ipow(w, -E - 1);
        for (long i = p1.n + 1; i <= p2.n; ++i) v /= (w - rate(i, spec));
        return v;
    };
    return real_checked(num::circle_integral(f, 0.0, r, o.circle).value, o, "phi");
}

double phi_hat(const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2, const SystemSpec&) {
    if (!precedes(p1, p2)) return 0.0;
    // [w^E] e^{dt w} (w - 1)^{n1 - n2}
    const long E = x1 + p1.n - x2 - p2.n;
    if (E < 0) return 0.0;
    const double dt = p1.t - p2.t;
    Series s = Series::exp(0.0, dt, int(E)) * Series::power(-1.0, 1.0, p1.n - p2.n, int(E));
    return s[int(E)];
}

namespace {

// Separable discretisation of the K1_hat double integral:
//   K(x1, x2) = sum_{a,b} A(w_a; x1) C(w_a, v_b) B(v_b; x2).
struct K1HatRule {
    num::ContourRule w, v;
    Eigen::MatrixXcd C;  // includes weights
};

K1HatRule make_k1hat_rule(int n) {
    K1HatRule r;
    r.w = num::circle_rule(0.0, 0.5, n);
    r.v = num::circle_rule(0.0, 0.25, n);
    r.C.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const cplx w = r.w.nodes[a], v = r.v.nodes[b];
            r.C(a, b) = r.w.weights[a] * r.v.weights[b] / ((w + v) * (w - v - 1.0));
        }
    return r;
}

cplx k1hat_A(long nr, double t, long x, cplx w) {
    return std::exp(t * w) * ipow(w - 1.0, nr) * ipow(w, -(x + nr) - 1);
}
cplx k1hat_B(long nr, double t, long x, cplx v) {
    return ipow(1.0 + v, x + nr) * (1.0 + 2.0 * v) * std::exp(-t * (v + 1.0)) *
           ipow(v, -nr);
}

Eigen::MatrixXd k1hat_block(long nr1, double t1, const num::SiteWindow& w1, long nr2, double t2,
                            const num::SiteWindow& w2, const K1HatRule& rule, const KernelOptions& o) {
    const int n = int(rule.w.size());
    Eigen::MatrixXcd A(w1.size(), n), B(n, w2.size());
    for (long i = 0; i < w1.size(); ++i)
        for (int a = 0; a < n; ++a) A(i, a) = k1hat_A(nr1, t1, w1.lo + i, rule.w.nodes[a]);
    for (int b = 0; b < n; ++b)
        for (long k = 0; k < w2.size(); ++k) B(b, k) = k1hat_B(nr2, t2, w2.lo + k, rule.v.nodes[b]);
    Eigen::MatrixXcd K = A * rule.C * B;
    const double im = K.size() ? K.imag().cwiseAbs().maxCoeff() : 0.0;
    const double re = K.size() ? K.real().cwiseAbs().maxCoeff() : 0.0;
    if (im > o.imag_tol * std::max(1.0, re)) throw ImaginaryResidue("K1_hat: imaginary part above tolerance");
    return K.real();
}

// M = infinity correction term I3 (see kernel_entry): w on a small circle around 0,
// v on a circle around 0 plus the residue at v = alpha - 1 - w.
Eigen::MatrixXd minf_i3_block(long n1, double t1, const num::SiteWindow& w1, long n2, double t2,
                              const num::SiteWindow& w2, double alpha, const KernelOptions& o) {
    const int n = o.double_nodes;
    double rw, rv;
    bool residue = true;
    if (alpha == 1.0) {
        rw = 0.25;
        rv = 0.5;
        residue = false;
    } else {
        if (alpha == 0.5) throw InvalidArgument("Minf kernel: alpha = 1/2 puts a pole on every w contour");
        rw = 0.4 * std::min({std::abs(alpha - 0.5), alpha, std::abs(alpha - 1.0)});
        // v radius below the distance from 0 to alpha-1-w and w-alpha for all |w| = rw
        rv = 0.5 * std::min({std::abs(alpha - 1.0) - rw, alpha - rw, 1.0});
    }
    const num::ContourRule W = num::circle_rule(0.0, rw, n), V = num::circle_rule(0.0, rv, n);
    Eigen::MatrixXcd A(w1.size(), n), C(n, n), B(n, w2.size()), R(n, w2.size());
    for (long i = 0; i < w1.size(); ++i)
        for (int a = 0; a < n; ++a) A(i, a) = W.weights[a] * k1hat_A(n1, t1, w1.lo + i, W.nodes[a]);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const cplx w = W.nodes[a], v = V.nodes[b];
            C(a, b) = V.weights[b] / ((v + w + 1.0 - alpha) * (w - v - alpha));
        }
    for (int b = 0; b < n; ++b)
        for (long k = 0; k < w2.size(); ++k) B(b, k) = k1hat_B(n2, t2, w2.lo + k, V.nodes[b]);
    Eigen::MatrixXcd K = A * C * B;
    if (residue) {
        for (int a = 0; a < n; ++a) {
            const cplx w = W.nodes[a];
            for (long k = 0; k < w2.size(); ++k)
                R(a, k) = k1hat_B(n2, t2, w2.lo + k, alpha - 1.0 - w) / (2.0 * w + 1.0 - 2.0 * alpha);
        }
        K += A * R;
    }
    const double im = K.size() ? K.imag().cwiseAbs().maxCoeff() : 0.0;
    const double re = K.size() ? K.real().cwiseAbs().maxCoeff() : 0.0;
    if (im > o.imag_tol * std::max(1.0, re)) throw ImaginaryResidue("Minf kernel: imaginary part above tolerance");
    return K.real();
}

// g of the M = 1 rank-one term: contour around {0, alpha - 1}.
double m1_g(long n, double t, long y, double alpha) {
    const long e = y + n - 1;
    if (alpha == 1.0) {
        // single pole at 0 of order n
        const int ord = int(n - 1);
        Series s = Series::power(1.0, 1.0, e, ord) * Series::linear(1.0, 2.0, ord) * Series::exp(-t, -t, ord) *
                   Series::power(1.0, 1.0, -1, ord);
        return s[ord];
    }
    double total = std::exp(e * std::log(alpha) - t * alpha) / std::pow(alpha - 1.0, double(n - 1));
    if (n >= 2) {
        const int ord = int(n - 2);
        Series s = Series::power(1.0, 1.0, e, ord) * Series::linear(1.0, 2.0, ord) * Series::exp(-t, -t, ord) *
                   Series::power(1.0 - alpha, 1.0, -1, ord) * Series::power(alpha, 1.0, -1, ord);
        total += s[ord];
    }
    return total;
}

void check_variant(KernelVariant variant, const SpaceLikeSequence& seq, const SystemSpec& spec) {
    switch (variant) {
        case KernelVariant::general:
            spec.M();
            break;
        case KernelVariant::M1:
            if (spec.M() != 1) throw InvalidArgument("M1 kernel requires M = 1");
            break;
        case KernelVariant::Minf:
            if (!spec.is_infinite()) throw InvalidArgument("Minf kernel requires an M = infinity system");
            break;
        case KernelVariant::shock:
            for (const auto& p : seq.points)
                if (p.n < spec.M()) throw InvalidArgument("shock kernel requires n >= M");
            break;
    }
    for (const auto& p : seq.points)
        if (p.n < 1 || p.t < 0.0) throw InvalidArgument("points need n >= 1 and t >= 0");
}

}  // namespace

double k1_hat(long nr1, double t1, long x1, long nr2, double t2, long x2, const KernelOptions& o) {
    const K1HatRule rule = make_k1hat_rule(o.double_nodes);
    return k1hat_block(nr1, t1, {x1, x1 + 1}, nr2, t2, {x2, x2 + 1}, rule, o)(0, 0);
}

double kernel_entry(KernelVariant variant, const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2,
                    const SystemSpec& spec, const KernelOptions& o) {
    SpaceLikeSequence seq{{p1, p2}, {}};
    check_variant(variant, seq, spec);
    switch (variant) {
        case KernelVariant::general: {
            double s = -phi_full(p1, x1, p2, x2, spec, o);
            for (long k = 1; k <= p2.n; ++k) {
                const double ph = phi_fn(p2.n, k, p2.t, x2, spec);
                if (ph != 0.0) s += psi(p1.n, k, p1.t, x1, spec, o) * ph;
            }
            return s;
        }
        case KernelVariant::M1:
            return -phi_hat(p1, x1, p2, x2, spec) + k1_hat(p1.n - 1, p1.t, x1, p2.n - 1, p2.t, x2, o) +
                   psi(p1.n, 1, p1.t, x1, spec, o) * m1_g(p2.n, p2.t, x2, spec.alpha());
        case KernelVariant::Minf: {
            const K1HatRule rule = make_k1hat_rule(o.double_nodes);
            const num::SiteWindow a{x1, x1 + 1}, b{x2, x2 + 1};
            return -phi_hat(p1, x1, p2, x2, spec) + k1hat_block(p1.n, p1.t, a, p2.n, p2.t, b, rule, o)(0, 0) -
                   minf_i3_block(p1.n, p1.t, a, p2.n, p2.t, b, spec.alpha(), o)(0, 0);
        }
        case KernelVariant::shock: {
            const int M = spec.M();
            double s = -phi_full(p1, x1, p2, x2, spec, o);
            for (long k = M + 1; k <= p2.n; ++k) s += psi(p1.n, k, p1.t, x1, spec, o) * phi_fn(p2.n, k, p2.t, x2, spec);
            // the z = -1 pole enters for p1 preceding p2 and on the diagonal blocks
            const bool prec = precedes(p1, p2) || p1 == p2;
            for (long k = 1; k <= M; ++k) {
                double q = q_fn(p2.n, k, p2.t, x2, PoleChoice::v, spec);
                if (prec) q += q_fn(p2.n, k, p2.t, x2, PoleChoice::minus_one, spec);
                if (q != 0.0) s += psi(p1.n, k, p1.t, x1, spec, o) * q;
            }
            return s;
        }
    }
    return 0.0;
}

num::SiteWindow exact_window(const SpaceLikeSequence& seq, std::size_t k, const SystemSpec& spec) {
    if (seq.thresholds.size() != seq.points.size()) throw InvalidArgument("every point needs a threshold");
    long nmax = 0;
    for (const auto& p : seq.points) nmax = std::max(nmax, p.n);
    const long base = spec.is_infinite() ? 0 : 2L * spec.M();
    const long lo = base - seq.points[k].n - nmax;
    return {lo, std::max(lo, seq.thresholds[k])};
}

num::DiscreteKernelMatrix assemble(KernelVariant variant, const SpaceLikeSequence& seq, const SystemSpec& spec,
                                   const KernelOptions& o) {
    check_variant(variant, seq, spec);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!precedes(seq.points[i], seq.points[i + 1]))
            throw NotSpaceLike("assemble: points must be sorted by sort_space_like");
    const std::size_t m = seq.size();
    num::DiscreteKernelMatrix out;
    std::vector<long> offset(m + 1, 0);
    for (std::size_t k = 0; k < m; ++k) {
        out.windows.push_back(exact_window(seq, k, spec));
        offset[k + 1] = offset[k] + out.windows[k].size();
    }
    const long N = offset[m];
    out.A = Eigen::MatrixXd::Zero(N, N);
    if (N == 0) return out;

    long nmax = 0;
    for (const auto& p : seq.points) nmax = std::max(nmax, p.n);

    if (variant == KernelVariant::general || variant == KernelVariant::shock) {
        const int M = spec.M();
        // Psi rows and Phi (or Q) columns per point
        std::vector<Eigen::MatrixXd> Ps(m), Ph(m), Qv(m), Qm(m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& p = seq.points[i];
            const auto& w = out.windows[i];
            Ps[i].resize(w.size(), nmax);
            Ph[i] = Eigen::MatrixXd::Zero(nmax, w.size());
            for (long x = 0; x < w.size(); ++x)
                for (long k = 1; k <= nmax; ++k) Ps[i](x, k - 1) = psi(p.n, k, p.t, w.lo + x, spec, o);
            for (long x = 0; x < w.size(); ++x)
                for (long k = 1; k <= p.n; ++k) Ph[i](k - 1, x) = phi_fn(p.n, k, p.t, w.lo + x, spec);
            if (variant == KernelVariant::shock) {
                Qv[i] = Eigen::MatrixXd::Zero(nmax, w.size());
                Qm[i] = Eigen::MatrixXd::Zero(nmax, w.size());
                for (long x = 0; x < w.size(); ++x)
                    for (long k = 1; k <= M; ++k) {
                        Qv[i](k - 1, x) = q_fn(p.n, k, p.t, w.lo + x, PoleChoice::v, spec);
                        Qm[i](k - 1, x) = q_fn(p.n, k, p.t, w.lo + x, PoleChoice::minus_one, spec);
                    }
                for (long k = 1; k <= std::min<long>(M, nmax); ++k) Ph[i].row(k - 1).setZero();
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const auto& wi = out.windows[i];
                const auto& wj = out.windows[j];
                if (wi.size() == 0 || wj.size() == 0) continue;
                Eigen::MatrixXd blk = Ps[i] * Ph[j];
                if (variant == KernelVariant::shock) {
                    const long kk = std::min<long>(M, nmax);
                    Eigen::MatrixXd q = Qv[j].topRows(kk);
                    if (i == j || precedes(seq.points[i], seq.points[j])) q += Qm[j].topRows(kk);
                    blk += Ps[i].leftCols(kk) * q;
                }
                if (precedes(seq.points[i], seq.points[j]))
                    for (long a = 0; a < wi.size(); ++a)
                        for (long b = 0; b < wj.size(); ++b)
                            blk(a, b) -= phi_full(seq.points[i], wi.lo + a, seq.points[j], wj.lo + b, spec, o);
                out.A.block(offset[i], offset[j], wi.size(), wj.size()) = blk;
            }
    } else {
        const K1HatRule rule = make_k1hat_rule(o.double_nodes);
        const long shift = variant == KernelVariant::M1 ? 1 : 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const auto& pi = seq.points[i];
                const auto& pj = seq.points[j];
                const auto& wi = out.windows[i];
                const auto& wj = out.windows[j];
                if (wi.size() == 0 || wj.size() == 0) continue;
                Eigen::MatrixXd blk = k1hat_block(pi.n - shift, pi.t, wi, pj.n - shift, pj.t, wj, rule, o);
                if (variant == KernelVariant::M1) {
                    for (long a = 0; a < wi.size(); ++a) {
                        const double f = psi(pi.n, 1, pi.t, wi.lo + a, spec, o);
                        if (f == 0.0) continue;
                        for (long b = 0; b < wj.size(); ++b)
                            blk(a, b) += f * m1_g(pj.n, pj.t, wj.lo + b, spec.alpha());
                    }
                } else {
                    blk -= minf_i3_block(pi.n, pi.t, wi, pj.n, pj.t, wj, spec.alpha(), o);
                }
                if (precedes(pi, pj))
                    for (long a = 0; a < wi.size(); ++a)
                        for (long b = 0; b < wj.size(); ++b) blk(a, b) -= phi_hat(pi, wi.lo + a, pj, wj.lo + b, spec);
                out.A.block(offset[i], offset[j], wi.size(), wj.size()) = blk;
            }
    }
    if (o.balance) out.conjugation = num::balance_in_place(out.A);
    return out;
}

double joint_probability(KernelVariant variant, const SpaceLikeSequence& seq, const SystemSpec& spec,
                         const KernelOptions& o) {
    return num::fredholm_det_discrete(assemble(variant, seq, spec, o)).value;
}

Eigen::MatrixXd orthogonality_matrix(long n, double t, const SystemSpec& spec, const KernelOptions& o) {
    const int M = spec.M();
    // Psi vanishes below 2M - 2n; Phi decays like t^x / x! above.
    const long lo = 2L * M - 2 * n;
    long hi = lo + 40;
    while (std::exp(hi * std::log(std::max(t, 1e-300) * 4.0) - std::lgamma(hi + 1.0)) > 1e-18) hi += 10;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (long x = lo; x < hi + 2 * n; ++x) {
        Eigen::VectorXd ph(n), ps(n);
        for (long j = 1; j <= n; ++j) {
            ph[j - 1] = phi_fn(n, j, t, x, spec);
            ps[j - 1] = psi(n, j, t, x, spec, o);
        }
        G += ph * ps.transpose();
    }
    return G;
}

QRelationResiduals q_relations(const SpaceTimePoint& p1, const SpaceTimePoint& p2, long j, long x2_lo, long x2_hi,
                               const SystemSpec& spec, const KernelOptions& o) {
    const int M = spec.M();
    if (p1.n < M || p2.n < M) throw InvalidArgument("q_relations: requires n >= M");
    if (j < 1 || j > M) throw InvalidArgument("q_relations: requires 1 <= j <= M");
    // Q_{-1}(x) lives on x < M - n1 and behaves like (t / alpha)^P / P! with P = M - n1 - x.
    // Terms with k > n1 (and phi across different n) keep only the residue at
    // w = 0: with the rate poles included the sums over x diverge.
    const double growth = 4.0 * std::max(p1.t, 1e-3) / std::min(1.0, spec.alpha());
    std::vector<std::pair<long, double>> q;
    for (long x = M - p1.n - 1;; --x) {
        const double v = q_fn(p1.n, j, p1.t, x, PoleChoice::minus_one, spec);
        q.emplace_back(x, v);
        const long P = M - p1.n - x;
        if (P > 8 && std::exp(P * std::log(growth) - std::lgamma(P + 1.0)) < 1e-20) break;
        if (P > 400) throw num::NumericalError("q_relations: Q_{-1} tail did not decay");
    }
    // <Q_{-1}, Psi_{n1-k}> for k = 1..n2
    Eigen::VectorXd ip = Eigen::VectorXd::Zero(p2.n);
    for (long k = 1; k <= p2.n; ++k)
        for (const auto& [x, v] : q)
            if (v != 0.0)
                ip[k - 1] += v * (k <= p1.n ? psi(p1.n, k, p1.t, x, spec, o)
                                            : zero_residue(p1.t, x + p1.n + k - 2L * M, p1.n, k, spec));
    QRelationResiduals r;
    r.qphi_checked = precedes(p1, p2);
    for (long x2 = x2_lo; x2 < x2_hi; ++x2) {
        double k1 = 0.0, k2 = 0.0;
        for (long k = 1; k <= p2.n; ++k) {
            const double ph = phi_fn(p2.n, k, p2.t, x2, spec);
            (k <= M ? k2 : k1) += ip[k - 1] * ph;
        }
        r.qk1 = std::max(r.qk1, std::abs(k1 - q_fn(p2.n, j, p2.t, x2, PoleChoice::zero, spec)));
        r.qk2 = std::max(r.qk2, std::abs(k2));
        if (r.qphi_checked) {
            double s = 0.0;
            for (const auto& [x, v] : q)
                if (v != 0.0)
                    s += v * (p1.n == p2.n ? phi_full(p1, x, p2, x2, spec, o)
                                           : zero_residue(p1.t - p2.t, x + p1.n - x2 - p2.n, p1.n, p2.n, spec));
            r.qphi = std::max(r.qphi, std::abs(s - q_fn(p2.n, j, p2.t, x2, PoleChoice::minus_one, spec)));
        }
    }
    return r;
}

void dump_csv(const num::DiscreteKernelMatrix& m, std::ostream& os) {
    os << "row,col,point_i,x_i,point_j,x_j,value\n";
    std::vector<std::pair<long, long>> idx;
    for (std::size_t k = 0; k < m.windows.size(); ++k)
        for (long x = m.windows[k].lo; x < m.windows[k].hi; ++x) idx.emplace_back(long(k), x);
    os.precision(17);
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
            os << r << ',' << c << ',' << idx[r].first << ',' << idx[r].second << ',' << idx[c].first << ','
               << idx[c].second << ',' << m.A(long(r), long(c)) << '\n';
}

}  // namespace tasep::fk
