#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

#include "tasep/core.hpp"
#include "tasep/numerics.hpp"

namespace tasep::fk {

// general: the sum over orthogonal functions, valid for all n >= 1.
// M1:      single slow particle, written as -phi_hat + K1_hat + rank one.
// Minf:    M = infinity, labels n counted from the last slow particle.
// shock:   modified kernel with the z = -1 pole, requires n >= M.
enum class KernelVariant { general, M1, Minf, shock };

enum class PoleChoice { zero, minus_one, v };

KernelVariant parse_variant(const std::string& s);
std::string to_string(KernelVariant v);

struct KernelOptions {
    num::CircleOptions circle{};  // adaptive circle quadrature for Psi and phi
    int double_nodes = 128;       // per-circle nodes of the double contour integrals
    bool balance = true;          // Osborne balancing before the determinant
    double imag_tol = 1e-8;       // allowed relative imaginary residue of real quantities
};

struct ImaginaryResidue : Error {
    using Error::Error;
};

// Psi^{n,t}_{n-j}(x). Any j >= 1 is accepted; j > n is the extension used in the
// kernel sum.
double psi(long n, long j, double t, long x, const SystemSpec& spec, const KernelOptions& = {});

// Phi^{n,t}_{n-j}(x), zero for j > n.
double phi_fn(long n, long j, double t, long x, const SystemSpec& spec);

// Q^{n,t}_{n-j,w}(x) for 1 <= j <= M, with w one of 0, -1, v.
double q_fn(long n, long j, double t, long x, PoleChoice pole, const SystemSpec& spec);

// Transition term phi between (n1,t1) and (n2,t2) with all poles 0 and v_i;
// zero unless p1 precedes p2.
double phi_full(const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2, const SystemSpec& spec,
                const KernelOptions& = {});

// The same term with only the pole at 0 (labels taken relative to M).
double phi_hat(const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2, const SystemSpec& spec);

// K1_hat: double contour part with v around 0 and w around {0, -v}. Labels are
// counted relative to M (nr = n - M).
double k1_hat(long nr1, double t1, long x1, long nr2, double t2, long x2, const KernelOptions& = {});

double kernel_entry(KernelVariant variant, const SpaceTimePoint& p1, long x1, const SpaceTimePoint& p2, long x2,
                    const SystemSpec& spec, const KernelOptions& = {});

// Site window [lower, a) that carries the full support of the kernel block for
// point k of the sequence.
num::SiteWindow exact_window(const SpaceLikeSequence& seq, std::size_t k, const SystemSpec& spec);

// chi_a K chi_a on the exact windows; points must be sorted and thresholds set.
num::DiscreteKernelMatrix assemble(KernelVariant variant, const SpaceLikeSequence& seq, const SystemSpec& spec,
                                   const KernelOptions& = {});

// P(x_{n_k}(t_k) >= a_k for all k).
double joint_probability(KernelVariant variant, const SpaceLikeSequence& seq, const SystemSpec& spec,
                         const KernelOptions& = {});

// Gram matrix G_{jk} = sum_x Phi^{n,t}_{n-j}(x) Psi^{n,t}_{n-k}(x), j, k = 1..n.
Eigen::MatrixXd orthogonality_matrix(long n, double t, const SystemSpec& spec, const KernelOptions& = {});

// Residuals of the three Q identities at (p1, p2) for index j <= M, maximised over
// x2 in [x2_lo, x2_hi). The phi identity is only checked when p1 precedes p2.
struct QRelationResiduals {
    double qk1 = 0.0;   // sum_x Q_{-1}(x) K1(x, x2) - Q_0(x2)
    double qk2 = 0.0;   // sum_x Q_{-1}(x) K2(x, x2)
    double qphi = 0.0;  // sum_x Q_{-1}(x) phi(x, x2) - Q_{-1}(x2)
    bool qphi_checked = false;
};

QRelationResiduals q_relations(const SpaceTimePoint& p1, const SpaceTimePoint& p2, long j, long x2_lo, long x2_hi,
                               const SystemSpec& spec, const KernelOptions& = {});

// One row per matrix entry: row, col, point_i, x_i, point_j, x_j, value.
void dump_csv(const num::DiscreteKernelMatrix& m, std::ostream& os);

}  // namespace tasep::fk
