#pragma once

#include <string>
#include <vector>

#include "tasep/core.hpp"
#include "tasep/numerics.hpp"

// Limit kernels and their Fredholm distributions.
//
// Conventions shared by the Airy-type kernels (tau_i ordered increasingly):
//   f(w; tau, s) = w^3/3 + tau w^2 - s w,  s~ = s - tau^2 where a kernel asks for it,
//   right contour: e^{i pi/3} inf -> e^{-i pi/3} inf, left contour: e^{-2i pi/3} inf -> e^{2i pi/3} inf.
//
// Airy kernels used (the literature forms, restated here):
//   A2:  K = int_0^inf e^{-l (tau1 - tau2)} Ai(s1 + l) Ai(s2 + l) dl               (tau1 >= tau2)
//        K = -int_{-inf}^0 e^{-l (tau1 - tau2)} Ai(s1 + l) Ai(s2 + l) dl           (tau1 <  tau2)
//   A1:  K = -(4 pi d)^{-1/2} exp(-(s2 - s1)^2 / (4 d)) 1[d > 0]
//            + Ai(s1 + s2 + d^2) exp(d (s1 + s2) + 2 d^3 / 3),       d = tau2 - tau1
//   A21: the transition kernel with M = 0 (its rank-M part vanishes).
namespace tasep::ak {

struct LimitOptions {
    int nodes = 60;          // Gauss-Legendre nodes per slice in the Nystrom method
    int ray_order = 160;     // Gauss-Legendre nodes per ray leg
    double ray_radius = 10;  // truncation of each ray leg
    int lambda_nodes = 240;  // quadrature of the A2 lambda integral
};

// Extended Hermite kernel of the stationary M x M Dyson Brownian motion.
double dbm_kernel(int M, double tau1, double x1, double tau2, double x2);

// Normalised Hermite function p_k(x) with int p_j p_k e^{-x^2/2} dx = delta_jk.
double dbm_pk(int k, double x);

// Transition kernel K_trans(1) + K_trans(2)_{M, kappa}.
double trans_kernel(int M, double kappa, double tau1, double s1, double tau2, double s2, const LimitOptions& = {});

// DBM -> Airy2 transition kernel.
double dbm2_kernel(int M, double tau1, double s1, double tau2, double s2, const LimitOptions& = {});

// Antisymmetric GUE minor kernel, Hermite sum form. Throws InvalidArgument when the
// sum is infinite and theta1 == theta2 (no decay).
double ague_kernel_sum(long n1, double theta1, double xi1, long n2, double theta2, double xi2);

// Integral representation; returns K * B2 / B1 with B_i = 2^{n_i} e^{theta_i (n_i + 1) / 2}.
double ague_kernel_integral(long n1, double theta1, double xi1, long n2, double theta2, double xi2);

// B2 / B1 of the integral representation.
double ague_conjugation(long n1, double theta1, long n2, double theta2);

// (n1, theta1) precedes (n2, theta2): n1 <= n2, theta1 >= theta2, not identical.
bool ague_precedes(long n1, double theta1, long n2, double theta2);

enum class AiryKind { A1, A2, A21 };
AiryKind parse_airy_kind(const std::string&);

double airy_family(AiryKind kind, double tau1, double s1, double tau2, double s2, const LimitOptions& = {});

enum class LawKind { DBM, A1, A2, A21, Trans, DBM2, aGUE };
LawKind parse_law_kind(const std::string&);
std::string to_string(LawKind);

// A limit process evaluated at the times `tau` (aGUE: at the pairs (n[i], tau[i])
// with tau read as theta = ln tau_i of the wall scaling).
struct LimitLaw {
    LawKind kind = LawKind::A2;
    int M = 0;             // DBM, Trans, DBM2
    double kappa = 0.0;    // Trans
    std::vector<double> tau;
    std::vector<long> n;   // aGUE only
    LimitOptions options{};

    static LimitLaw one_point(LawKind kind, int M = 0, double kappa = 0.0, double tau = 0.0);
    std::string describe() const;
};

// Kernel value K(i, x; j, y) between the i-th and j-th time of the law.
double law_kernel(const LimitLaw& law, int i, double x, int j, double y);

// P(X(tau_k) <= s_k for all k).
double limit_cdf(const LimitLaw& law, const std::vector<double>& s);

// One-point CDF sweep; returns values in the order of `s`.
std::vector<double> cdf_table(const LimitLaw& law, const std::vector<double>& s);

}  // namespace tasep::ak
