#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tasep/core.hpp"
#include "tasep/fkernel.hpp"
#include "tasep/sim.hpp"

using namespace tasep;
using namespace tasep::fk;
using doctest::Approx;

namespace {

double poisson_tail(double lam, long a) {
    if (a <= 0) return 1.0;
    double p = std::exp(-lam), cdf = 0.0;
    for (long k = 0; k < a; ++k) {
        cdf += p;
        p *= lam / double(k + 1);
    }
    return 1.0 - cdf;
}

double one_point(KernelVariant v, const SystemSpec& s, long n, double t, long a, const KernelOptions& o = {}) {
    return joint_probability(v, sort_space_like({{n, t}}, {a}), s, o);
}

}  // namespace

TEST_SUITE("fkernel") {

TEST_CASE("psi examples") {
    const auto s1 = SystemSpec::finite(1, 0.5);
    for (long x = -3; x <= 6; ++x) {
        CHECK(psi(1, 1, 0.0, x, s1) == Approx(x == 0 ? 1.0 : 0.0));
        const double expect = x < 0 ? 0.0 : std::pow(2.0, double(x)) / std::tgamma(double(x) + 1.0);
        CHECK(psi(1, 1, 2.0, x, s1) == Approx(expect).epsilon(1e-10));
    }
    const auto s2 = SystemSpec::finite(2, 0.6);
    for (long n = 1; n <= 4; ++n)
        for (long j = 1; j <= n; ++j)
            for (long x = 2 * 2 - 2 * n - 4; x < 2 * 2 - 2 * n; ++x) CHECK(psi(n, j, 1.3, x, s2) == 0.0);
}

TEST_CASE("orthogonality examples") {
    struct Case {
        long n;
        int M;
        double alpha, t;
    };
    for (const Case& c : {Case{3, 2, 0.6, 1.5}, Case{2, 1, 0.5, 1.0}, Case{4, 2, 0.8, 0.5}, Case{2, 3, 0.4, 1.0}}) {
        const Eigen::MatrixXd G = orthogonality_matrix(c.n, c.t, SystemSpec::finite(c.M, c.alpha));
        CHECK((G - Eigen::MatrixXd::Identity(c.n, c.n)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("phi vanishes beyond the last index") {
    const auto s = SystemSpec::finite(2, 0.6);
    for (long x = -8; x <= 4; ++x) CHECK(phi_fn(3, 4, 1.5, x, s) == 0.0);
}

TEST_CASE("Q functions") {
    const auto s = SystemSpec::finite(1, 0.3);
    for (long x = -10; x <= 3; ++x) {
        const double q0 = q_fn(3, 1, 1.0, x, PoleChoice::zero, s);
        const double qv = q_fn(3, 1, 1.0, x, PoleChoice::v, s);
        CHECK(std::abs(q0 + qv - phi_fn(3, 1, 1.0, x, s)) < 1e-9 * std::max(1.0, std::abs(q0) + std::abs(qv)));
    }
    for (long n = 1; n <= 4; ++n)
        for (long y = 1 - n; y <= 6; ++y) CHECK(q_fn(n, 1, 2.0, y, PoleChoice::minus_one, s) == 0.0);
    CHECK_THROWS_AS(q_fn(3, 2, 1.0, 0, PoleChoice::zero, s), InvalidArgument);
}

TEST_CASE("Q relations on a small grid") {
    const auto s = SystemSpec::finite(1, 0.45);
    const auto r = q_relations({2, 1.2}, {3, 0.8}, 1, -12, 4, s);
    CHECK(r.qk1 < 1e-8);
    CHECK(r.qk2 < 1e-8);
    CHECK(r.qphi_checked);
    CHECK(r.qphi < 1e-8);
}

TEST_CASE("phi_hat") {
    const auto s = SystemSpec::finite(1, 0.5);
    CHECK(phi_hat({2, 1.0}, 0, {1, 3.0}, 0, s) == 0.0);
    CHECK(phi_hat({2, 2.0}, 1, {2, 2.0}, 1, s) == 0.0);
    for (long d = -2; d <= 6; ++d) {
        const double expect = d < 0 ? 0.0 : std::pow(1.5, double(d)) / std::tgamma(double(d) + 1.0);
        CHECK(phi_hat({3, 2.5}, d, {3, 1.0}, 0, s) == Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("joint probability: deterministic start and empty constraint") {
    for (int M : {1, 2}) {
        const auto s = SystemSpec::finite(M, 0.5);
        for (long n = 1; n <= 3; ++n)
            for (long a = 2 * (M - n) - 3; a <= 2 * (M - n) + 2; ++a)
                CHECK(one_point(KernelVariant::general, s, n, 0.0, a) ==
                      Approx(a <= 2 * (M - n) ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(one_point(KernelVariant::general, s, 3, 2.0, -40) == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("free slow particle matches the Poisson tail") {
    const auto s = SystemSpec::finite(1, 0.7);
    for (long a = 0; a <= 8; ++a) CHECK(std::abs(one_point(KernelVariant::general, s, 1, 3.0, a) - poisson_tail(2.1, a)) < 1e-8);
}

TEST_CASE("joint probability lies in [0,1] and is nonincreasing in each threshold") {
    const auto s = SystemSpec::finite(1, 0.4);
    const std::vector<SpaceTimePoint> pts{{1, 3.0}, {3, 2.0}};
    for (long a1 = -1; a1 <= 4; ++a1)
        for (long a2 = -6; a2 <= 0; ++a2) {
            const double p = joint_probability(KernelVariant::general, sort_space_like(pts, {a1, a2}), s);
            const double p1 = joint_probability(KernelVariant::general, sort_space_like(pts, {a1 + 1, a2}), s);
            const double p2 = joint_probability(KernelVariant::general, sort_space_like(pts, {a1, a2 + 1}), s);
            CHECK(p >= -1e-10);
            CHECK(p <= 1.0 + 1e-10);
            CHECK(p1 <= p + 1e-10);
            CHECK(p2 <= p + 1e-10);
        }
}

TEST_CASE("shock kernel and general kernel give the same determinants") {
    const auto s = SystemSpec::finite(1, 0.3);
    for (long a = -8; a <= 2; ++a)
        CHECK(std::abs(one_point(KernelVariant::shock, s, 4, 6.0, a) - one_point(KernelVariant::general, s, 4, 6.0, a)) < 1e-6);
    const std::vector<SpaceTimePoint> pts{{2, 5.0}, {4, 3.0}};
    for (long a1 : {-2, 0, 2})
        for (long a2 : {-6, -4, -2}) {
            const auto seq = sort_space_like(pts, {a1, a2});
            CHECK(std::abs(joint_probability(KernelVariant::shock, seq, s) - joint_probability(KernelVariant::general, seq, s)) < 1e-6);
        }
}

TEST_CASE("M = 1 variant agrees with the general kernel") {
    const auto s = SystemSpec::finite(1, 0.6);
    for (long a = -5; a <= 2; ++a)
        CHECK(std::abs(one_point(KernelVariant::M1, s, 3, 2.5, a) - one_point(KernelVariant::general, s, 3, 2.5, a)) < 1e-8);
}

TEST_CASE("determinants do not depend on the balancing conjugation") {
    const auto s = SystemSpec::finite(2, 0.5);
    KernelOptions off;
    off.balance = false;
    for (long a = -6; a <= 1; ++a)
        CHECK(std::abs(one_point(KernelVariant::general, s, 4, 3.0, a) - one_point(KernelVariant::general, s, 4, 3.0, a, off)) < 1e-9);
}

TEST_CASE("M = infinity kernel against Monte Carlo") {
    const auto s = SystemSpec::infinite(1.0);
    const long R = 40000;
    const auto e = sim::sample_positions(s, {{2, 2.0}}, R, 21);
    for (long a = -5; a <= 0; ++a) {
        const double p = one_point(KernelVariant::Minf, s, 2, 2.0, a);
        const double se = std::sqrt(std::max(p * (1.0 - p), 1e-4) / double(R));
        CHECK(std::abs(e.tail(0, a) - p) <= 4.0 * se);
    }
}

TEST_CASE("kernel matrices export as CSV") {
    const auto s = SystemSpec::finite(1, 0.5);
    const auto m = assemble(KernelVariant::general, sort_space_like({{2, 1.0}}, {0}), s);
    std::ostringstream os;
    dump_csv(m, os);
    long lines = 0;
    for (char ch : os.str()) lines += ch == '\n';
    CHECK(lines == 1 + m.A.rows() * m.A.cols());
}

TEST_CASE("variant names round trip") {
    for (auto v : {KernelVariant::general, KernelVariant::M1, KernelVariant::Minf, KernelVariant::shock})
        CHECK(parse_variant(to_string(v)) == v);
    CHECK_THROWS(parse_variant("bogus"));
}

}
