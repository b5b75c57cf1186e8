#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tasep/numerics.hpp"

using namespace tasep;
using namespace tasep::num;
using doctest::Approx;

TEST_SUITE("numerics") {

TEST_CASE("circle integral residues") {
    CHECK(std::abs(circle_integral([](cplx w) { return 1.0 / w; }, 0.0, 1.0).value - 1.0) < 1e-14);
    for (int k = 0; k < 6; ++k)
        CHECK(std::abs(circle_integral([k](cplx w) { return std::pow(w, k); }, 0.0, 1.0).value) < 1e-14);
    CHECK(std::abs(circle_integral([](cplx w) { return std::exp(w) / (w * w); }, 0.0, 1.0).value - 1.0) < 1e-13);
}

TEST_CASE("circle integral of a Laurent polynomial returns its residue coefficient") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> c(11);
        for (auto& x : c) x = u(rng);
        auto f = [&](cplx w) {
            cplx s = 0.0;
            for (int k = -5; k <= 5; ++k) s += c[std::size_t(k + 5)] * std::pow(w, k);
            return s;
        };
        const cplx v = circle_integral(f, 0.0, 0.9).value;
        CHECK(std::abs(v - c[4]) < 1e-13);
    }
}

TEST_CASE("circle integral rejects a pole on the contour") {
    CHECK_THROWS_AS(circle_integral([](cplx w) { return 1.0 / (w - 1.0); }, 0.0, 1.0), PoleOnContour);
    CHECK_THROWS_AS(circle_integral([](cplx w) { return w; }, 0.0, 0.0), PoleOnContour);
}

TEST_CASE("ray integral gives Ai(0) and is real") {
    const double ai0 = 0.355028053887817239;
    auto f = [](double s) { return [s](cplx w) { return std::exp(w * w * w / 3.0 - s * w); }; };
    const QuadResult r = ray_integral(f(0.0), RayPair{});
    CHECK(std::abs(r.value.real() - ai0) < 1e-12);
    CHECK(std::abs(r.value.imag()) < 1e-12);
    RayPair wide;
    wide.R = 16.0;
    wide.order = 160;
    CHECK(std::abs(ray_integral(f(0.0), wide).value - r.value) < 1e-10);
    for (double s : {-3.0, -1.0, 0.5, 2.0})
        CHECK(ray_integral(f(s), RayPair{}).value.real() == Approx(airy_ai(s)).epsilon(1e-10));
}

TEST_CASE("ray integral detects missing decay") {
    RayPair short_rays;
    short_rays.R = 1.0;
    CHECK_THROWS_AS(ray_integral([](cplx w) { return std::exp(w * w * w / 3.0); }, short_rays), ContourDecayError);
}

TEST_CASE("Hermite polynomials") {
    CHECK(hermite(0, 3.7) == 1.0);
    CHECK(hermite(1, 2.0) == 4.0);
    CHECK(hermite(2, 1.5) == Approx(4.0 * 2.25 - 2.0));
    CHECK(hermite(3, -0.5) == Approx(8.0 * -0.125 - 12.0 * -0.5));
    CHECK_THROWS_AS(hermite(-1, 0.0), InvalidArgument);
    // int H_2^2 e^{-x^2} = 2! 2^2 sqrt(pi)
    const int m = 4000;
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
        const double x = -12.0 + 24.0 * (k + 0.5) / m;
        s += hermite(2, x) * hermite(2, x) * std::exp(-x * x);
    }
    s *= 24.0 / m;
    CHECK(std::abs(s - 8.0 * std::sqrt(std::numbers::pi)) < 1e-8);
}

TEST_CASE("Hermite overflow goes through the scaled representation") {
    CHECK_THROWS_AS(hermite(400, 30.0), NumericalError);
    const ScaledValue v = hermite_scaled(400, 30.0);
    CHECK(std::isfinite(v.log_abs()));
    const ScaledValue w = hermite_scaled(10, 1.3);
    CHECK(std::ldexp(w.mantissa, int(w.exponent)) == Approx(hermite(10, 1.3)));
}

TEST_CASE("Hermite functions are orthonormal") {
    const int kmax = 8, m = 6000;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(kmax + 1, kmax + 1);
    for (int q = 0; q < m; ++q) {
        const double x = -15.0 + 30.0 * (q + 0.5) / m;
        const auto h = hermite_functions(kmax, x);
        for (int i = 0; i <= kmax; ++i)
            for (int j = 0; j <= kmax; ++j) G(i, j) += h[std::size_t(i)] * h[std::size_t(j)] * 30.0 / m;
    }
    CHECK((G - Eigen::MatrixXd::Identity(kmax + 1, kmax + 1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Airy function: series and asymptotic branches agree") {
    CHECK(airy_ai(0.0) == Approx(0.355028053887817239));
    CHECK(airy_ai_prime(0.0) == Approx(-0.258819403792806798));
    CHECK(airy_ai(2.0) == Approx(0.0349241304232743791));
    CHECK(airy_ai(-2.0) == Approx(0.227407428201685575));
    for (double x : {-5.99, -6.01, 5.99, 6.01})
        CHECK(airy_ai(x) == Approx(ray_integral([x](cplx w) { return std::exp(w * w * w / 3.0 - x * w); },
                                                RayPair{}).value.real()).epsilon(1e-9));
}

TEST_CASE("discrete Fredholm determinant") {
    DiscreteKernelMatrix z;
    z.A = Eigen::MatrixXd::Zero(5, 5);
    CHECK(fredholm_det_discrete(z).value == 1.0);
    Eigen::VectorXd f(6), g(6);
    f << 0.1, -0.3, 0.2, 0.05, 0.4, -0.1;
    g << 0.7, 0.2, -0.5, 0.3, 0.1, 0.9;
    DiscreteKernelMatrix r1;
    r1.A = f * g.transpose();
    CHECK(fredholm_det_discrete(r1).value == Approx(1.0 - f.dot(g)).epsilon(1e-13));
}

TEST_CASE("window enlargement does not change a decaying discrete determinant") {
    auto K = [](long x, long y) { return 0.3 * std::exp(-0.8 * double(x + y)) * (x == y ? 1.5 : 1.0); };
    auto det = [&](long W) {
        DiscreteKernelMatrix m;
        m.A.resize(W, W);
        for (long i = 0; i < W; ++i)
            for (long j = 0; j < W; ++j) m.A(i, j) = K(i, j);
        return fredholm_det_discrete(m).value;
    };
    CHECK(std::abs(det(30) - det(45)) < 1e-8);
}

TEST_CASE("determinants are invariant under kernel conjugation") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.3, 0.3), c(0.1, 10.0);
    for (int rep = 0; rep < 10; ++rep) {
        DiscreteKernelMatrix a, b;
        a.A.resize(7, 7);
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) a.A(i, j) = u(rng);
        Eigen::VectorXd cv(7);
        for (int i = 0; i < 7; ++i) cv[i] = c(rng);
        b.A = cv.asDiagonal() * a.A * cv.cwiseInverse().asDiagonal();
        CHECK(fredholm_det_discrete(a).value == Approx(fredholm_det_discrete(b).value).epsilon(1e-12));
        Eigen::MatrixXd B = a.A;
        const ConjugationRecord rec = balance_in_place(B);
        DiscreteKernelMatrix bal;
        bal.A = B;
        CHECK(fredholm_det_discrete(bal).value == Approx(fredholm_det_discrete(a).value).epsilon(1e-12));
        (void)rec;
    }
}

TEST_CASE("continuum Fredholm determinant of a rank-one kernel") {
    const auto K = [](int, double x, int, double y) { return std::exp(-x - y); };
    CHECK(fredholm_det_continuum(std::function<double(int, double, int, double)>([](int, double, int, double) {
              return 0.0;
          }),
                                 {{0.0, 10.0}}) == 1.0);
    for (double s : {-1.0, 0.0, 0.7}) {
        const double exact = 1.0 - 0.5 * (std::exp(-2.0 * s) - std::exp(-2.0 * (s + 40.0)));
        CHECK(fredholm_det_continuum(std::function<double(int, double, int, double)>(K), {{s, s + 40.0}}) ==
              Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("continuum determinant rejects a kernel that has not decayed") {
    const std::function<double(int, double, int, double)> K = [](int, double, int, double) { return 0.5; };
    CHECK_THROWS_AS(fredholm_det_continuum(K, {{0.0, 1.0}}), NumericalError);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(10, x, w);
    for (int k = 0; k <= 19; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
        CHECK(s == Approx(k % 2 ? 0.0 : 2.0 / (k + 1)).epsilon(1e-13));
    }
}

}
