#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "tasep/core.hpp"
#include "tasep/hydro.hpp"
#include "tasep/sim.hpp"

using namespace tasep;
using doctest::Approx;

TEST_SUITE("sim") {

TEST_CASE("free slow particle is a Poisson process") {
    const auto spec = SystemSpec::finite(1, 0.7);
    const long R = 20000;
    const auto e = sim::sample_positions(spec, {{1, 10.0}}, R, 5);
    double m = 0.0, v = 0.0;
    for (long x : e.column(0)) m += double(x);
    m /= R;
    for (long x : e.column(0)) v += (double(x) - m) * (double(x) - m);
    v /= R - 1;
    CHECK(std::abs(m - 7.0) <= 3.0 * std::sqrt(7.0 / R));
    CHECK(v == Approx(7.0).epsilon(0.05));
    CHECK(e.tail(0, 0) == 1.0);
}

TEST_CASE("jump count of the leading particle passes a chi-square test") {
    const double lam = 3.0;
    const long R = 20000;
    const auto e = sim::sample_positions(SystemSpec::finite(2, 0.6), {{1, 5.0}}, R, 17);
    std::vector<double> obs(9, 0.0);  // 0..7 and >= 8
    for (long x : e.column(0)) obs[std::size_t(std::min<long>(x - 2, 8))] += 1.0;  // starts at 2
    double chi2 = 0.0, cum = 0.0, p = std::exp(-lam);
    for (int k = 0; k < 9; ++k) {
        const double pk = k < 8 ? p : 1.0 - cum;
        cum += pk;
        p *= lam / (k + 1);
        chi2 += (obs[std::size_t(k)] - R * pk) * (obs[std::size_t(k)] - R * pk) / (R * pk);
    }
    CHECK(chi2 < 20.09);  // 99% quantile, 8 degrees of freedom
}

TEST_CASE("exclusion and unit jumps along whole trajectories") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto tr = sim::simulate(SystemSpec::finite(2, 0.4), 8, 20.0, seed);
        std::vector<long> pos(tr.init.y.begin(), tr.init.y.end());
        for (const auto& [time, label] : tr.events()) {
            const std::size_t i = tr.init.index_of(label);
            pos[i] += 1;
            CHECK(pos[i] == tr.position_by_index(i, time));
            for (std::size_t k = 0; k + 1 < pos.size(); ++k) REQUIRE(pos[k] > pos[k + 1]);
        }
    }
}

TEST_CASE("two particles: the follower never reaches the leader") {
    sim::Initial init{{0, -2}, {1.0, 1.0}, 1};
    sim::Stream rng(9, 0);
    const auto tr = sim::simulate(init, 50.0, rng);
    for (double t = 0.0; t <= 50.0; t += 0.25) CHECK(tr.position(1, t) > tr.position(2, t));
}

TEST_CASE("same seed gives identical event logs") {
    const auto a = sim::simulate(SystemSpec::finite(1, 0.5), 6, 10.0, 42, 3);
    const auto b = sim::simulate(SystemSpec::finite(1, 0.5), 6, 10.0, 42, 3);
    CHECK(a.events() == b.events());
    const auto c = sim::simulate(SystemSpec::finite(1, 0.5), 6, 10.0, 43, 3);
    CHECK(a.events() != c.events());
}

TEST_CASE("ensembles do not depend on the worker count") {
    const auto spec = SystemSpec::finite(1, 0.4);
    const std::vector<SpaceTimePoint> q{{1, 6.0}, {3, 4.0}};
    const auto a = sim::sample_positions(spec, q, 500, 8, 1);
    const auto b = sim::sample_positions(spec, q, 500, 8, 3);
    CHECK(a.x == b.x);
    std::ostringstream sa, sb;
    sim::write_csv(a, sa);
    sim::write_csv(b, sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("one replica reproduces simulate on the derived seed") {
    const auto spec = SystemSpec::finite(1, 0.4);
    const auto e = sim::sample_positions(spec, {{3, 4.0}}, 1, 77);
    const auto tr = sim::simulate(spec, 3, 4.0, 77, 0);
    CHECK(e.at(0, 0) == tr.position(3, 4.0));
}

TEST_CASE("empirical tail is nonincreasing in the threshold") {
    const auto e = sim::sample_positions(SystemSpec::finite(1, 0.5), {{3, 5.0}}, 2000, 4);
    for (long a = -10; a < 10; ++a) CHECK(e.tail(0, a + 1) <= e.tail(0, a));
}

TEST_CASE("replicas must be positive") {
    CHECK_THROWS_AS(sim::sample_positions(SystemSpec::finite(1, 0.5), {{1, 1.0}}, 0, 1), InvalidArgument);
}

TEST_CASE("density at t = 0 is the deterministic start") {
    const auto d = sim::density_profile(SystemSpec::finite(1, 0.5), 0.0, -10, 4, 3, 1);
    for (long x = -10; x <= 4; ++x) CHECK(d[std::size_t(x + 10)] == ((x <= 0 && x % 2 == 0) ? 1.0 : 0.0));
}

TEST_CASE("Bernoulli start has density 1 - alpha on the positive axis") {
    for (double a : {0.5, 0.999999}) {
        double occ = 0.0;
        const long L = 2000, R = 20;
        for (long r = 0; r < R; ++r) {
            sim::Stream rng(3, std::uint64_t(r));
            const auto init = sim::bernoulli_equivalent_init(a, 4, L, rng);
            for (long y : init.y) occ += y > 0 ? 1.0 : 0.0;
            CHECK(init.y.back() == -6);
            for (double rate : init.rate) CHECK(rate == 1.0);
        }
        occ /= double(L * R);
        CHECK(std::abs(occ - (1.0 - a)) <= 4.0 * std::sqrt(a * (1.0 - a) / double(L * R)) + 1e-12);
    }
    sim::Stream rng(1, 0);
    CHECK_THROWS_AS(sim::bernoulli_equivalent_init(1.0, 2, 10, rng), InvalidArgument);
}

TEST_CASE("macroscopic position of a rarefaction particle, with its Tracy-Widom shift") {
    // x_n(t) = t (1 - 2 sqrt(nu)) - S_v A2 t^{1/3} + o(t^{1/3}), E[A2] = -1.7710868
    const double t = 2000.0, nu = 0.16;
    const long n = std::lround(nu * t);
    const long R = 100;
    const auto e = sim::sample_positions(SystemSpec::finite(1, 0.75), {{n, t}}, R, 6);
    double m = 0.0;
    for (long x : e.column(0)) m += double(x) / t;
    m /= double(R);
    const double sv = std::pow(0.16, -1.0 / 6.0) * std::pow(0.6, 2.0 / 3.0);
    const double shift = 1.7710868 * sv * std::cbrt(t) / t;
    CHECK(std::abs(m - hydro::macro_position(nu, 0.75) - shift) < 0.002);
}

TEST_CASE("shock estimator drifts with speed alpha - 1/2") {
    const double t = 2000.0, a = 0.25;
    const long R = 200;
    const auto s = sim::sample_shock(a, t, 1.0, R, 12);
    double m = 0.0;
    for (const auto& x : s) m += double(x.x);
    m /= double(R);
    CHECK(std::abs(m - (a - 0.5) * t) <= 3.0 * std::sqrt(hydro::diffusion_coefficient(a) * t / R) + 2.0 * std::pow(t, 5.0 / 12.0));
}

TEST_CASE("raising the shock cutoff never moves the estimate to a later particle") {
    const auto tr = sim::simulate(SystemSpec::finite(1, 0.25), 400, 400.0, 5);
    long prev = sim::estimate_shock(tr, 400.0, 0.5).n;
    for (double c = 0.55; c <= 2.0; c += 0.05) {
        const long n = sim::estimate_shock(tr, 400.0, c).n;
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("M = infinity records its slow-particle window") {
    const auto e = sim::sample_positions(SystemSpec::infinite(2.0), {{1, 20.0}}, 50, 2);
    CHECK(e.wall_window > 0);
    CHECK(e.wall_window == sim::wall_window(20.0, 1));
}

}

TEST_SUITE("limits") {

TEST_CASE("mean of x_{nu t}(t) / t at t = 2000, nu = 0.16 is within 0.01 of 1 - 2 sqrt(nu)") {
    const double t = 2000.0, nu = 0.16;
    const long n = std::lround(nu * t);
    const long R = 100;
    const auto e = sim::sample_positions(SystemSpec::finite(1, 0.75), {{n, t}}, R, 6);
    double m = 0.0;
    for (long x : e.column(0)) m += double(x) / t;
    m /= double(R);
    CHECK(std::abs(m - hydro::macro_position(nu, 0.75)) < 0.01);
}

}
