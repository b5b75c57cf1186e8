#include <doctest.h>

#include <algorithm>
#include <random>

#include "tasep/core.hpp"

using namespace tasep;

TEST_SUITE("core") {

TEST_CASE("space-like examples") {
    CHECK(is_space_like({1, 5.0}, {2, 3.0}));
    CHECK_FALSE(is_space_like({1, 5.0}, {1, 5.0}));
    CHECK(is_space_like({3, 2.0}, {1, 7.0}));
    CHECK_FALSE(is_space_like({1, 3.0}, {2, 5.0}));
}

TEST_CASE("initial positions and rates") {
    CHECK(SystemSpec::finite(1, 0.5).initial_position(1) == 0);
    CHECK(SystemSpec::finite(3, 0.5).initial_position(3) == 0);
    CHECK(SystemSpec::finite(3, 0.5).initial_position(1) == 4);
    CHECK(SystemSpec::finite(1, 0.5).initial_position(5) == -8);
    const auto s = SystemSpec::finite(2, 0.3);
    CHECK(s.jump_rate(1) == 0.3);
    CHECK(s.jump_rate(2) == 0.3);
    CHECK(s.jump_rate(3) == 1.0);
    for (long j = 1; j < 20; ++j) CHECK(s.initial_position(j + 1) < s.initial_position(j));
}

TEST_CASE("invalid specs and infinite-system queries") {
    CHECK_THROWS_AS(SystemSpec::finite(0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(SystemSpec::finite(1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(SystemSpec::finite(1, -1.0), InvalidArgument);
    const auto inf = SystemSpec::infinite(2.0);
    CHECK(inf.is_infinite());
    CHECK_THROWS_AS(inf.M(), InfiniteSystemQuery);
    CHECK_THROWS_AS(inf.initial_position(1), InfiniteSystemQuery);
    CHECK(inf.wall_initial_position(1) == -2);
    CHECK(inf.wall_initial_position(3) == -6);
}

TEST_CASE("sort_space_like examples") {
    const auto s = sort_space_like({{2, 3.0}, {1, 5.0}});
    REQUIRE(s.size() == 2);
    CHECK(s.points[0] == SpaceTimePoint{1, 5.0});
    CHECK(s.points[1] == SpaceTimePoint{2, 3.0});
    CHECK(sort_space_like({{1, 5.0}}).points == std::vector<SpaceTimePoint>{{1, 5.0}});
    CHECK_THROWS_AS(sort_space_like({{1, 3.0}, {2, 5.0}}), NotSpaceLike);
}

TEST_CASE("sort_space_like carries thresholds with their points") {
    const auto s = sort_space_like({{3, 1.0}, {1, 4.0}, {2, 2.0}}, {-3, 7, 0});
    REQUIRE(s.thresholds.size() == 3);
    CHECK(s.points[0].n == 1);
    CHECK(s.thresholds[0] == 7);
    CHECK(s.thresholds[1] == 0);
    CHECK(s.thresholds[2] == -3);
}

TEST_CASE("precedes is a strict partial order") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> n(1, 4);
    std::uniform_int_distribution<int> t(0, 3);
    auto draw = [&] { return SpaceTimePoint{n(rng), double(t(rng))}; };
    for (int k = 0; k < 3000; ++k) {
        const auto a = draw(), b = draw(), c = draw();
        CHECK_FALSE(precedes(a, a));
        if (precedes(a, b)) CHECK_FALSE(precedes(b, a));
        if (precedes(a, b) && precedes(b, c)) CHECK(precedes(a, c));
    }
}

TEST_CASE("sort_space_like is invariant under permutation") {
    std::vector<SpaceTimePoint> pts{{1, 9.0}, {2, 7.5}, {2, 6.0}, {4, 6.0}, {7, 0.5}};
    const auto ref = sort_space_like(pts).points;
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        std::shuffle(pts.begin(), pts.end(), rng);
        CHECK(sort_space_like(pts).points == ref);
    }
    for (std::size_t k = 0; k + 1 < ref.size(); ++k) CHECK(precedes(ref[k], ref[k + 1]));
}

}
