#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tasep {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct NotSpaceLike : Error {
    using Error::Error;
};
// Raised when a finite-M query is made against an M = infinity system.
struct InfiniteSystemQuery : Error {
    using Error::Error;
};

// Model with M slow particles of rate alpha; particles are labelled 1, 2, ...
// from right to left and start at y_j = 2(M - j).
class SystemSpec {
public:
    static SystemSpec finite(int M, double alpha);
    static SystemSpec infinite(double alpha);

    bool is_infinite() const { return !M_.has_value(); }
    int M() const;  // throws InfiniteSystemQuery when M = infinity
    double alpha() const { return alpha_; }

    long initial_position(long j) const;
    double jump_rate(long j) const;

    // M = infinity only: slow particles occupy 2N, normal particle n starts at -2n.
    long wall_initial_position(long n) const;

    std::string describe() const;

private:
    SystemSpec(std::optional<int> M, double alpha) : M_(M), alpha_(alpha) {}
    std::optional<int> M_;
    double alpha_;
};

struct SpaceTimePoint {
    long n;
    double t;
    bool operator==(const SpaceTimePoint&) const = default;
};

bool precedes(const SpaceTimePoint& a, const SpaceTimePoint& b);
bool is_space_like(const SpaceTimePoint& a, const SpaceTimePoint& b);

struct SpaceLikeSequence {
    std::vector<SpaceTimePoint> points;
    std::vector<long> thresholds;  // empty or one per point

    std::size_t size() const { return points.size(); }
};

// Orders mutually space-like points so that consecutive entries satisfy precedes().
SpaceLikeSequence sort_space_like(std::vector<SpaceTimePoint> points);
SpaceLikeSequence sort_space_like(std::vector<SpaceTimePoint> points, std::vector<long> thresholds);

std::string to_string(const SpaceTimePoint& p);

}  // namespace tasep
