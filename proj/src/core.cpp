#include "tasep/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tasep {

SystemSpec SystemSpec::finite(int M, double alpha) {
    if (M < 1) throw InvalidArgument("M must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
    return SystemSpec(M, alpha);
}

SystemSpec SystemSpec::infinite(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
    return SystemSpec(std::nullopt, alpha);
}

int SystemSpec::M() const {
    if (!M_) throw InfiniteSystemQuery("M is infinite; index particles relative to the wall");
    return *M_;
}

long SystemSpec::initial_position(long j) const {
    if (j < 1) throw InvalidArgument("particle index must be >= 1");
    return 2L * (static_cast<long>(M()) - j);
}

double SystemSpec::jump_rate(long j) const {
    if (j < 1) throw InvalidArgument("particle index must be >= 1");
    if (is_infinite()) throw InfiniteSystemQuery("M is infinite; index particles relative to the wall");
    return j <= *M_ ? alpha_ : 1.0;
}

long SystemSpec::wall_initial_position(long n) const {
    if (!is_infinite()) throw InvalidArgument("wall indexing requires M = infinity");
    if (n < 1) throw InvalidArgument("particle index must be >= 1");
    return -2L * n;
}

std::string SystemSpec::describe() const {
    std::ostringstream os;
    os << "M=" << (M_ ? std::to_string(*M_) : std::string("inf")) << " alpha=" << alpha_;
    return os.str();
}

bool precedes(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    return a.n <= b.n && a.t >= b.t && !(a == b);
}

bool is_space_like(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    return precedes(a, b) || precedes(b, a);
}

std::string to_string(const SpaceTimePoint& p) {
    std::ostringstream os;
    os << "(n=" << p.n << ",t=" << p.t << ")";
    return os.str();
}

SpaceLikeSequence sort_space_like(std::vector<SpaceTimePoint> points) {
    return sort_space_like(std::move(points), {});
}

SpaceLikeSequence sort_space_like(std::vector<SpaceTimePoint> points, std::vector<long> thresholds) {
    if (!thresholds.empty() && thresholds.size() != points.size())
        throw InvalidArgument("one threshold per point required");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (!is_space_like(points[i], points[j]))
                throw NotSpaceLike("points " + to_string(points[i]) + " and " + to_string(points[j]) +
                                   " are not space-like");

    // On a space-like set the order is total: sort by n, then by decreasing t.
    std::vector<std::size_t> idx(points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].n != points[b].n) return points[a].n < points[b].n;
        return points[a].t > points[b].t;
    });
    SpaceLikeSequence out;
    for (auto i : idx) {
        out.points.push_back(points[i]);
        if (!thresholds.empty()) out.thresholds.push_back(thresholds[i]);
    }
    return out;
}

}  // namespace tasep
