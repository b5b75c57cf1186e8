#include "tasep/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <boost/math/distributions/poisson.hpp>

namespace tasep::sim {

Stream::Stream(std::uint64_t seed, std::uint64_t replica) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(replica),
                      std::uint32_t(replica >> 32)};
    eng_.seed(seq);
}

double Stream::uniform() { return (double(eng_() >> 11) + 1.0) * 0x1p-53; }

std::size_t Initial::index_of(long label) const {
    const long i = label - first_label;
    if (i < 0 || i >= long(y.size())) throw InvalidArgument("particle label outside the simulated range");
    return std::size_t(i);
}

long wall_window(double horizon, long n_normal, double prob) {
    if (horizon <= 0.0) return 1;
    // union over the n_normal queried particles
    const boost::math::poisson_distribution<double> P(horizon);
    const double q = prob / double(std::max(1L, n_normal));
    const long m = long(boost::math::quantile(boost::math::complement(P, q)));
    return m + 1;
}

Initial deterministic_initial(const SystemSpec& spec, long n_max, double horizon) {
    if (n_max < 1) throw InvalidArgument("simulate: n_max must be >= 1");
    Initial init;
    if (!spec.is_infinite()) {
        for (long j = 1; j <= n_max; ++j) {
            init.y.push_back(spec.initial_position(j));
            init.rate.push_back(spec.jump_rate(j));
        }
        init.first_label = 1;
        return init;
    }
    const long W = wall_window(horizon, n_max);
    for (long m = W - 1; m >= 0; --m) {
        init.y.push_back(2 * m);
        init.rate.push_back(spec.alpha());
    }
    for (long n = 1; n <= n_max; ++n) {
        init.y.push_back(-2 * n);
        init.rate.push_back(1.0);
    }
    init.first_label = 1 - W;
    return init;
}

Initial bernoulli_equivalent_init(double alpha, long n_det, long L, Stream& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("bernoulli_equivalent_init: alpha must lie in (0, 1)");
    Initial init;
    for (long x = L; x >= 1; --x)
        if (rng.bernoulli(1.0 - alpha)) {
            init.y.push_back(x);
            init.rate.push_back(1.0);
        }
    const long nb = long(init.y.size());
    for (long k = 0; k < n_det; ++k) {
        init.y.push_back(-2 * k);
        init.rate.push_back(1.0);
    }
    init.first_label = 1 - nb;
    return init;
}

namespace {

// Jump times of a particle given the jump times of the particle ahead of it
// (`ahead == nullptr` for the first particle).
void advance_row(const std::vector<double>* ahead, long gap, double rate, double horizon, Stream& rng,
                 std::vector<double>& cur) {
    cur.clear();
    double T = 0.0;
    for (long k = 1;; ++k) {
        double start = T;
        if (ahead) {
            const long m = k - gap + 1;  // jumps the particle ahead must have made
            if (m > long(ahead->size())) return;
            if (m >= 1) start = std::max(start, (*ahead)[std::size_t(m - 1)]);
        }
        T = start + rng.exponential(rate);
        if (T > horizon) return;
        cur.push_back(T);
    }
}

long count_le(const std::vector<double>& v, double t) {
    return long(std::upper_bound(v.begin(), v.end(), t) - v.begin());
}

// Streams the rows of `init` and calls visit(i, times) for each particle; stops
// when visit returns false.
template <class Visit>
void stream_rows(const Initial& init, double horizon, Stream& rng, Visit&& visit) {
    std::vector<double> prev, cur;
    for (std::size_t i = 0; i < init.size(); ++i) {
        advance_row(i ? &prev : nullptr, i ? init.y[i - 1] - init.y[i] : 0, init.rate[i], horizon, rng, cur);
        if (!visit(i, cur)) return;
        std::swap(prev, cur);
    }
}

double max_time(const std::vector<SpaceTimePoint>& q) {
    double t = 0.0;
    for (const auto& p : q) {
        if (p.t < 0.0) throw InvalidArgument("query times must be >= 0");
        t = std::max(t, p.t);
    }
    return t;
}

std::vector<long> positions_from_rows(const Initial& init, const std::vector<SpaceTimePoint>& queries,
                                      double horizon, Stream& rng) {
    std::vector<long> out(queries.size());
    std::multimap<std::size_t, std::size_t> by_index;
    std::size_t last = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const std::size_t i = init.index_of(queries[q].n);
        by_index.emplace(i, q);
        last = std::max(last, i);
    }
    stream_rows(init, horizon, rng, [&](std::size_t i, const std::vector<double>& times) {
        auto [b, e] = by_index.equal_range(i);
        for (auto it = b; it != e; ++it)
            out[it->second] = init.y[i] + count_le(times, queries[it->second].t);
        return i < last;
    });
    return out;
}

long reach(double t) { return long(std::ceil(t + 8.0 * std::sqrt(t) + 20.0)); }

}  // namespace

long Trajectory::position_by_index(std::size_t i, double t) const {
    if (t > horizon) throw InvalidArgument("position queried beyond the simulated horizon");
    return init.y[i] + count_le(jump_times[i], t);
}

std::vector<std::pair<double, long>> Trajectory::events() const {
    std::vector<std::pair<double, long>> ev;
    for (std::size_t i = 0; i < jump_times.size(); ++i)
        for (double t : jump_times[i]) ev.emplace_back(t, init.first_label + long(i));
    std::sort(ev.begin(), ev.end());
    return ev;
}

Trajectory simulate(const Initial& init, double horizon, Stream& rng) {
    if (horizon < 0.0) throw InvalidArgument("simulate: horizon must be >= 0");
    if (init.size() < 1) throw InvalidArgument("simulate: need at least one particle");
    Trajectory tr;
    tr.init = init;
    tr.horizon = horizon;
    tr.jump_times.reserve(init.size());
    stream_rows(init, horizon, rng, [&](std::size_t, const std::vector<double>& times) {
        tr.jump_times.push_back(times);
        return true;
    });
    return tr;
}

Trajectory simulate(const SystemSpec& spec, long n_max, double horizon, std::uint64_t seed, std::uint64_t replica) {
    if (horizon < 0.0) throw InvalidArgument("simulate: horizon must be >= 0");
    Stream rng(seed, replica);
    Trajectory tr = simulate(deterministic_initial(spec, n_max, horizon), horizon, rng);
    tr.seed = seed;
    return tr;
}

std::vector<long> Ensemble::column(std::size_t q) const {
    std::vector<long> c(static_cast<std::size_t>(replicas));
    for (long r = 0; r < replicas; ++r) c[std::size_t(r)] = at(r, q);
    return c;
}

double Ensemble::tail(std::size_t q, long a) const {
    long k = 0;
    for (long r = 0; r < replicas; ++r) k += at(r, q) >= a;
    return double(k) / double(replicas);
}

Ensemble sample_positions(const SystemSpec& spec, const std::vector<SpaceTimePoint>& queries, long replicas,
                          std::uint64_t seed, int workers) {
    if (queries.empty()) throw InvalidArgument("sample_positions: no queries");
    const double horizon = max_time(queries);
    long n_max = 1;
    for (const auto& p : queries) n_max = std::max(n_max, p.n);
    const Initial init = deterministic_initial(spec, n_max, horizon);
    auto rows = run_replicas<std::vector<long>>(replicas, seed, workers, [&](long, Stream& rng) {
        return positions_from_rows(init, queries, horizon, rng);
    });
    Ensemble e;
    e.queries = queries;
    e.replicas = replicas;
    e.seed = seed;
    e.wall_window = spec.is_infinite() ? -init.first_label + 1 : 0;
    e.x.reserve(std::size_t(replicas) * queries.size());
    for (const auto& r : rows) e.x.insert(e.x.end(), r.begin(), r.end());
    return e;
}

Ensemble sample_positions_bernoulli(double alpha, const std::vector<SpaceTimePoint>& queries, long replicas,
                                    std::uint64_t seed, int workers) {
    if (queries.empty()) throw InvalidArgument("sample_positions: no queries");
    const double horizon = max_time(queries);
    long n_max = 1;
    for (const auto& p : queries) {
        if (p.n < 2) throw InvalidArgument("Bernoulli start has no counterpart of the slow particle");
        n_max = std::max(n_max, p.n);
    }
    const long L = reach(horizon);
    auto rows = run_replicas<std::vector<long>>(replicas, seed, workers, [&](long, Stream& rng) {
        // the rate-1 particle at 0 with Bernoulli(1 - alpha) ahead of it jumps as a
        // Poisson process of rate alpha, so it plays the slow particle and labels agree
        const Initial init = bernoulli_equivalent_init(alpha, n_max, L, rng);
        return positions_from_rows(init, queries, horizon, rng);
    });
    Ensemble e;
    e.queries = queries;
    e.replicas = replicas;
    e.seed = seed;
    for (const auto& r : rows) e.x.insert(e.x.end(), r.begin(), r.end());
    return e;
}

std::vector<double> density_profile(const SystemSpec& spec, double t, long lo, long hi, long replicas,
                                    std::uint64_t seed, int workers) {
    if (hi < lo) throw InvalidArgument("density_profile: empty window");
    // every particle that can reach lo by time t
    const long far = lo - reach(t);
    long n_max = 1;
    if (spec.is_infinite()) {
        n_max = std::max(1L, -far / 2 + 1);
    } else {
        while (spec.initial_position(n_max + 1) >= far) ++n_max;
    }
    const Initial init = deterministic_initial(spec, n_max, t);
    const std::size_t width = std::size_t(hi - lo + 1);
    auto occ = run_replicas<std::vector<std::uint8_t>>(replicas, seed, workers, [&](long, Stream& rng) {
        std::vector<std::uint8_t> o(width, 0);
        stream_rows(init, t, rng, [&](std::size_t i, const std::vector<double>& times) {
            const long x = init.y[i] + long(times.size());
            if (x >= lo && x <= hi) o[std::size_t(x - lo)] = 1;
            return true;
        });
        return o;
    });
    std::vector<double> rho(width, 0.0);
    for (const auto& o : occ)
        for (std::size_t k = 0; k < width; ++k) rho[k] += o[k];
    for (double& v : rho) v /= double(replicas);
    return rho;
}

ShockSample estimate_shock(const Trajectory& tr, double t, double c) {
    const double cut = c * std::pow(t, 5.0 / 12.0);
    for (std::size_t i = 0; i < tr.init.size(); ++i) {
        const long n = tr.init.first_label + long(i);
        if (n < 1) continue;
        const long x = tr.position_by_index(i, t);
        if (0.5 * t - 2.0 * double(n) - double(x) <= cut) return {n, x};
    }
    throw NoShockDetected("no simulated particle left the jam; simulate more particles");
}

std::vector<ShockSample> sample_shock(double alpha, double t, double c, long replicas, std::uint64_t seed,
                                      int workers) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw InvalidArgument("sample_shock: needs 0 < alpha < 1/2");
    const double cut = c * std::pow(t, 5.0 / 12.0);
    // the jam ends near n = (1 - alpha) t / 2; allow a generous margin
    const long n_max = long(std::ceil((1.0 - alpha) * t / 2.0 + 20.0 * std::sqrt(t) + 50.0));
    const Initial init = deterministic_initial(SystemSpec::finite(1, alpha), n_max, t);
    return run_replicas<ShockSample>(replicas, seed, workers, [&](long, Stream& rng) {
        ShockSample s{-1, 0};
        stream_rows(init, t, rng, [&](std::size_t i, const std::vector<double>& times) {
            const long n = long(i) + 1;
            const long x = init.y[i] + long(times.size());
            if (0.5 * t - 2.0 * double(n) - double(x) <= cut) {
                s = {n, x};
                return false;
            }
            return true;
        });
        if (s.n < 0) throw NoShockDetected("no particle left the jam within the simulated range");
        return s;
    });
}

void write_csv(const Ensemble& e, std::ostream& os) {
    os << "replica,n,t,x\n";
    for (long r = 0; r < e.replicas; ++r)
        for (std::size_t q = 0; q < e.queries.size(); ++q)
            os << r << ',' << e.queries[q].n << ',' << e.queries[q].t << ',' << e.at(r, q) << '\n';
}

void write_json(const Ensemble& e, std::ostream& os) {
    nlohmann::json j;
    j["schema"] = "tasep.ensemble/1";
    j["seed"] = e.seed;
    j["replicas"] = e.replicas;
    j["wall_window"] = e.wall_window;
    for (const auto& q : e.queries) j["queries"].push_back({{"n", q.n}, {"t", q.t}});
    j["x"] = e.x;
    os << j.dump(1) << '\n';
}

}  // namespace tasep::sim
