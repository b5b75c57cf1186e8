#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "tasep/core.hpp"

namespace tasep::sim {

struct NoShockDetected : Error {
    using Error::Error;
};

// Per-replica random stream: a 64-bit Mersenne Twister seeded from
// (master seed, replica index) through std::seed_seq, so that replica r's numbers
// depend on nothing else.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t replica);
    double uniform();  // in (0, 1]
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    bool bernoulli(double p) { return uniform() <= p; }

private:
    std::mt19937_64 eng_;
};

// Particles listed right to left: y strictly decreasing.
struct Initial {
    std::vector<long> y;
    std::vector<double> rate;
    long first_label = 1;  // label of y[0]; M = infinity windows use labels 1 - W .. 0 for slow particles

    std::size_t size() const { return y.size(); }
    std::size_t index_of(long label) const;
};

// Number of slow particles kept for an M = infinity system: particle n can be
// influenced by the slow particle at distance m only if it made more than m jumps,
// and its jump count is dominated by Poisson(horizon).
long wall_window(double horizon, long n_normal, double prob = 1e-6);

// Deterministic start y_j = 2(M - j) for labels 1..n_max. For M = infinity,
// W = wall_window(horizon, n_max) slow particles at 0, 2, ..., 2(W-1) precede
// normal particles 1..n_max at -2, -4, ....
Initial deterministic_initial(const SystemSpec& spec, long n_max, double horizon);

// Rate-1 particles at 0, -2, ..., -2(n_det - 1), Bernoulli(1 - alpha) rate-1
// particles on {1, ..., L}. Labels: first deterministic particle gets label 1.
Initial bernoulli_equivalent_init(double alpha, long n_det, long L, Stream& rng);

class Trajectory {
public:
    Initial init;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> jump_times;  // per particle, increasing, all <= horizon

    long position_by_index(std::size_t i, double t) const;
    long position(long label, double t) const { return position_by_index(init.index_of(label), t); }
    // (time, label) for every jump, time ordered
    std::vector<std::pair<double, long>> events() const;
};

// Exact sample: particle i's k-th jump happens at
//   T_{i,k} = max(T_{i,k-1}, T_{i-1,k-g+1}) + Exp(rate_i),  g = y_{i-1} - y_i,
// which is the jump chain of independent exponential clocks with blocked rings
// discarded.
Trajectory simulate(const Initial& init, double horizon, Stream& rng);
Trajectory simulate(const SystemSpec& spec, long n_max, double horizon, std::uint64_t seed,
                    std::uint64_t replica = 0);

struct Ensemble {
    std::vector<SpaceTimePoint> queries;
    long replicas = 0;
    std::uint64_t seed = 0;
    long wall_window = 0;             // slow particles simulated for M = infinity, else 0
    std::vector<long> x;              // row-major replicas x queries

    long at(long r, std::size_t q) const { return x[std::size_t(r) * queries.size() + q]; }
    std::vector<long> column(std::size_t q) const;
    // empirical P(x_{n_q}(t_q) >= a)
    double tail(std::size_t q, long a) const;
};

// Runs fn(r, stream_r) for r = 0..replicas-1 over `workers` threads; results
// are stored by replica index so the outcome does not depend on the worker count.
template <class T>
std::vector<T> run_replicas(long replicas, std::uint64_t seed, int workers,
                            const std::function<T(long, Stream&)>& fn) {
    if (replicas < 1) throw InvalidArgument("replicas must be >= 1");
    std::vector<T> out(static_cast<std::size_t>(replicas));
    const long w = std::clamp<long>(workers, 1, replicas);
    std::vector<std::exception_ptr> err(static_cast<std::size_t>(w));
    auto chunk = [&](long k) {
        try {
            for (long r = replicas * k / w; r < replicas * (k + 1) / w; ++r) {
                Stream s(seed, static_cast<std::uint64_t>(r));
                out[static_cast<std::size_t>(r)] = fn(r, s);
            }
        } catch (...) {
            err[static_cast<std::size_t>(k)] = std::current_exception();
        }
    };
    if (w == 1) {
        chunk(0);
    } else {
        std::vector<std::thread> pool;
        for (long k = 0; k < w; ++k) pool.emplace_back(chunk, k);
        for (auto& th : pool) th.join();
    }
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

Ensemble sample_positions(const SystemSpec& spec, const std::vector<SpaceTimePoint>& queries, long replicas,
                          std::uint64_t seed, int workers = 1);

// Same queries (labels >= 2 of the M = 1 system) under the Bernoulli start; label n
// is the rate-1 particle started at -2(n-1).
Ensemble sample_positions_bernoulli(double alpha, const std::vector<SpaceTimePoint>& queries, long replicas,
                                    std::uint64_t seed, int workers = 1);

// Per-site occupation frequency on [lo, hi] at time t.
std::vector<double> density_profile(const SystemSpec& spec, double t, long lo, long hi, long replicas,
                                    std::uint64_t seed, int workers = 1);

struct ShockSample {
    long n;  // label of the first particle out of the jam
    long x;  // its position
};

// First particle whose deficit t/2 - 2n - x_n(t) is at most c t^{5/12}.
ShockSample estimate_shock(const Trajectory& tr, double t, double c = 1.0);

// Streaming version for M = 1: simulates particles only until the shock is found.
std::vector<ShockSample> sample_shock(double alpha, double t, double c, long replicas, std::uint64_t seed,
                                      int workers = 1);

void write_csv(const Ensemble& e, std::ostream& os);
void write_json(const Ensemble& e, std::ostream& os);

}  // namespace tasep::sim

