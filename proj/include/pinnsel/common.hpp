#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace pinnsel {

inline constexpr double kPi = 3.14159265358979323846;

struct Point {
    double x = 0.0;
    double t = 0.0;
};

/// Deterministic RNG wrapper. All draws are derived from the raw mt19937_64
/// stream with hand-rolled mappings, so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t integer(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (second value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return radius * std::cos(2.0 * kPi * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[integer(i)]);
        }
    }

    /// splitmix64-style combiner for deriving sub-stream seeds.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Independent child stream identified by a small tag.
    Rng fork(std::uint64_t stream) const { return Rng(mix(seed_, stream)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

class StopWatch {
public:
    StopWatch() : start_(clock::now()) {}
    void reset() { start_ = clock::now(); }
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_;
};

/// Wall-clock components of one selection + training pipeline.
struct TimingBreakdown {
    double t_warm = 0.0;
    double t_score = 0.0;
    double t_prefilter = 0.0;
    double t_graph = 0.0;
    double t_qubo_build = 0.0;
    double t_qubo_solve = 0.0;
    double t_repair = 0.0;
    double t_train = 0.0;

    double selection_seconds() const {
        return t_score + t_prefilter + t_graph + t_qubo_build + t_qubo_solve +
               t_repair;
    }
    double total() const { return t_warm + selection_seconds() + t_train; }

    TimingBreakdown& operator+=(const TimingBreakdown& o) {
        t_warm += o.t_warm;
        t_score += o.t_score;
        t_prefilter += o.t_prefilter;
        t_graph += o.t_graph;
        t_qubo_build += o.t_qubo_build;
        t_qubo_solve += o.t_qubo_solve;
        t_repair += o.t_repair;
        t_train += o.t_train;
        return *this;
    }
};

/// Runs fn(begin, end, chunk_index) over fixed-size chunks of [0, n).
/// Chunk boundaries depend only on n and chunk_size, never on the thread
/// count, so per-chunk reductions can be combined in a fixed order and give
/// identical results on any machine.
void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

/// Number of chunks parallel_chunks will use for a given n.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
    return n == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

}  // namespace pinnsel
