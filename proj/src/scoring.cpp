#include "pinnsel/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace pinnsel {

CandidatePool sample_pool(int n, const BurgersProblem& problem, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_pool: n must be >= 1");
    problem.validate();
    CandidatePool pool;
    pool.seed = seed;
    pool.x_lo = problem.x_lo;
    pool.x_hi = problem.x_hi;
    pool.t_lo = 0.0;
    pool.t_hi = problem.T;
    pool.points.reserve(n);

    Rng rng(Rng::mix(seed, 0x706f6f6c /* "pool" */));
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(static_cast<std::size_t>(n) * 2);
    auto key = [](const Point& p) {
        std::uint64_t hx, ht;
        std::memcpy(&hx, &p.x, sizeof hx);
        std::memcpy(&ht, &p.t, sizeof ht);
        return Rng::mix(hx, ht);
    };
    while (static_cast<int>(pool.points.size()) < n) {
        Point p{rng.uniform(pool.x_lo, pool.x_hi), rng.uniform(pool.t_lo, pool.t_hi)};
        if (p.x <= pool.x_lo || p.x >= pool.x_hi || p.t <= pool.t_lo || p.t >= pool.t_hi) {
            continue;  // boundary hits are rejected; the pool is interior-only
        }
        if (!seen.insert(key(p)).second) continue;
        pool.points.push_back(p);
    }
    return pool;
}

std::vector<double> score_candidates(const MlpParams& params,
                                     const CandidatePool& pool, double nu,
                                     int threads) {
    const std::size_t n = pool.points.size();
    std::vector<double> scores(n, 0.0);
    std::vector<int> bad(chunk_count(n, 512), -1);
    parallel_chunks(n, 512, threads, [&](std::size_t b, std::size_t e, std::size_t c) {
        for (std::size_t i = b; i < e; ++i) {
            const double r = residual(params, pool.points[i].x, pool.points[i].t, nu);
            if (!std::isfinite(r)) {
                bad[c] = static_cast<int>(i);
                return;
            }
            scores[i] = r * r;
        }
    });
    for (int idx : bad) {
        if (idx >= 0) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "score_candidates: non-finite residual at point (%.17g, %.17g)",
                          pool.points[idx].x, pool.points[idx].t);
            throw std::runtime_error(buf);
        }
    }
    return scores;
}

namespace {

// Nearest-rank quantile of v (q in (0, 1]).
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return v[rank - 1];
}

}  // namespace

std::vector<double> normalize_scores(const std::vector<double>& raw,
                                     const ScoringConfig& cfg) {
    if (raw.empty()) throw std::invalid_argument("normalize_scores: empty input");
    if (!(cfg.clip_quantile > 0.0 && cfg.clip_quantile <= 1.0)) {
        throw std::invalid_argument("normalize_scores: clip quantile must be in (0, 1]");
    }

    double lo, hi;
    if (cfg.mode == NormalizationMode::MinMaxClip) {
        lo = *std::min_element(raw.begin(), raw.end());
        hi = quantile(raw, cfg.clip_quantile);
    } else {
        lo = quantile(raw, 0.01);
        hi = quantile(raw, 0.99);
    }

    std::vector<double> out(raw.size());
    if (!(hi > lo)) {
        std::fill(out.begin(), out.end(), 0.5);  // degenerate: constant scores
        return out;
    }
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::clamp((raw[i] - lo) * inv, 0.0, 1.0);
    }
    return out;
}

std::vector<int> prefilter(const CandidatePool& pool,
                           const std::vector<double>& scores,
                           const ScoringConfig& cfg, std::uint64_t seed) {
    const int n = pool.size();
    const int m = cfg.prefilter_size;
    if (static_cast<int>(scores.size()) != n) {
        throw std::invalid_argument("prefilter: score/pool size mismatch");
    }
    if (m > n) throw std::invalid_argument("prefilter: M exceeds pool size");
    if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) {
        throw std::invalid_argument("prefilter: beta must be in [0, 1]");
    }

    int n_top = static_cast<int>(std::ceil(cfg.beta * m - 1e-9));
    n_top = std::clamp(n_top, 0, m);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;  // ties by lower index
    });

    std::vector<int> picked(order.begin(), order.begin() + n_top);
    std::vector<int> rest(order.begin() + n_top, order.end());
    std::sort(rest.begin(), rest.end());

    Rng rng(Rng::mix(seed, 0x70726566 /* "pref" */));
    const int need = m - n_top;
    for (int i = 0; i < need; ++i) {
        const std::size_t j = i + rng.integer(rest.size() - i);
        std::swap(rest[i], rest[j]);
        picked.push_back(rest[i]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace pinnsel
