#include "pinnsel/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinnsel {

Selection uniform_select(int K, double x_lo, double x_hi, double t_lo, double t_hi,
                         std::uint64_t seed, bool iid) {
    if (K < 1) throw std::invalid_argument("uniform_select: K must be >= 1");
    Rng rng(Rng::mix(seed, 0x756e6966 /* "unif" */));

    Selection sel;
    sel.points.reserve(K);
    if (iid) {
        for (int i = 0; i < K; ++i) {
            sel.points.push_back({rng.uniform(x_lo, x_hi), rng.uniform(t_lo, t_hi)});
        }
    } else {
        const int g = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(K))));
        std::vector<int> cells(static_cast<std::size_t>(g) * g);
        std::iota(cells.begin(), cells.end(), 0);
        if (static_cast<int>(cells.size()) > K) rng.shuffle(cells);
        cells.resize(K);
        std::sort(cells.begin(), cells.end());
        const double wx = (x_hi - x_lo) / g;
        const double wt = (t_hi - t_lo) / g;
        for (int cell : cells) {
            const int cx = cell % g, ct = cell / g;
            sel.points.push_back({x_lo + (cx + rng.uniform()) * wx,
                                  t_lo + (ct + rng.uniform()) * wt});
        }
    }
    sel.indices.assign(K, -1);  // synthesized, not pool members
    sel.provenance.assign(K, Provenance::Optimized);
    return sel;
}

Selection random_select(const CandidatePool& pool, int K, std::uint64_t seed) {
    if (K > pool.size()) throw std::invalid_argument("random_select: K exceeds pool size");
    if (K < 0) throw std::invalid_argument("random_select: K must be >= 0");
    Rng rng(Rng::mix(seed, 0x726e6453 /* "rndS" */));
    std::vector<int> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < K; ++i) {
        const std::size_t j = i + rng.integer(idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(K);
    std::sort(idx.begin(), idx.end());

    Selection sel;
    for (int i : idx) {
        sel.indices.push_back(i);
        sel.points.push_back(pool.points[i]);
        sel.provenance.push_back(Provenance::Optimized);
    }
    return sel;
}

Selection topk_residual(const CandidatePool& pool, const std::vector<double>& scores,
                        int K) {
    if (static_cast<int>(scores.size()) != pool.size()) {
        throw std::invalid_argument("topk_residual: score/pool size mismatch");
    }
    if (K > pool.size()) throw std::invalid_argument("topk_residual: K exceeds pool size");
    std::vector<int> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(K);
    std::sort(order.begin(), order.end());

    Selection sel;
    for (int i : order) {
        sel.indices.push_back(i);
        sel.points.push_back(pool.points[i]);
        sel.provenance.push_back(Provenance::Optimized);
    }
    return sel;
}

Selection topk_with_anchors(const CandidatePool& pool, const std::vector<double>& scores,
                            int K, double rho, std::uint64_t seed) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
        throw std::invalid_argument("topk_with_anchors: rho must be in [0, 1]");
    }
    if (K > pool.size()) throw std::invalid_argument("topk_with_anchors: K exceeds pool size");
    const int k_anchor = static_cast<int>(std::floor(rho * K + 1e-9));

    Selection sel;
    std::vector<std::uint8_t> taken(pool.points.size(), 0);
    if (k_anchor > 0) {
        const auto anchors = lhs_anchors(k_anchor, pool.x_lo, pool.x_hi, pool.t_lo,
                                         pool.t_hi, Rng::mix(seed, 0x616e6368));
        SimilarityConfig snap_cfg{std::max(pool.x_hi - pool.x_lo, 1e-12),
                                  std::max(pool.t_hi - pool.t_lo, 1e-12), 1};
        for (int idx : snap_anchors_to_pool(anchors, pool.points, snap_cfg)) {
            taken[idx] = 1;
            sel.indices.push_back(idx);
            sel.points.push_back(pool.points[idx]);
            sel.provenance.push_back(Provenance::Anchor);
        }
    }

    std::vector<int> order;
    order.reserve(pool.size());
    for (int i = 0; i < pool.size(); ++i) {
        if (!taken[i]) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    order.resize(K - k_anchor);
    std::sort(order.begin(), order.end());
    for (int i : order) {
        sel.indices.push_back(i);
        sel.points.push_back(pool.points[i]);
        sel.provenance.push_back(Provenance::Optimized);
    }
    return sel;
}

Selection greedy_kcenter(const CandidatePool& pool, int K, const SimilarityConfig& metric,
                         std::uint64_t seed) {
    if (K < 1 || K > pool.size()) {
        throw std::invalid_argument("greedy_kcenter: need 1 <= K <= pool size");
    }
    Rng rng(Rng::mix(seed, 0x6b63656e /* "kcen" */));
    const int n = pool.size();
    std::vector<int> chosen;
    chosen.reserve(K);
    chosen.push_back(static_cast<int>(rng.integer(n)));

    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    for (int step = 1; step < K; ++step) {
        const Point& latest = pool.points[chosen.back()];
        int far = -1;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
            const double d = scaled_distance_sq(pool.points[i], latest, metric);
            if (d < min_d[i]) min_d[i] = d;
            if (min_d[i] > far_d) {
                far_d = min_d[i];
                far = i;
            }
        }
        chosen.push_back(far);
    }

    std::sort(chosen.begin(), chosen.end());
    Selection sel;
    for (int i : chosen) {
        sel.indices.push_back(i);
        sel.points.push_back(pool.points[i]);
        sel.provenance.push_back(Provenance::Optimized);
    }
    return sel;
}

}  // namespace pinnsel
