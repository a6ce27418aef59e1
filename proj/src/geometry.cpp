#include "pinnsel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace pinnsel {

double similarity(const Point& p, const Point& q, const SimilarityConfig& cfg) {
    const double dx = (p.x - q.x) / cfg.ell_x;
    const double dt = (p.t - q.t) / cfg.ell_t;
    return std::exp(-(dx * dx + dt * dt));
}

double scaled_distance_sq(const Point& p, const Point& q, const SimilarityConfig& cfg) {
    const double dx = (p.x - q.x) / cfg.ell_x;
    const double dt = (p.t - q.t) / cfg.ell_t;
    return dx * dx + dt * dt;
}

namespace {

void validate_similarity(const SimilarityConfig& cfg) {
    if (!(cfg.ell_x > 0.0) || !(cfg.ell_t > 0.0)) {
        throw std::invalid_argument("SimilarityConfig: length scales must be > 0");
    }
    if (cfg.k < 1) throw std::invalid_argument("SimilarityConfig: k must be >= 1");
}

// k nearest neighbors of every point under the scaled metric, exact, via a
// sweep over the x-sorted order with distance pruning. Ties break toward the
// lower point index. Throws on coincident points.
std::vector<std::vector<int>> knn_exact(std::span<const Point> pts,
                                        const SimilarityConfig& cfg) {
    const int n = static_cast<int>(pts.size());
    const int k = std::min(cfg.k, n - 1);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
        if (pts[a].t != pts[b].t) return pts[a].t < pts[b].t;
        return a < b;
    });
    std::vector<int> rank(n);
    for (int r = 0; r < n; ++r) rank[order[r]] = r;

    std::vector<std::vector<int>> result(n);
    using Entry = std::pair<double, int>;  // (distance^2, index)
    std::vector<Entry> heap;               // max-heap of the k best
    heap.reserve(k + 1);

    for (int i = 0; i < n; ++i) {
        heap.clear();
        const Point& p = pts[i];
        auto consider = [&](int j) {
            const double d2 = scaled_distance_sq(p, pts[j], cfg);
            if (d2 == 0.0) {
                char buf[128];
                std::snprintf(buf, sizeof buf,
                              "build_knn_graph: duplicate point (%.17g, %.17g)",
                              p.x, p.t);
                throw std::invalid_argument(buf);
            }
            const Entry e{d2, j};
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(e);
                std::push_heap(heap.begin(), heap.end());
            } else if (e < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = e;
                std::push_heap(heap.begin(), heap.end());
            }
        };
        // Expand outward from the point's x-rank; prune a direction once the
        // x gap alone exceeds the current kth-best distance.
        int left = rank[i] - 1, right = rank[i] + 1;
        bool go_left = left >= 0, go_right = right < n;
        while (go_left || go_right) {
            const double worst = (static_cast<int>(heap.size()) < k)
                                     ? std::numeric_limits<double>::infinity()
                                     : heap.front().first;
            if (go_left) {
                const int j = order[left];
                const double gx = (p.x - pts[j].x) / cfg.ell_x;
                if (gx * gx > worst) {
                    go_left = false;
                } else {
                    consider(j);
                    if (--left < 0) go_left = false;
                }
            }
            if (go_right) {
                const double worst2 = (static_cast<int>(heap.size()) < k)
                                          ? std::numeric_limits<double>::infinity()
                                          : heap.front().first;
                const int j = order[right];
                const double gx = (pts[j].x - p.x) / cfg.ell_x;
                if (gx * gx > worst2) {
                    go_right = false;
                } else {
                    consider(j);
                    if (++right >= n) go_right = false;
                }
            }
        }
        std::sort(heap.begin(), heap.end());
        result[i].reserve(heap.size());
        for (const auto& [d2, j] : heap) result[i].push_back(j);
    }
    return result;
}

}  // namespace

KnnGraph build_knn_graph(std::span<const Point> points, const SimilarityConfig& cfg) {
    validate_similarity(cfg);
    const int n = static_cast<int>(points.size());
    if (n < 2) throw std::invalid_argument("build_knn_graph: need at least 2 points");

    const auto neighbors = knn_exact(points, cfg);

    std::vector<std::uint64_t> keys;
    keys.reserve(static_cast<std::size_t>(n) * cfg.k);
    for (int i = 0; i < n; ++i) {
        for (int j : neighbors[i]) {
            const std::uint64_t a = static_cast<std::uint32_t>(std::min(i, j));
            const std::uint64_t b = static_cast<std::uint32_t>(std::max(i, j));
            keys.push_back((a << 32) | b);
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    KnnGraph g;
    g.node_count = n;
    g.edges.reserve(keys.size());
    g.edge_weights.reserve(keys.size());
    for (std::uint64_t key : keys) {
        const int i = static_cast<int>(key >> 32);
        const int j = static_cast<int>(key & 0xffffffffu);
        g.edges.push_back({i, j});
        g.edge_weights.push_back(similarity(points[i], points[j], cfg));
    }

    g.adj_offsets.assign(n + 1, 0);
    for (const auto& e : g.edges) {
        ++g.adj_offsets[e[0] + 1];
        ++g.adj_offsets[e[1] + 1];
    }
    for (int v = 0; v < n; ++v) g.adj_offsets[v + 1] += g.adj_offsets[v];
    g.adj_node.resize(g.edges.size() * 2);
    g.adj_edge.resize(g.edges.size() * 2);
    std::vector<int> cursor(g.adj_offsets.begin(), g.adj_offsets.end() - 1);
    for (int e = 0; e < g.edge_count(); ++e) {
        const int i = g.edges[e][0], j = g.edges[e][1];
        g.adj_node[cursor[i]] = j;
        g.adj_edge[cursor[i]++] = e;
        g.adj_node[cursor[j]] = i;
        g.adj_edge[cursor[j]++] = e;
    }
    return g;
}

std::vector<Point> lhs_anchors(int k_anchor, double x_lo, double x_hi,
                               double t_lo, double t_hi, std::uint64_t seed) {
    if (k_anchor < 0) throw std::invalid_argument("lhs_anchors: k_anchor must be >= 0");
    std::vector<Point> anchors;
    if (k_anchor == 0) return anchors;

    Rng rng(Rng::mix(seed, 0x6c6873 /* "lhs" */));
    std::vector<int> strata_x(k_anchor), strata_t(k_anchor);
    std::iota(strata_x.begin(), strata_x.end(), 0);
    std::iota(strata_t.begin(), strata_t.end(), 0);
    rng.shuffle(strata_x);
    rng.shuffle(strata_t);

    anchors.reserve(k_anchor);
    const double wx = (x_hi - x_lo) / k_anchor;
    const double wt = (t_hi - t_lo) / k_anchor;
    for (int i = 0; i < k_anchor; ++i) {
        double jx = rng.uniform();
        double jt = rng.uniform();
        if (jx == 0.0) jx = 0.5;  // keep points strictly inside their stratum
        if (jt == 0.0) jt = 0.5;
        anchors.push_back({x_lo + (strata_x[i] + jx) * wx, t_lo + (strata_t[i] + jt) * wt});
    }
    return anchors;
}

SimilarityConfig auto_length_scales(std::span<const Point> points, int k,
                                    double multiplier) {
    const int n = static_cast<int>(points.size());
    if (n < 2) throw std::invalid_argument("auto_length_scales: need at least 2 points");

    double x_lo = points[0].x, x_hi = points[0].x;
    double t_lo = points[0].t, t_hi = points[0].t;
    for (const auto& p : points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        t_lo = std::min(t_lo, p.t);
        t_hi = std::max(t_hi, p.t);
    }
    const double rx = std::max(x_hi - x_lo, 1e-12);
    const double rt = std::max(t_hi - t_lo, 1e-12);

    // Nearest-neighbor spacing measured on range-normalized axes.
    SimilarityConfig probe{rx, rt, 1};
    const auto nn = knn_exact(points, probe);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) {
        d[i] = std::sqrt(scaled_distance_sq(points[i], points[nn[i][0]], probe));
    }
    std::nth_element(d.begin(), d.begin() + n / 2, d.end());
    const double med = d[n / 2];

    SimilarityConfig cfg;
    cfg.k = k;
    cfg.ell_x = std::max(multiplier * med * rx, 1e-9);
    cfg.ell_t = std::max(multiplier * med * rt, 1e-9);
    return cfg;
}

std::vector<int> snap_anchors_to_pool(std::span<const Point> anchors,
                                      std::span<const Point> pool,
                                      const SimilarityConfig& cfg) {
    if (anchors.size() > pool.size()) {
        throw std::invalid_argument("snap_anchors_to_pool: more anchors than candidates");
    }
    std::vector<char> taken(pool.size(), 0);
    std::vector<int> out;
    out.reserve(anchors.size());
    for (const auto& a : anchors) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pool.size(); ++j) {
            if (taken[j]) continue;
            const double d = scaled_distance_sq(a, pool[j], cfg);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        taken[best] = 1;
        out.push_back(best);
    }
    return out;
}

void write_graph_csv(const KnnGraph& graph, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_graph_csv: cannot open " + path);
    f.precision(17);
    f << "i,j,w\n";
    for (int e = 0; e < graph.edge_count(); ++e) {
        f << graph.edges[e][0] << ',' << graph.edges[e][1] << ',' << graph.edge_weights[e] << '\n';
    }
}

}  // namespace pinnsel
