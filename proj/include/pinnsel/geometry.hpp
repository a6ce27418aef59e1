#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinnsel/common.hpp"

namespace pinnsel {

/// Anisotropic RBF similarity kernel and kNN degree.
struct SimilarityConfig {
    double ell_x = 0.1;
    double ell_t = 0.1;
    int k = 12;
};

/// w = exp(-((dx/ell_x)^2 + (dt/ell_t)^2)); symmetric, 1 iff p == q.
double similarity(const Point& p, const Point& q, const SimilarityConfig& cfg);

/// Squared distance in the length-scale-normalized metric.
double scaled_distance_sq(const Point& p, const Point& q, const SimilarityConfig& cfg);

/// Undirected kNN graph (union symmetrization). Edges carry the similarity
/// weight; adjacency is CSR for O(degree) neighbor scans.
struct KnnGraph {
    int node_count = 0;
    std::vector<std::array<int, 2>> edges;  // i < j, lexicographically sorted
    std::vector<double> edge_weights;
    std::vector<int> adj_offsets;   // size node_count + 1
    std::vector<int> adj_node;
    std::vector<int> adj_edge;

    int edge_count() const { return static_cast<int>(edges.size()); }
    int degree(int v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
};

/// Exact kNN under the scaled metric via a sorted-axis sweep. Throws on
/// duplicate points.
KnnGraph build_knn_graph(std::span<const Point> points, const SimilarityConfig& cfg);

/// Latin hypercube sample in the open rectangle: exactly one jittered point
/// per axis stratum. Deterministic per seed; k_anchor = 0 gives an empty set.
std::vector<Point> lhs_anchors(int k_anchor, double x_lo, double x_hi,
                               double t_lo, double t_hi, std::uint64_t seed);

/// Length scales set to 2x the median nearest-neighbor spacing of the set,
/// measured per axis on range-normalized coordinates.
SimilarityConfig auto_length_scales(std::span<const Point> points, int k,
                                    double multiplier = 2.0);

/// Maps each anchor to its nearest distinct pool candidate under the scaled
/// metric (next-nearest on collision). Returns pool indices, anchor order.
std::vector<int> snap_anchors_to_pool(std::span<const Point> anchors,
                                      std::span<const Point> pool,
                                      const SimilarityConfig& cfg);

/// Debug dump: one `i,j,w` row per edge.
void write_graph_csv(const KnnGraph& graph, const std::string& path);

}  // namespace pinnsel
