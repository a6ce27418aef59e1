#pragma once

#include <cstdint>
#include <vector>

#include "pinnsel/scoring.hpp"
#include "pinnsel/selection.hpp"

namespace pinnsel {

/// Stratified jittered grid of K interior points (ceil(sqrt(K))^2 cells,
/// a seeded subset of cells when the grid overshoots K). Set iid = true for
/// plain i.i.d. uniform sampling instead.
Selection uniform_select(int K, double x_lo, double x_hi, double t_lo, double t_hi,
                         std::uint64_t seed, bool iid = false);

/// Uniform subsample of K pool candidates without replacement.
Selection random_select(const CandidatePool& pool, int K, std::uint64_t seed);

/// The K highest-score candidates; ties break toward the lower index.
Selection topk_residual(const CandidatePool& pool, const std::vector<double>& scores,
                        int K);

/// floor(rho*K) LHS anchors snapped to pool candidates plus the residual
/// top-(K - anchors) among the remaining candidates.
Selection topk_with_anchors(const CandidatePool& pool, const std::vector<double>& scores,
                            int K, double rho, std::uint64_t seed);

/// Farthest-point traversal under the scaled metric from a seeded start.
Selection greedy_kcenter(const CandidatePool& pool, int K, const SimilarityConfig& metric,
                         std::uint64_t seed);

}  // namespace pinnsel
