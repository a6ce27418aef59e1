#pragma once

#include <cstdint>
#include <vector>

#include "pinnsel/common.hpp"
#include "pinnsel/mlp.hpp"
#include "pinnsel/pde_reference.hpp"

namespace pinnsel {

/// Interior space-time candidate set; points are strictly inside the domain
/// and pairwise distinct.
struct CandidatePool {
    std::vector<Point> points;
    std::uint64_t seed = 0;
    double x_lo = -1.0, x_hi = 1.0;
    double t_lo = 0.0, t_hi = 1.0;

    int size() const { return static_cast<int>(points.size()); }
};

enum class NormalizationMode { MinMaxClip, RobustQuantile };

struct ScoringConfig {
    NormalizationMode mode = NormalizationMode::MinMaxClip;
    double clip_quantile = 0.99;
    int prefilter_size = 4000;  // M
    double beta = 0.7;          // top-score fraction of the working set
};

/// Uniform sample of n points over the open space-time interior.
CandidatePool sample_pool(int n, const BurgersProblem& problem, std::uint64_t seed);

/// Squared PDE residual per candidate under the given parameters.
std::vector<double> score_candidates(const MlpParams& params,
                                     const CandidatePool& pool, double nu,
                                     int threads = 0);

/// Maps raw scores into [0, 1]: clip at the configured quantile, rescale so
/// min -> 0 and clip value -> 1. Constant input maps to all-0.5.
std::vector<double> normalize_scores(const std::vector<double>& raw,
                                     const ScoringConfig& cfg);

/// Working-set selection: ceil(beta*M) top-score indices plus uniform draws
/// from the remainder, returned sorted ascending. Exactly M indices.
std::vector<int> prefilter(const CandidatePool& pool,
                           const std::vector<double>& scores,
                           const ScoringConfig& cfg, std::uint64_t seed);

}  // namespace pinnsel
