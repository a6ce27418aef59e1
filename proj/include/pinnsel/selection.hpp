#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnsel/common.hpp"
#include "pinnsel/geometry.hpp"
#include "pinnsel/mlp.hpp"
#include "pinnsel/qubo.hpp"
#include "pinnsel/scoring.hpp"

namespace pinnsel {

enum class Provenance : std::uint8_t { Optimized, Anchor, RepairedIn };

const char* provenance_name(Provenance p);

/// Exact-K subset of a candidate pool. `indices` refer to the pool the
/// selection was made from; -1 marks synthesized points (grid baselines).
struct Selection {
    std::vector<int> indices;
    std::vector<Point> points;
    std::vector<Provenance> provenance;

    int size() const { return static_cast<int>(points.size()); }
};

enum class QuboForm { SparseSoftK, DenseKHot };

/// Everything the selection pipeline needs besides the pool and parameters.
struct PipelineConfig {
    int pool_size = 20000;   // N
    int budget = 1000;       // K
    double rho = 0.2;        // anchor fraction for hybrid selection
    int knn_k = 12;
    double ell_x = 0.0;      // 0 = derive from working-set spacing
    double ell_t = 0.0;
    ScoringConfig scoring;   // M, beta, normalization
    SelectionWeights weights;
    MuMode mu_mode = MuMode::Heuristic;
    QuboForm form = QuboForm::SparseSoftK;
    SaConfig sa;
    int warm_steps = 1000;
    int warm_points = 512;
    bool refresh = false;
    int refresh_every = 2000;
    int burn_in = 1000;
};

/// Redundancy-aware marginal utility of a selected point:
/// alpha*s_i - gamma * sum of edge weights to other selected points.
double marginal_utility(int i, std::span<const int> selected,
                        std::span<const double> scores, const KnnGraph& graph,
                        const SelectionWeights& weights);

/// Marginal gain of adding an unselected point:
/// alpha*s_i - gamma * sum of edge weights to selected points.
double marginal_gain(int i, std::span<const int> selected,
                     std::span<const double> scores, const KnnGraph& graph,
                     const SelectionWeights& weights);

struct RepairStep {
    bool removed = false;
    int index = -1;
};

/// Greedy repair to exactly K: drop lowest-utility points while oversized,
/// add highest-gain points while undersized. Neighbor sums are maintained
/// incrementally; ties break toward the lower index.
Selection repair_exact_k(std::span<const std::uint8_t> z, int K,
                         std::span<const double> scores,
                         std::span<const Point> points, const KnnGraph& graph,
                         const SelectionWeights& weights,
                         std::vector<RepairStep>* trace = nullptr);

struct SelectOutcome {
    Selection selection;
    TimingBreakdown timing;
    double mu_used = 0.0;
    int pre_repair_size = 0;
};

/// Normalize/clip -> prefilter -> kNN graph -> BQM -> anneal -> repair, on
/// explicit raw scores. Selection indices refer to `points`.
SelectOutcome select_from_scores(std::span<const Point> points,
                                 const std::vector<double>& raw_scores,
                                 const PipelineConfig& cfg, int budget,
                                 std::uint64_t seed);

/// One-shot pipeline: residual scoring under the supplied warm parameters,
/// then select_from_scores with the configured budget.
SelectOutcome one_shot_select(const CandidatePool& pool, const MlpParams& params,
                              const BurgersProblem& problem,
                              const PipelineConfig& cfg, std::uint64_t seed);

/// Hybrid anchors: floor(rho*K) LHS anchors snapped to distinct pool
/// candidates, then the one-shot pipeline over the remaining candidates for
/// the rest of the budget.
SelectOutcome hybrid_select(const CandidatePool& pool, const MlpParams& params,
                            const BurgersProblem& problem,
                            const PipelineConfig& cfg, std::uint64_t seed);

/// True when training step `step` (past burn-in) lands on a refresh period.
bool refresh_schedule(long step, long burn_in, long refresh_every);

void write_selection_csv(const Selection& sel, const std::string& path);

}  // namespace pinnsel
