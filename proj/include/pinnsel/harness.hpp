#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnsel/baselines.hpp"
#include "pinnsel/common.hpp"
#include "pinnsel/mlp.hpp"
#include "pinnsel/pde_reference.hpp"
#include "pinnsel/selection.hpp"

namespace pinnsel {

enum class Method {
    Uniform,
    Random,
    TopK,
    TopKAnchors,
    KCenter,
    DenseQubo,
    SparseBqm,
    HybridBqm,
};

const char* method_name(Method m);
Method parse_method(const std::string& name);

/// ||pred - ref||_2 / ||ref||_2 over matching samples.
double rel_l2(std::span<const double> pred, std::span<const double> ref);

/// max |pred - ref|.
double linf_error(std::span<const double> pred, std::span<const double> ref);

struct ResidualStats {
    double mean_sq = 0.0;
    double p95_sq = 0.0;  // nearest-rank 95th percentile
};

/// Mean and 95th percentile of squared residuals on a held-out interior set.
ResidualStats residual_stats(const MlpParams& params, std::span<const Point> heldout,
                             double nu, int threads = 0);

/// Selection-stage seconds divided by training seconds.
double overhead_ratio(const TimingBreakdown& timing);

struct Checkpoint {
    int step = 0;
    double elapsed_seconds = 0.0;  // warm + selection + training so far
    double rel_l2 = 0.0;
};

/// Elapsed time of the first checkpoint strictly below epsilon; nullopt if
/// the threshold is never reached. The series must be time-ordered.
std::optional<double> time_to_accuracy(std::span<const Checkpoint> series,
                                       double epsilon);

struct ExperimentConfig {
    BurgersProblem problem;
    PipelineConfig pipeline;
    Method method = Method::SparseBqm;
    int train_steps = 9000;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    int eval_nx = 256;
    int eval_nt = 101;
    int heldout_points = 2048;
    int checkpoint_every = 250;
    double epsilon = 2e-3;
    std::string out_dir = "results";
    double learning_rate = 1e-3;
    double lr_final = 0.0;
    int batch_size = 0;
    LossWeights loss_weights;
    std::vector<int> hidden = {32, 32, 32, 32};
    int ic_points = 256;
    int bc_points_per_side = 128;
    int threads = 0;
    int ref_nx = 1024;
    int ref_nt = 101;
    double ref_cfl = 0.5;
    bool write_files = true;
};

/// Per-seed outcome row.
struct SeedReport {
    std::uint64_t seed = 0;
    double rel_l2 = 0.0;
    double linf = 0.0;
    double res_mean = 0.0;
    double res_p95 = 0.0;
    TimingBreakdown timing;
    double overhead = 0.0;
    std::optional<double> tta;
    std::vector<Checkpoint> checkpoints;
    Selection selection;        // final collocation set
    std::vector<Point> heldout;
};

struct ExperimentResult {
    Method method = Method::Uniform;
    std::vector<SeedReport> seeds;
    std::vector<std::string> errors;  // per-seed failures, run continues

    double mean_rel_l2() const;
    double mean_tta_censored() const;  // absent -> that run's total elapsed
};

/// Full protocol for one method: reference solve (cached across seeds),
/// warm-start, selection with stage timing, training with periodic
/// evaluation checkpoints (and refresh when enabled), metrics, CSV rows.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const ReferenceSolution* shared_reference = nullptr);

struct SelectionRun {
    Selection selection;
    TimingBreakdown timing;
    MlpParams warm_params;
    CandidatePool pool;
};

/// Warm-start plus method-specific selection, no main training. Backs the
/// `select` CLI subcommand.
SelectionRun run_selection_only(const ExperimentConfig& cfg, std::uint64_t seed);

enum class AblationAxis { Gamma, Rho, KnnK, Refresh };

AblationAxis parse_ablation_axis(const std::string& name);

struct AblationRow {
    double value = 0.0;
    int k_anchor = 0;
    double rel_l2_mean = 0.0;
    double rel_l2_std = 0.0;
    double linf_mean = 0.0;
    double overhead_mean = 0.0;
    double tta_mean = 0.0;
    double t_total_mean = 0.0;
};

/// Runs run_experiment once per value of the chosen axis and emits one
/// aggregate row per value (also written to <out_dir>/ablation_<axis>.csv).
std::vector<AblationRow> run_ablation(AblationAxis axis,
                                      const std::vector<double>& values,
                                      const ExperimentConfig& base);

/// Flat key = value configuration file (# comments). Unknown keys throw.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

/// Fixed results-CSV schema shared by run_experiment and the tests.
std::string results_csv_header();
std::string results_csv_row(Method method, const std::string& seed_label,
                            int K, const SeedReport& row);

}  // namespace pinnsel
