#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinnsel/common.hpp"
#include "pinnsel/geometry.hpp"

namespace pinnsel {

/// Objective weights: alpha scales importance, gamma scales redundancy,
/// lambda_card enforces the dense k-hot constraint, mu is the sparse
/// occupancy bias.
struct SelectionWeights {
    double alpha = 1.0;
    double gamma = 0.5;
    double lambda_card = 2.0;
    double mu = 0.0;
};

/// Sparse soft-K binary quadratic model: linear biases on every variable,
/// couplers only on kNN-graph edges, zero offset.
struct SparseBqm {
    int n = 0;
    std::vector<double> linear;
    std::vector<std::array<int, 2>> edges;  // i < j
    std::vector<double> quadratic;          // per edge
    double offset = 0.0;
    int init_ones = 0;  // annealer start: this many random ones

    // CSR adjacency over the couplers
    std::vector<int> adj_offsets, adj_node, adj_edge;
    void build_adjacency();
};

/// Dense k-hot QUBO: upper-triangular coupler storage over all pairs.
struct DenseQubo {
    int n = 0;
    std::vector<double> linear;
    std::vector<double> upper;  // n*(n-1)/2 entries, pair (i < j)
    double offset = 0.0;
    int init_ones = 0;

    std::size_t pair_index(int i, int j) const {  // requires i < j
        return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
    }
};

struct SaConfig {
    int sweeps = 2000;
    int restarts = 8;
    double beta_init = 0.1;
    double beta_final = 10.0;
    std::uint64_t seed = 0;
    int threads = 0;
};

/// Eq.-style dense k-hot build: linear -alpha*s_i + lambda*(1-2K), coupler
/// 2*lambda on every pair plus gamma*w_ij on graph edges, offset lambda*K^2.
DenseQubo build_dense_khot(const std::vector<double>& scores, const KnnGraph& graph,
                           const SelectionWeights& weights, int K);

/// Sparse soft-K build: linear -alpha*s_i + mu, coupler gamma*w_ij on edges.
SparseBqm build_sparse_bqm(const std::vector<double>& scores, const KnnGraph& graph,
                           const SelectionWeights& weights);

enum class MuMode { Heuristic, Search };

/// Occupancy bias calibration. Heuristic: alpha * (mean(s) - K/M). Search:
/// bisects mu over short anneals of the separable model until the pre-repair
/// selection size lands within +-20% of K (at most 8 iterations).
double calibrate_mu(const std::vector<double>& normalized_scores, int K, int M,
                    MuMode mode, double alpha = 1.0, const SaConfig* sa = nullptr);

double energy(const SparseBqm& model, std::span<const std::uint8_t> z);
double energy(const DenseQubo& model, std::span<const std::uint8_t> z);

struct AnnealResult {
    std::vector<std::uint8_t> best;
    double best_energy = 0.0;
    double seconds = 0.0;
};

/// Metropolis single-bit-flip simulated annealing under a geometric inverse
/// temperature schedule; best state over all restarts. Deterministic per
/// seed regardless of thread count.
AnnealResult anneal(const SparseBqm& model, const SaConfig& cfg);
AnnealResult anneal(const DenseQubo& model, const SaConfig& cfg);

/// Single-restart runs used internally and by tests; the returned energy is
/// the incrementally tracked value, never a final recomputation.
void anneal_single(const SparseBqm& model, const SaConfig& cfg, Rng& rng,
                   std::vector<std::uint8_t>& best, double& best_energy);
void anneal_single(const DenseQubo& model, std::span<const double> full_matrix,
                   const SaConfig& cfg, Rng& rng, std::vector<std::uint8_t>& best,
                   double& best_energy);

/// Model dump for external BQM tooling: `<prefix>_linear.csv` (i,bias) and
/// `<prefix>_quadratic.csv` (i,j,coupler).
void write_bqm_csv(const SparseBqm& model, const std::string& prefix);
void write_bqm_csv(const DenseQubo& model, const std::string& prefix);

}  // namespace pinnsel
