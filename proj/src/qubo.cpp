#include "pinnsel/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pinnsel {

void SparseBqm::build_adjacency() {
    adj_offsets.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++adj_offsets[e[0] + 1];
        ++adj_offsets[e[1] + 1];
    }
    for (int v = 0; v < n; ++v) adj_offsets[v + 1] += adj_offsets[v];
    adj_node.resize(edges.size() * 2);
    adj_edge.resize(edges.size() * 2);
    std::vector<int> cursor(adj_offsets.begin(), adj_offsets.end() - 1);
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
        const int i = edges[e][0], j = edges[e][1];
        adj_node[cursor[i]] = j;
        adj_edge[cursor[i]++] = e;
        adj_node[cursor[j]] = i;
        adj_edge[cursor[j]++] = e;
    }
}

DenseQubo build_dense_khot(const std::vector<double>& scores, const KnnGraph& graph,
                           const SelectionWeights& weights, int K) {
    const int n = static_cast<int>(scores.size());
    if (graph.node_count != n) throw std::invalid_argument("build_dense_khot: graph/score size mismatch");
    if (K > n) throw std::invalid_argument("build_dense_khot: K exceeds variable count");
    if (!(weights.alpha > 0.0)) throw std::invalid_argument("build_dense_khot: alpha must be > 0");
    if (!(weights.lambda_card > 0.0)) throw std::invalid_argument("build_dense_khot: lambda_card must be > 0");

    DenseQubo q;
    q.n = n;
    q.offset = weights.lambda_card * static_cast<double>(K) * K;
    q.init_ones = K;
    q.linear.resize(n);
    for (int i = 0; i < n; ++i) {
        q.linear[i] = -weights.alpha * scores[i] + weights.lambda_card * (1.0 - 2.0 * K);
    }
    q.upper.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 2.0 * weights.lambda_card);
    for (int e = 0; e < graph.edge_count(); ++e) {
        q.upper[q.pair_index(graph.edges[e][0], graph.edges[e][1])] +=
            weights.gamma * graph.edge_weights[e];
    }
    return q;
}

SparseBqm build_sparse_bqm(const std::vector<double>& scores, const KnnGraph& graph,
                           const SelectionWeights& weights) {
    const int n = static_cast<int>(scores.size());
    if (graph.node_count != n) throw std::invalid_argument("build_sparse_bqm: graph/score size mismatch");
    if (!(weights.alpha > 0.0)) throw std::invalid_argument("build_sparse_bqm: alpha must be > 0");
    if (weights.gamma < 0.0) throw std::invalid_argument("build_sparse_bqm: gamma must be >= 0");

    SparseBqm b;
    b.n = n;
    b.offset = 0.0;
    b.init_ones = 0;
    b.linear.resize(n);
    for (int i = 0; i < n; ++i) b.linear[i] = -weights.alpha * scores[i] + weights.mu;
    b.edges = graph.edges;
    b.quadratic.resize(graph.edge_weights.size());
    for (std::size_t e = 0; e < b.quadratic.size(); ++e) {
        b.quadratic[e] = weights.gamma * graph.edge_weights[e];
    }
    b.build_adjacency();
    return b;
}

double energy(const SparseBqm& model, std::span<const std::uint8_t> z) {
    if (static_cast<int>(z.size()) != model.n) {
        throw std::invalid_argument("energy: state length mismatch");
    }
    double e = model.offset;
    for (int i = 0; i < model.n; ++i) {
        if (z[i]) e += model.linear[i];
    }
    for (std::size_t k = 0; k < model.edges.size(); ++k) {
        if (z[model.edges[k][0]] && z[model.edges[k][1]]) e += model.quadratic[k];
    }
    return e;
}

double energy(const DenseQubo& model, std::span<const std::uint8_t> z) {
    if (static_cast<int>(z.size()) != model.n) {
        throw std::invalid_argument("energy: state length mismatch");
    }
    double e = model.offset;
    for (int i = 0; i < model.n; ++i) {
        if (!z[i]) continue;
        e += model.linear[i];
        for (int j = i + 1; j < model.n; ++j) {
            if (z[j]) e += model.upper[model.pair_index(i, j)];
        }
    }
    return e;
}

namespace {

void validate_sa(const SaConfig& cfg) {
    if (cfg.sweeps < 1) throw std::invalid_argument("SaConfig: sweeps must be >= 1");
    if (cfg.restarts < 1) throw std::invalid_argument("SaConfig: restarts must be >= 1");
    if (!(cfg.beta_final > cfg.beta_init && cfg.beta_init > 0.0)) {
        throw std::invalid_argument("SaConfig: need beta_final > beta_init > 0");
    }
}

std::vector<std::uint8_t> initial_state(int n, int ones, Rng& rng) {
    std::vector<std::uint8_t> z(n, 0);
    ones = std::clamp(ones, 0, n);
    if (ones == 0) return z;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < ones; ++i) {
        const std::size_t j = i + rng.integer(idx.size() - i);
        std::swap(idx[i], idx[j]);
        z[idx[i]] = 1;
    }
    return z;
}

double schedule_beta(const SaConfig& cfg, int sweep) {
    if (cfg.sweeps == 1) return cfg.beta_final;
    const double f = static_cast<double>(sweep) / (cfg.sweeps - 1);
    return cfg.beta_init * std::pow(cfg.beta_final / cfg.beta_init, f);
}

}  // namespace

void anneal_single(const SparseBqm& model, const SaConfig& cfg, Rng& rng,
                   std::vector<std::uint8_t>& best, double& best_energy) {
    std::vector<std::uint8_t> z = initial_state(model.n, model.init_ones, rng);
    double e = energy(model, z);
    best = z;
    best_energy = e;

    for (int s = 0; s < cfg.sweeps; ++s) {
        const double beta = schedule_beta(cfg, s);
        for (int i = 0; i < model.n; ++i) {
            double field = model.linear[i];
            for (int a = model.adj_offsets[i]; a < model.adj_offsets[i + 1]; ++a) {
                if (z[model.adj_node[a]]) field += model.quadratic[model.adj_edge[a]];
            }
            const double de = z[i] ? -field : field;
            if (de <= 0.0 || rng.uniform() < std::exp(-beta * de)) {
                z[i] ^= 1;
                e += de;
                if (e < best_energy) {
                    best_energy = e;
                    best = z;
                }
            }
        }
    }
}

void anneal_single(const DenseQubo& model, std::span<const double> full_matrix,
                   const SaConfig& cfg, Rng& rng, std::vector<std::uint8_t>& best,
                   double& best_energy) {
    const int n = model.n;
    std::vector<std::uint8_t> z = initial_state(n, model.init_ones, rng);
    std::vector<double> zd(n);
    for (int i = 0; i < n; ++i) zd[i] = z[i];
    double e = energy(model, z);
    best = z;
    best_energy = e;

    for (int s = 0; s < cfg.sweeps; ++s) {
        const double beta = schedule_beta(cfg, s);
        for (int i = 0; i < n; ++i) {
            const double* row = full_matrix.data() + static_cast<std::size_t>(i) * n;
            double field = model.linear[i];
            for (int j = 0; j < n; ++j) field += row[j] * zd[j];
            const double de = z[i] ? -field : field;
            if (de <= 0.0 || rng.uniform() < std::exp(-beta * de)) {
                z[i] ^= 1;
                zd[i] = z[i];
                e += de;
                if (e < best_energy) {
                    best_energy = e;
                    best = z;
                }
            }
        }
    }
}

AnnealResult anneal(const SparseBqm& model, const SaConfig& cfg) {
    validate_sa(cfg);
    StopWatch watch;
    std::vector<std::vector<std::uint8_t>> states(cfg.restarts);
    std::vector<double> energies(cfg.restarts);
    parallel_chunks(cfg.restarts, 1, cfg.threads,
                    [&](std::size_t b, std::size_t e_, std::size_t) {
                        for (std::size_t r = b; r < e_; ++r) {
                            Rng rng(Rng::mix(cfg.seed, 0x1000 + r));
                            anneal_single(model, cfg, rng, states[r], energies[r]);
                        }
                    });
    int pick = 0;
    for (int r = 1; r < cfg.restarts; ++r) {
        if (energies[r] < energies[pick]) pick = r;
    }
    AnnealResult out;
    out.best = std::move(states[pick]);
    out.best_energy = energies[pick];
    out.seconds = watch.seconds();
    return out;
}

AnnealResult anneal(const DenseQubo& model, const SaConfig& cfg) {
    validate_sa(cfg);
    StopWatch watch;
    const int n = model.n;
    // Mirror the upper triangle into a full matrix so each proposal is one
    // contiguous row scan, the honest O(M) cost of the dense formulation.
    std::vector<double> full(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double q = model.upper[model.pair_index(i, j)];
            full[static_cast<std::size_t>(i) * n + j] = q;
            full[static_cast<std::size_t>(j) * n + i] = q;
        }
    }
    std::vector<std::vector<std::uint8_t>> states(cfg.restarts);
    std::vector<double> energies(cfg.restarts);
    parallel_chunks(cfg.restarts, 1, cfg.threads,
                    [&](std::size_t b, std::size_t e_, std::size_t) {
                        for (std::size_t r = b; r < e_; ++r) {
                            Rng rng(Rng::mix(cfg.seed, 0x1000 + r));
                            anneal_single(model, full, cfg, rng, states[r], energies[r]);
                        }
                    });
    int pick = 0;
    for (int r = 1; r < cfg.restarts; ++r) {
        if (energies[r] < energies[pick]) pick = r;
    }
    AnnealResult out;
    out.best = std::move(states[pick]);
    out.best_energy = energies[pick];
    out.seconds = watch.seconds();
    return out;
}

double calibrate_mu(const std::vector<double>& normalized_scores, int K, int M,
                    MuMode mode, double alpha, const SaConfig* sa) {
    if (static_cast<int>(normalized_scores.size()) != M) {
        throw std::invalid_argument("calibrate_mu: score length must equal M");
    }
    if (K < 1 || K > M) throw std::invalid_argument("calibrate_mu: need 1 <= K <= M");

    const double mean =
        std::accumulate(normalized_scores.begin(), normalized_scores.end(), 0.0) / M;
    if (mode == MuMode::Heuristic) {
        return alpha * (mean - static_cast<double>(K) / M);
    }

    SaConfig cfg = sa ? *sa : SaConfig{};
    cfg.sweeps = std::max(50, cfg.sweeps / 10);
    cfg.restarts = 1;

    auto selected_size = [&](double mu) {
        SparseBqm model;
        model.n = M;
        model.linear.resize(M);
        for (int i = 0; i < M; ++i) model.linear[i] = -alpha * normalized_scores[i] + mu;
        model.build_adjacency();
        const AnnealResult r = anneal(model, cfg);
        return static_cast<int>(
            std::count(r.best.begin(), r.best.end(), std::uint8_t{1}));
    };

    const auto [mn, mx] =
        std::minmax_element(normalized_scores.begin(), normalized_scores.end());
    double lo = alpha * *mn - 1e-3;  // selects everything
    double hi = alpha * *mx + 1e-3;  // selects nothing
    double best_mu = alpha * (mean - static_cast<double>(K) / M);
    int best_gap = std::numeric_limits<int>::max();
    for (int iter = 0; iter < 8; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const int size = selected_size(mid);
        const int gap = std::abs(size - K);
        if (gap < best_gap) {
            best_gap = gap;
            best_mu = mid;
        }
        if (gap <= static_cast<int>(0.2 * K + 1e-9)) return mid;
        if (size > K) {
            lo = mid;  // too many selected: raise the bias
        } else {
            hi = mid;
        }
    }
    return best_mu;
}

void write_bqm_csv(const SparseBqm& model, const std::string& prefix) {
    std::ofstream fl(prefix + "_linear.csv");
    if (!fl) throw std::runtime_error("write_bqm_csv: cannot open " + prefix + "_linear.csv");
    fl.precision(17);
    fl << "i,bias\n";
    for (int i = 0; i < model.n; ++i) fl << i << ',' << model.linear[i] << '\n';
    std::ofstream fq(prefix + "_quadratic.csv");
    fq.precision(17);
    fq << "i,j,coupler\n";
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
        fq << model.edges[e][0] << ',' << model.edges[e][1] << ',' << model.quadratic[e] << '\n';
    }
}

void write_bqm_csv(const DenseQubo& model, const std::string& prefix) {
    std::ofstream fl(prefix + "_linear.csv");
    if (!fl) throw std::runtime_error("write_bqm_csv: cannot open " + prefix + "_linear.csv");
    fl.precision(17);
    fl << "i,bias\n";
    for (int i = 0; i < model.n; ++i) fl << i << ',' << model.linear[i] << '\n';
    std::ofstream fq(prefix + "_quadratic.csv");
    fq.precision(17);
    fq << "i,j,coupler\n";
    for (int i = 0; i < model.n; ++i) {
        for (int j = i + 1; j < model.n; ++j) {
            fq << i << ',' << j << ',' << model.upper[model.pair_index(i, j)] << '\n';
        }
    }
}

}  // namespace pinnsel
