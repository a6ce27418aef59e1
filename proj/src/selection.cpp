#include "pinnsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace pinnsel {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Optimized: return "optimized";
        case Provenance::Anchor: return "anchor";
        case Provenance::RepairedIn: return "repaired-in";
    }
    return "?";
}

namespace {

double neighbor_sum(int i, const std::vector<std::uint8_t>& in_set,
                    const KnnGraph& graph) {
    double s = 0.0;
    for (int a = graph.adj_offsets[i]; a < graph.adj_offsets[i + 1]; ++a) {
        if (in_set[graph.adj_node[a]]) s += graph.edge_weights[graph.adj_edge[a]];
    }
    return s;
}

std::vector<std::uint8_t> membership(std::span<const int> selected, int n) {
    std::vector<std::uint8_t> in_set(n, 0);
    for (int i : selected) {
        if (i < 0 || i >= n) throw std::invalid_argument("selection index out of range");
        in_set[i] = 1;
    }
    return in_set;
}

}  // namespace

double marginal_utility(int i, std::span<const int> selected,
                        std::span<const double> scores, const KnnGraph& graph,
                        const SelectionWeights& weights) {
    const auto in_set = membership(selected, graph.node_count);
    if (!in_set[i]) throw std::invalid_argument("marginal_utility: i is not selected");
    return weights.alpha * scores[i] - weights.gamma * neighbor_sum(i, in_set, graph);
}

double marginal_gain(int i, std::span<const int> selected,
                     std::span<const double> scores, const KnnGraph& graph,
                     const SelectionWeights& weights) {
    const auto in_set = membership(selected, graph.node_count);
    if (in_set[i]) throw std::invalid_argument("marginal_gain: i is already selected");
    return weights.alpha * scores[i] - weights.gamma * neighbor_sum(i, in_set, graph);
}

Selection repair_exact_k(std::span<const std::uint8_t> z, int K,
                         std::span<const double> scores,
                         std::span<const Point> points, const KnnGraph& graph,
                         const SelectionWeights& weights,
                         std::vector<RepairStep>* trace) {
    const int n = graph.node_count;
    if (static_cast<int>(z.size()) != n || static_cast<int>(scores.size()) != n ||
        static_cast<int>(points.size()) != n) {
        throw std::invalid_argument("repair_exact_k: size mismatch");
    }
    if (K > n) throw std::invalid_argument("repair_exact_k: K exceeds candidate count");

    std::vector<std::uint8_t> in_set(z.begin(), z.end());
    std::vector<std::uint8_t> from_solver(in_set);
    int size = 0;
    for (auto b : in_set) size += b;

    // nsum[i] = sum of edge weights from i into the current selection.
    std::vector<double> nsum(n, 0.0);
    for (int e = 0; e < graph.edge_count(); ++e) {
        const int a = graph.edges[e][0], b = graph.edges[e][1];
        const double w = graph.edge_weights[e];
        if (in_set[b]) nsum[a] += w;
        if (in_set[a]) nsum[b] += w;
    }

    auto apply = [&](int i, bool add) {
        const double sign = add ? 1.0 : -1.0;
        in_set[i] = add ? 1 : 0;
        size += add ? 1 : -1;
        for (int a = graph.adj_offsets[i]; a < graph.adj_offsets[i + 1]; ++a) {
            nsum[graph.adj_node[a]] += sign * graph.edge_weights[graph.adj_edge[a]];
        }
        if (trace) trace->push_back({!add, i});
    };

    while (size > K) {
        int worst = -1;
        double worst_u = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!in_set[i]) continue;
            const double u = weights.alpha * scores[i] - weights.gamma * nsum[i];
            if (worst < 0 || u < worst_u) {
                worst = i;
                worst_u = u;
            }
        }
        apply(worst, false);
    }
    while (size < K) {
        int pick = -1;
        double pick_g = 0.0;
        for (int i = 0; i < n; ++i) {
            if (in_set[i]) continue;
            const double g = weights.alpha * scores[i] - weights.gamma * nsum[i];
            if (pick < 0 || g > pick_g) {
                pick = i;
                pick_g = g;
            }
        }
        apply(pick, true);
    }

    Selection sel;
    sel.indices.reserve(K);
    sel.points.reserve(K);
    sel.provenance.reserve(K);
    for (int i = 0; i < n; ++i) {
        if (!in_set[i]) continue;
        sel.indices.push_back(i);
        sel.points.push_back(points[i]);
        sel.provenance.push_back(from_solver[i] ? Provenance::Optimized
                                                : Provenance::RepairedIn);
    }
    return sel;
}

SelectOutcome select_from_scores(std::span<const Point> points,
                                 const std::vector<double>& raw_scores,
                                 const PipelineConfig& cfg, int budget,
                                 std::uint64_t seed) {
    if (points.size() != raw_scores.size()) {
        throw std::invalid_argument("select_from_scores: point/score size mismatch");
    }
    SelectOutcome out;
    StopWatch watch;

    // Normalize/clip and prefilter to the working set.
    ScoringConfig scoring = cfg.scoring;
    scoring.prefilter_size = std::min(scoring.prefilter_size,
                                      static_cast<int>(points.size()));
    if (budget > scoring.prefilter_size) {
        throw std::invalid_argument("select_from_scores: budget exceeds working-set size");
    }
    const std::vector<double> normalized = normalize_scores(raw_scores, scoring);
    CandidatePool view;  // prefilter only reads points
    view.points.assign(points.begin(), points.end());
    const std::vector<int> working = prefilter(view, normalized, scoring, seed);
    const int m = static_cast<int>(working.size());
    std::vector<Point> wpts(m);
    std::vector<double> wscores(m);
    for (int i = 0; i < m; ++i) {
        wpts[i] = points[working[i]];
        wscores[i] = normalized[working[i]];
    }
    out.timing.t_prefilter = watch.seconds();

    // kNN graph in scaled space-time. Default repulsion range follows the
    // budget: the spacing K points would have if spread over the domain. A
    // working-set-spacing rule collapses when the score field is concentrated
    // and leaves the background candidates outside each other's range.
    watch.reset();
    SimilarityConfig sim;
    if (cfg.ell_x > 0.0 && cfg.ell_t > 0.0) {
        sim = SimilarityConfig{cfg.ell_x, cfg.ell_t, cfg.knn_k};
    } else {
        double x_lo = wpts[0].x, x_hi = wpts[0].x;
        double t_lo = wpts[0].t, t_hi = wpts[0].t;
        for (const auto& p : wpts) {
            x_lo = std::min(x_lo, p.x);
            x_hi = std::max(x_hi, p.x);
            t_lo = std::min(t_lo, p.t);
            t_hi = std::max(t_hi, p.t);
        }
        const double spread = std::sqrt(static_cast<double>(std::max(budget, 1)));
        sim.k = cfg.knn_k;
        sim.ell_x = std::max(2.0 * (x_hi - x_lo) / spread, 1e-9);
        sim.ell_t = std::max(2.0 * (t_hi - t_lo) / spread, 1e-9);
    }
    const KnnGraph graph = build_knn_graph(wpts, sim);
    out.timing.t_graph = watch.seconds();

    // Model build (mu calibration included) and anneal.
    watch.reset();
    SelectionWeights weights = cfg.weights;
    SaConfig sa = cfg.sa;
    sa.seed = Rng::mix(seed, 0x736f6c76 /* "solv" */);
    std::vector<std::uint8_t> z;
    if (cfg.form == QuboForm::SparseSoftK) {
        weights.mu = calibrate_mu(wscores, budget, m, cfg.mu_mode, weights.alpha, &sa);
        out.mu_used = weights.mu;
        const SparseBqm model = build_sparse_bqm(wscores, graph, weights);
        out.timing.t_qubo_build = watch.seconds();
        watch.reset();
        AnnealResult res = anneal(model, sa);
        out.timing.t_qubo_solve = res.seconds;
        z = std::move(res.best);
    } else {
        const DenseQubo model = build_dense_khot(wscores, graph, weights, budget);
        out.timing.t_qubo_build = watch.seconds();
        watch.reset();
        AnnealResult res = anneal(model, sa);
        out.timing.t_qubo_solve = res.seconds;
        z = std::move(res.best);
    }
    out.pre_repair_size = static_cast<int>(std::count(z.begin(), z.end(), std::uint8_t{1}));

    // Exact-budget repair, then map working-set indices back to the pool.
    watch.reset();
    Selection sel = repair_exact_k(z, budget, wscores, wpts, graph, weights);
    for (int& idx : sel.indices) idx = working[idx];
    out.timing.t_repair = watch.seconds();
    out.selection = std::move(sel);
    return out;
}

SelectOutcome one_shot_select(const CandidatePool& pool, const MlpParams& params,
                              const BurgersProblem& problem,
                              const PipelineConfig& cfg, std::uint64_t seed) {
    StopWatch watch;
    const std::vector<double> raw = score_candidates(params, pool, problem.nu, cfg.sa.threads);
    const double t_score = watch.seconds();
    SelectOutcome out = select_from_scores(pool.points, raw, cfg, cfg.budget, seed);
    out.timing.t_score = t_score;
    return out;
}

SelectOutcome hybrid_select(const CandidatePool& pool, const MlpParams& params,
                            const BurgersProblem& problem,
                            const PipelineConfig& cfg, std::uint64_t seed) {
    if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) {
        throw std::invalid_argument("hybrid_select: rho must be in [0, 1]");
    }
    const int k_anchor = static_cast<int>(std::floor(cfg.rho * cfg.budget + 1e-9));
    if (k_anchor == 0) return one_shot_select(pool, params, problem, cfg, seed);

    SelectOutcome out;
    StopWatch watch;

    // Anchor placement and snapping count toward the prefilter stage.
    const std::vector<Point> anchors =
        lhs_anchors(k_anchor, pool.x_lo, pool.x_hi, pool.t_lo, pool.t_hi,
                    Rng::mix(seed, 0x616e6368 /* "anch" */));
    SimilarityConfig snap_cfg{std::max(pool.x_hi - pool.x_lo, 1e-12),
                              std::max(pool.t_hi - pool.t_lo, 1e-12), 1};
    const std::vector<int> anchor_idx =
        snap_anchors_to_pool(anchors, pool.points, snap_cfg);
    out.timing.t_prefilter += watch.seconds();

    std::vector<std::uint8_t> is_anchor(pool.points.size(), 0);
    for (int idx : anchor_idx) is_anchor[idx] = 1;

    Selection sel;
    for (int idx : anchor_idx) {
        sel.indices.push_back(idx);
        sel.points.push_back(pool.points[idx]);
        sel.provenance.push_back(Provenance::Anchor);
    }

    const int k_select = cfg.budget - k_anchor;
    if (k_select > 0) {
        // One-shot pipeline over the remaining candidates.
        std::vector<Point> rest;
        std::vector<int> rest_idx;
        rest.reserve(pool.points.size() - anchor_idx.size());
        for (std::size_t i = 0; i < pool.points.size(); ++i) {
            if (!is_anchor[i]) {
                rest.push_back(pool.points[i]);
                rest_idx.push_back(static_cast<int>(i));
            }
        }
        CandidatePool rest_pool = pool;
        rest_pool.points = rest;
        watch.reset();
        const std::vector<double> raw =
            score_candidates(params, rest_pool, problem.nu, cfg.sa.threads);
        out.timing.t_score = watch.seconds();
        SelectOutcome inner = select_from_scores(rest, raw, cfg, k_select, seed);
        out.timing += inner.timing;
        out.mu_used = inner.mu_used;
        out.pre_repair_size = inner.pre_repair_size;
        for (int i = 0; i < inner.selection.size(); ++i) {
            sel.indices.push_back(rest_idx[inner.selection.indices[i]]);
            sel.points.push_back(inner.selection.points[i]);
            sel.provenance.push_back(inner.selection.provenance[i]);
        }
    }
    out.selection = std::move(sel);
    return out;
}

bool refresh_schedule(long step, long burn_in, long refresh_every) {
    if (step < 0 || burn_in < 0) {
        throw std::invalid_argument("refresh_schedule: negative arguments");
    }
    if (refresh_every <= 0) {
        throw std::invalid_argument("refresh_schedule: refresh period must be positive");
    }
    return step > burn_in && (step - burn_in) % refresh_every == 0;
}

void write_selection_csv(const Selection& sel, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_selection_csv: cannot open " + path);
    f.precision(17);
    f << "index,x,t,provenance\n";
    for (int i = 0; i < sel.size(); ++i) {
        f << sel.indices[i] << ',' << sel.points[i].x << ',' << sel.points[i].t
          << ',' << provenance_name(sel.provenance[i]) << '\n';
    }
}

}  // namespace pinnsel
