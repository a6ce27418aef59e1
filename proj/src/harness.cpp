#include "pinnsel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pinnsel {

const char* method_name(Method m) {
    switch (m) {
        case Method::Uniform: return "uniform";
        case Method::Random: return "random";
        case Method::TopK: return "topk";
        case Method::TopKAnchors: return "topk-anchors";
        case Method::KCenter: return "kcenter";
        case Method::DenseQubo: return "dense-qubo";
        case Method::SparseBqm: return "sparse-bqm";
        case Method::HybridBqm: return "hybrid-bqm";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::Uniform, Method::Random, Method::TopK,
                     Method::TopKAnchors, Method::KCenter, Method::DenseQubo,
                     Method::SparseBqm, Method::HybridBqm}) {
        if (name == method_name(m)) return m;
    }
    throw std::invalid_argument("unknown method: " + name);
}

double rel_l2(std::span<const double> pred, std::span<const double> ref) {
    if (pred.size() != ref.size()) throw std::invalid_argument("rel_l2: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - ref[i];
        num += d * d;
        den += ref[i] * ref[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("rel_l2: zero reference norm");
    return std::sqrt(num / den);
}

double linf_error(std::span<const double> pred, std::span<const double> ref) {
    if (pred.size() != ref.size()) throw std::invalid_argument("linf_error: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        m = std::max(m, std::fabs(pred[i] - ref[i]));
    }
    return m;
}

ResidualStats residual_stats(const MlpParams& params, std::span<const Point> heldout,
                             double nu, int threads) {
    if (heldout.size() < 20) {
        throw std::invalid_argument("residual_stats: need at least 20 held-out points");
    }
    const std::size_t n = heldout.size();
    std::vector<double> sq(n);
    parallel_chunks(n, 512, threads, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i) {
            const double r = residual(params, heldout[i].x, heldout[i].t, nu);
            sq[i] = r * r;
        }
    });
    ResidualStats out;
    out.mean_sq = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(n);
    std::sort(sq.begin(), sq.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(n)));
    out.p95_sq = sq[std::min(rank, n) - 1];
    return out;
}

double overhead_ratio(const TimingBreakdown& timing) {
    if (!(timing.t_train > 0.0)) {
        throw std::invalid_argument("overhead_ratio: training time must be positive");
    }
    return timing.selection_seconds() / timing.t_train;
}

std::optional<double> time_to_accuracy(std::span<const Checkpoint> series,
                                       double epsilon) {
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (series[i].elapsed_seconds < series[i - 1].elapsed_seconds) {
            throw std::invalid_argument("time_to_accuracy: series must be time-ordered");
        }
    }
    for (const auto& c : series) {
        if (c.rel_l2 < epsilon) return c.elapsed_seconds;
    }
    return std::nullopt;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct EvalGrid {
    std::vector<Point> points;
    std::vector<double> ref_values;
};

EvalGrid make_eval_grid(const ReferenceSolution& ref, const BurgersProblem& prob,
                        int nx, int nt) {
    EvalGrid g;
    g.points.reserve(static_cast<std::size_t>(nx) * nt);
    for (int i = 0; i < nx; ++i) {
        const double x = prob.x_lo + (prob.x_hi - prob.x_lo) * i / (nx - 1);
        for (int k = 0; k < nt; ++k) {
            const double t = prob.T * k / (nt - 1);
            g.points.push_back({x, t});
        }
    }
    g.ref_values = sample_reference(ref, g.points);
    return g;
}

void predict(const MlpParams& params, std::span<const Point> pts,
             std::vector<double>& out, int threads) {
    out.resize(pts.size());
    parallel_chunks(pts.size(), 512, threads,
                    [&](std::size_t b, std::size_t e, std::size_t) {
                        for (std::size_t i = b; i < e; ++i) {
                            out[i] = forward_value(params, pts[i].x, pts[i].t);
                        }
                    });
}

struct MethodSelection {
    Selection selection;
    TimingBreakdown timing;
};

MethodSelection select_for_method(const ExperimentConfig& cfg,
                                  const CandidatePool& pool,
                                  const MlpParams& params, std::uint64_t seed) {
    MethodSelection out;
    const int K = cfg.pipeline.budget;
    StopWatch watch;
    switch (cfg.method) {
        case Method::Uniform: {
            out.selection = uniform_select(K, pool.x_lo, pool.x_hi, pool.t_lo,
                                           pool.t_hi, seed);
            break;
        }
        case Method::Random: {
            out.selection = random_select(pool, K, seed);
            break;
        }
        case Method::TopK: {
            const auto scores =
                score_candidates(params, pool, cfg.problem.nu, cfg.threads);
            out.timing.t_score = watch.seconds();
            out.selection = topk_residual(pool, scores, K);
            break;
        }
        case Method::TopKAnchors: {
            const auto scores =
                score_candidates(params, pool, cfg.problem.nu, cfg.threads);
            out.timing.t_score = watch.seconds();
            watch.reset();
            out.selection = topk_with_anchors(pool, scores, K, cfg.pipeline.rho, seed);
            out.timing.t_prefilter = watch.seconds();
            break;
        }
        case Method::KCenter: {
            // Diversity-only baseline; its cost lands in the prefilter bucket.
            const auto metric = auto_length_scales(pool.points, cfg.pipeline.knn_k);
            out.selection = greedy_kcenter(pool, K, metric, seed);
            out.timing.t_prefilter = watch.seconds();
            break;
        }
        case Method::DenseQubo:
        case Method::SparseBqm: {
            PipelineConfig pc = cfg.pipeline;
            pc.form = (cfg.method == Method::DenseQubo) ? QuboForm::DenseKHot
                                                        : QuboForm::SparseSoftK;
            SelectOutcome res = one_shot_select(pool, params, cfg.problem, pc, seed);
            out.selection = std::move(res.selection);
            out.timing = res.timing;
            break;
        }
        case Method::HybridBqm: {
            PipelineConfig pc = cfg.pipeline;
            pc.form = QuboForm::SparseSoftK;
            SelectOutcome res = hybrid_select(pool, params, cfg.problem, pc, seed);
            out.selection = std::move(res.selection);
            out.timing = res.timing;
            break;
        }
    }
    return out;
}

bool method_refreshes(Method m) {
    switch (m) {
        case Method::TopK:
        case Method::TopKAnchors:
        case Method::DenseQubo:
        case Method::SparseBqm:
        case Method::HybridBqm:
            return true;
        default:
            return false;  // parameter-independent selections have nothing to refresh
    }
}

// Fixed IC/BC sets plus the warm-start interior set as the collocation part.
TrainingData make_training_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    const BurgersProblem& prob = cfg.problem;
    TrainingData data;
    Rng ic_rng(Rng::mix(seed, 0x696370 /* "icp" */));
    for (int i = 0; i < cfg.ic_points; ++i) {
        const double x = ic_rng.uniform(prob.x_lo, prob.x_hi);
        data.ic_points.push_back({x, 0.0});
        data.ic_values.push_back(prob.ic(x));
    }
    Rng bc_rng(Rng::mix(seed, 0x626370 /* "bcp" */));
    for (int i = 0; i < cfg.bc_points_per_side; ++i) {
        data.bc_points.push_back({prob.x_lo, bc_rng.uniform(0.0, prob.T)});
        data.bc_values.push_back(prob.bc_lo);
        data.bc_points.push_back({prob.x_hi, bc_rng.uniform(0.0, prob.T)});
        data.bc_values.push_back(prob.bc_hi);
    }
    Rng warm_rng(Rng::mix(seed, 0x7761726d /* "warm" */));
    for (int i = 0; i < cfg.pipeline.warm_points; ++i) {
        data.collocation.push_back({warm_rng.uniform(prob.x_lo, prob.x_hi),
                                    warm_rng.uniform(0.0, prob.T)});
    }
    return data;
}

std::vector<int> make_widths(const ExperimentConfig& cfg) {
    std::vector<int> widths;
    widths.push_back(2);
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);
    return widths;
}

TrainConfig make_train_config(const ExperimentConfig& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.lr_final = cfg.lr_final;
    tc.batch_size = cfg.batch_size;
    tc.steps = cfg.pipeline.warm_steps + cfg.train_steps;  // decay horizon
    tc.record_every = 0;
    tc.threads = cfg.threads;
    return tc;
}

SeedReport run_seed(const ExperimentConfig& cfg, const EvalGrid& grid,
                    std::uint64_t seed) {
    SeedReport report;
    report.seed = seed;
    const BurgersProblem& prob = cfg.problem;

    TrainingData data = make_training_data(cfg, seed);
    const LossWeights weights = cfg.loss_weights;

    Trainer trainer(init_params(make_widths(cfg), Rng::mix(seed, 0x696e6974 /* "init" */)),
                    make_train_config(cfg));

    // Warm-start phase.
    trainer.run(cfg.pipeline.warm_steps, data, weights, prob.nu);
    report.timing.t_warm = trainer.train_seconds();

    // Candidate pool and method-specific selection.
    const CandidatePool pool = sample_pool(cfg.pipeline.pool_size, prob, seed);
    MethodSelection ms = select_for_method(cfg, pool, trainer.params(), seed);
    report.timing += ms.timing;
    report.selection = std::move(ms.selection);
    data.collocation.clear();
    for (const auto& p : report.selection.points) data.collocation.push_back(p);

    // Main training with periodic evaluation checkpoints and optional refresh.
    std::vector<double> pred;
    auto train_seconds_main = [&] {
        return trainer.train_seconds() - report.timing.t_warm;
    };
    auto take_checkpoint = [&](int step) {
        predict(trainer.params(), grid.points, pred, cfg.threads);
        Checkpoint c;
        c.step = step;
        c.elapsed_seconds = report.timing.t_warm + report.timing.selection_seconds() +
                            train_seconds_main();
        c.rel_l2 = rel_l2(pred, grid.ref_values);
        report.checkpoints.push_back(c);
    };

    const bool refreshing = cfg.pipeline.refresh && method_refreshes(cfg.method);
    int step = 0;
    while (step < cfg.train_steps) {
        int next = cfg.train_steps;
        if (cfg.checkpoint_every > 0) {
            next = std::min(next, (step / cfg.checkpoint_every + 1) * cfg.checkpoint_every);
        }
        if (refreshing) {
            const long past = std::max<long>(0, step - cfg.pipeline.burn_in);
            const long next_refresh = cfg.pipeline.burn_in +
                                      (past / cfg.pipeline.refresh_every + 1) *
                                          static_cast<long>(cfg.pipeline.refresh_every);
            next = static_cast<int>(std::min<long>(next, next_refresh));
        }
        trainer.run(next - step, data, weights, prob.nu);
        step = next;

        if (refreshing && step < cfg.train_steps &&
            refresh_schedule(step, cfg.pipeline.burn_in, cfg.pipeline.refresh_every)) {
            MethodSelection fresh = select_for_method(cfg, pool, trainer.params(), seed);
            report.timing += fresh.timing;
            report.selection = std::move(fresh.selection);
            data.collocation.clear();
            for (const auto& p : report.selection.points) data.collocation.push_back(p);
        }
        if (step == cfg.train_steps ||
            (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0)) {
            take_checkpoint(step);
        }
    }
    report.timing.t_train = train_seconds_main();

    // Final metrics.
    predict(trainer.params(), grid.points, pred, cfg.threads);
    report.rel_l2 = rel_l2(pred, grid.ref_values);
    report.linf = linf_error(pred, grid.ref_values);

    Rng held_rng(Rng::mix(seed, 0x68656c64 /* "held" */));
    report.heldout.reserve(cfg.heldout_points);
    for (int i = 0; i < cfg.heldout_points; ++i) {
        report.heldout.push_back({held_rng.uniform(prob.x_lo, prob.x_hi),
                                  held_rng.uniform(0.0, prob.T)});
    }
    const ResidualStats rs =
        residual_stats(trainer.params(), report.heldout, prob.nu, cfg.threads);
    report.res_mean = rs.mean_sq;
    report.res_p95 = rs.p95_sq;
    report.overhead = overhead_ratio(report.timing);
    report.tta = time_to_accuracy(report.checkpoints, cfg.epsilon);
    return report;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / (v.size() - 1));
}

}  // namespace

std::string results_csv_header() {
    return "method,seed,K,rel_l2,linf,res_mean,res_p95,t_warm,t_score,t_prefilter,"
           "t_graph,t_qubo_build,t_qubo_solve,t_repair,t_train,t_total,"
           "overhead_ratio,tta_seconds";
}

std::string results_csv_row(Method method, const std::string& seed_label, int K,
                            const SeedReport& row) {
    std::ostringstream os;
    os << method_name(method) << ',' << seed_label << ',' << K << ','
       << fmt(row.rel_l2) << ',' << fmt(row.linf) << ',' << fmt(row.res_mean) << ','
       << fmt(row.res_p95) << ',' << fmt(row.timing.t_warm) << ','
       << fmt(row.timing.t_score) << ',' << fmt(row.timing.t_prefilter) << ','
       << fmt(row.timing.t_graph) << ',' << fmt(row.timing.t_qubo_build) << ','
       << fmt(row.timing.t_qubo_solve) << ',' << fmt(row.timing.t_repair) << ','
       << fmt(row.timing.t_train) << ',' << fmt(row.timing.total()) << ','
       << fmt(row.overhead) << ',' << (row.tta ? fmt(*row.tta) : "");
    return os.str();
}

double ExperimentResult::mean_rel_l2() const {
    std::vector<double> v;
    for (const auto& s : seeds) v.push_back(s.rel_l2);
    return mean_of(v);
}

double ExperimentResult::mean_tta_censored() const {
    std::vector<double> v;
    for (const auto& s : seeds) v.push_back(s.tta ? *s.tta : s.timing.total());
    return mean_of(v);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const ReferenceSolution* shared_reference) {
    ExperimentResult result;
    result.method = cfg.method;

    ReferenceSolution local_ref;
    const ReferenceSolution* ref = shared_reference;
    if (!ref) {
        local_ref = solve_reference(cfg.problem, cfg.ref_nx, cfg.ref_cfl, cfg.ref_nt);
        ref = &local_ref;
    }
    const EvalGrid grid = make_eval_grid(*ref, cfg.problem, cfg.eval_nx, cfg.eval_nt);

    namespace fs = std::filesystem;
    if (cfg.write_files) fs::create_directories(cfg.out_dir);

    for (std::uint64_t seed : cfg.seeds) {
        try {
            SeedReport report = run_seed(cfg, grid, seed);
            if (cfg.write_files) {
                const std::string tag =
                    std::string(method_name(cfg.method)) + "_seed" + std::to_string(seed);
                std::ofstream ck(cfg.out_dir + "/checkpoints_" + tag + ".csv");
                ck << "step,elapsed_seconds,rel_l2\n";
                for (const auto& c : report.checkpoints) {
                    ck << c.step << ',' << fmt(c.elapsed_seconds) << ',' << fmt(c.rel_l2)
                       << '\n';
                }
                write_selection_csv(report.selection,
                                    cfg.out_dir + "/selection_" + tag + ".csv");
            }
            result.seeds.push_back(std::move(report));
        } catch (const std::exception& ex) {
            result.errors.push_back("seed " + std::to_string(seed) + ": " + ex.what());
        }
    }

    if (cfg.write_files) {
        std::ofstream f(cfg.out_dir + "/results_" + method_name(cfg.method) + ".csv");
        f << results_csv_header() << '\n';
        for (const auto& row : result.seeds) {
            f << results_csv_row(cfg.method, std::to_string(row.seed),
                                 cfg.pipeline.budget, row)
              << '\n';
        }
        // mean/std aggregate rows recomputable from the per-seed rows
        auto collect = [&](auto field) {
            std::vector<double> v;
            for (const auto& s : result.seeds) v.push_back(field(s));
            return v;
        };
        for (const char* label : {"mean", "std"}) {
            const bool is_mean = std::string(label) == "mean";
            auto agg = [&](auto field) {
                const auto v = collect(field);
                return is_mean ? mean_of(v) : std_of(v);
            };
            SeedReport a;
            a.rel_l2 = agg([](const SeedReport& s) { return s.rel_l2; });
            a.linf = agg([](const SeedReport& s) { return s.linf; });
            a.res_mean = agg([](const SeedReport& s) { return s.res_mean; });
            a.res_p95 = agg([](const SeedReport& s) { return s.res_p95; });
            a.timing.t_warm = agg([](const SeedReport& s) { return s.timing.t_warm; });
            a.timing.t_score = agg([](const SeedReport& s) { return s.timing.t_score; });
            a.timing.t_prefilter =
                agg([](const SeedReport& s) { return s.timing.t_prefilter; });
            a.timing.t_graph = agg([](const SeedReport& s) { return s.timing.t_graph; });
            a.timing.t_qubo_build =
                agg([](const SeedReport& s) { return s.timing.t_qubo_build; });
            a.timing.t_qubo_solve =
                agg([](const SeedReport& s) { return s.timing.t_qubo_solve; });
            a.timing.t_repair = agg([](const SeedReport& s) { return s.timing.t_repair; });
            a.timing.t_train = agg([](const SeedReport& s) { return s.timing.t_train; });
            a.overhead = agg([](const SeedReport& s) { return s.overhead; });
            std::vector<double> ttas;
            for (const auto& s : result.seeds) {
                if (s.tta) ttas.push_back(*s.tta);
            }
            if (!ttas.empty()) a.tta = is_mean ? mean_of(ttas) : std_of(ttas);
            std::string row = results_csv_row(cfg.method, label, cfg.pipeline.budget, a);
            // t_total for aggregates is the aggregate of per-seed totals
            f << row << '\n';
        }
        if (!result.errors.empty()) {
            std::ofstream ef(cfg.out_dir + "/errors.txt", std::ios::app);
            for (const auto& e : result.errors) ef << method_name(cfg.method) << ": " << e << '\n';
        }
    }
    return result;
}

SelectionRun run_selection_only(const ExperimentConfig& cfg, std::uint64_t seed) {
    TrainingData data = make_training_data(cfg, seed);
    Trainer trainer(init_params(make_widths(cfg), Rng::mix(seed, 0x696e6974)),
                    make_train_config(cfg));
    trainer.run(cfg.pipeline.warm_steps, data, cfg.loss_weights, cfg.problem.nu);

    SelectionRun out;
    out.timing.t_warm = trainer.train_seconds();
    out.pool = sample_pool(cfg.pipeline.pool_size, cfg.problem, seed);
    MethodSelection ms = select_for_method(cfg, out.pool, trainer.params(), seed);
    out.timing += ms.timing;
    out.selection = std::move(ms.selection);
    out.warm_params = trainer.params();
    return out;
}

AblationAxis parse_ablation_axis(const std::string& name) {
    if (name == "gamma") return AblationAxis::Gamma;
    if (name == "rho") return AblationAxis::Rho;
    if (name == "knn_k") return AblationAxis::KnnK;
    if (name == "refresh") return AblationAxis::Refresh;
    throw std::invalid_argument("unknown ablation axis: " + name);
}

static const char* axis_name(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::Gamma: return "gamma";
        case AblationAxis::Rho: return "rho";
        case AblationAxis::KnnK: return "knn_k";
        case AblationAxis::Refresh: return "refresh";
    }
    return "?";
}

std::vector<AblationRow> run_ablation(AblationAxis axis,
                                      const std::vector<double>& values,
                                      const ExperimentConfig& base) {
    if (values.empty()) throw std::invalid_argument("run_ablation: empty value grid");

    ReferenceSolution ref = solve_reference(base.problem, base.ref_nx, base.ref_cfl,
                                            base.ref_nt);
    std::vector<AblationRow> rows;
    for (double v : values) {
        ExperimentConfig cfg = base;
        switch (axis) {
            case AblationAxis::Gamma:
                cfg.pipeline.weights.gamma = v;
                break;
            case AblationAxis::Rho:
                cfg.pipeline.rho = v;
                break;
            case AblationAxis::KnnK:
                cfg.pipeline.knn_k = static_cast<int>(v);
                break;
            case AblationAxis::Refresh:
                cfg.pipeline.refresh = v > 0;
                if (v > 0) cfg.pipeline.refresh_every = static_cast<int>(v);
                break;
        }
        std::ostringstream sub;
        sub << base.out_dir << '/' << axis_name(axis) << '=' << v;
        cfg.out_dir = sub.str();

        const ExperimentResult res = run_experiment(cfg, &ref);
        AblationRow row;
        row.value = v;
        const bool anchored =
            cfg.method == Method::HybridBqm || cfg.method == Method::TopKAnchors;
        row.k_anchor = anchored ? static_cast<int>(std::floor(
                                      cfg.pipeline.rho * cfg.pipeline.budget + 1e-9))
                                : 0;
        std::vector<double> rl2, linf, ovh, tta, ttot;
        for (const auto& s : res.seeds) {
            rl2.push_back(s.rel_l2);
            linf.push_back(s.linf);
            ovh.push_back(s.overhead);
            ttot.push_back(s.timing.total());
            if (s.tta) tta.push_back(*s.tta);
        }
        row.rel_l2_mean = mean_of(rl2);
        row.rel_l2_std = std_of(rl2);
        row.linf_mean = mean_of(linf);
        row.overhead_mean = mean_of(ovh);
        row.tta_mean = mean_of(tta);
        row.t_total_mean = mean_of(ttot);
        rows.push_back(row);
    }

    if (base.write_files) {
        std::filesystem::create_directories(base.out_dir);
        std::ofstream f(base.out_dir + "/ablation_" + axis_name(axis) + ".csv");
        f << "axis,value,k_anchor,rel_l2_mean,rel_l2_std,linf_mean,overhead_mean,"
             "tta_mean,t_total_mean\n";
        for (const auto& r : rows) {
            f << axis_name(axis) << ',' << fmt(r.value) << ',' << r.k_anchor << ','
              << fmt(r.rel_l2_mean) << ',' << fmt(r.rel_l2_std) << ','
              << fmt(r.linf_mean) << ',' << fmt(r.overhead_mean) << ','
              << fmt(r.tta_mean) << ',' << fmt(r.t_total_mean) << '\n';
        }
    }
    return rows;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value) {
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };

    if (key == "nu") cfg.problem.nu = as_double();
    else if (key == "T") cfg.problem.T = as_double();
    else if (key == "method") cfg.method = parse_method(value);
    else if (key == "N" || key == "pool_size") cfg.pipeline.pool_size = as_int();
    else if (key == "M" || key == "working_size") cfg.pipeline.scoring.prefilter_size = as_int();
    else if (key == "K" || key == "budget") cfg.pipeline.budget = as_int();
    else if (key == "beta") cfg.pipeline.scoring.beta = as_double();
    else if (key == "rho") cfg.pipeline.rho = as_double();
    else if (key == "knn_k") cfg.pipeline.knn_k = as_int();
    else if (key == "ell_x") cfg.pipeline.ell_x = as_double();
    else if (key == "ell_t") cfg.pipeline.ell_t = as_double();
    else if (key == "alpha") cfg.pipeline.weights.alpha = as_double();
    else if (key == "gamma") cfg.pipeline.weights.gamma = as_double();
    else if (key == "lambda_card") cfg.pipeline.weights.lambda_card = as_double();
    else if (key == "clip_quantile") cfg.pipeline.scoring.clip_quantile = as_double();
    else if (key == "norm_mode") {
        if (value == "minmax") cfg.pipeline.scoring.mode = NormalizationMode::MinMaxClip;
        else if (value == "robust") cfg.pipeline.scoring.mode = NormalizationMode::RobustQuantile;
        else throw std::invalid_argument("norm_mode must be minmax or robust");
    } else if (key == "mu_mode") {
        if (value == "heuristic") cfg.pipeline.mu_mode = MuMode::Heuristic;
        else if (value == "search") cfg.pipeline.mu_mode = MuMode::Search;
        else throw std::invalid_argument("mu_mode must be heuristic or search");
    } else if (key == "sa_sweeps") cfg.pipeline.sa.sweeps = as_int();
    else if (key == "sa_restarts") cfg.pipeline.sa.restarts = as_int();
    else if (key == "sa_beta_init") cfg.pipeline.sa.beta_init = as_double();
    else if (key == "sa_beta_final") cfg.pipeline.sa.beta_final = as_double();
    else if (key == "warm_steps") cfg.pipeline.warm_steps = as_int();
    else if (key == "warm_points") cfg.pipeline.warm_points = as_int();
    else if (key == "refresh") cfg.pipeline.refresh = as_int() != 0;
    else if (key == "refresh_every") cfg.pipeline.refresh_every = as_int();
    else if (key == "burn_in") cfg.pipeline.burn_in = as_int();
    else if (key == "train_steps") cfg.train_steps = as_int();
    else if (key == "seeds") {
        cfg.seeds.clear();
        for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
        if (cfg.seeds.empty()) throw std::invalid_argument("seeds: need at least one");
    } else if (key == "hidden") {
        cfg.hidden.clear();
        for (const auto& s : split_list(value)) cfg.hidden.push_back(std::stoi(s));
    } else if (key == "eval_nx") cfg.eval_nx = as_int();
    else if (key == "eval_nt") cfg.eval_nt = as_int();
    else if (key == "heldout_points") cfg.heldout_points = as_int();
    else if (key == "checkpoint_every") cfg.checkpoint_every = as_int();
    else if (key == "epsilon") cfg.epsilon = as_double();
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "learning_rate") cfg.learning_rate = as_double();
    else if (key == "lr_final") cfg.lr_final = as_double();
    else if (key == "batch_size") cfg.batch_size = as_int();
    else if (key == "lambda_ic") cfg.loss_weights.lambda_ic = as_double();
    else if (key == "lambda_bc") cfg.loss_weights.lambda_bc = as_double();
    else if (key == "lambda_pde") cfg.loss_weights.lambda_pde = as_double();
    else if (key == "ic_points") cfg.ic_points = as_int();
    else if (key == "bc_points_per_side") cfg.bc_points_per_side = as_int();
    else if (key == "threads") cfg.threads = as_int();
    else if (key == "ref_nx") cfg.ref_nx = as_int();
    else if (key == "ref_nt") cfg.ref_nt = as_int();
    else if (key == "ref_cfl") cfg.ref_cfl = as_double();
    else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("parse_config_file: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("parse_config_file: line " + std::to_string(lineno) +
                                     " is not key = value");
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace pinnsel
