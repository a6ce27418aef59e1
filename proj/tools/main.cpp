// Command-line front end: reference solves, full experiments, ablations, and
// selection-only runs with optional debug dumps.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pinnsel/harness.hpp"

namespace {

pinnsel::ExperimentConfig load_config(const std::string& path,
                                      const std::vector<std::string>& overrides) {
    pinnsel::ExperimentConfig cfg =
        path.empty() ? pinnsel::ExperimentConfig{} : pinnsel::parse_config_file(path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        }
        pinnsel::apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diversity-aware collocation selection for Burgers PINNs"};
    app.require_subcommand(1);

    // reference
    auto* ref_cmd = app.add_subcommand("reference", "Solve and store the reference solution");
    double ref_nu = 0.01 / pinnsel::kPi, ref_T = 1.0, ref_cfl = 0.5;
    int ref_nx = 1024, ref_nt = 101;
    std::string ref_out = "reference.csv";
    ref_cmd->add_option("--nu", ref_nu, "viscosity");
    ref_cmd->add_option("--T", ref_T, "final time");
    ref_cmd->add_option("--nx", ref_nx, "spatial nodes");
    ref_cmd->add_option("--nt", ref_nt, "stored time slices");
    ref_cmd->add_option("--cfl", ref_cfl, "CFL safety factor");
    ref_cmd->add_option("--out", ref_out, "output CSV path")->required();

    // shared experiment-style options
    std::string config_path, method_override, seeds_override, out_override;
    std::vector<std::string> overrides;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key = value config file");
        cmd->add_option("--method", method_override, "selection method id");
        cmd->add_option("--seeds", seeds_override, "comma-separated seed list");
        cmd->add_option("--out", out_override, "output directory");
        cmd->add_option("--set", overrides, "extra key=value overrides")->take_all();
    };

    auto* exp_cmd = app.add_subcommand("experiment", "Run the full per-seed protocol");
    add_common(exp_cmd);

    auto* abl_cmd = app.add_subcommand("ablate", "Sweep one axis and aggregate");
    std::string axis_name;
    std::string values_csv;
    abl_cmd->add_option("--axis", axis_name, "gamma | rho | knn_k | refresh")->required();
    abl_cmd->add_option("--values", values_csv, "comma-separated value grid")->required();
    add_common(abl_cmd);

    auto* sel_cmd = app.add_subcommand("select", "Selection only, no main training");
    std::string dump_points, dump_graph, dump_bqm;
    std::uint64_t sel_seed = 1;
    sel_cmd->add_option("--seed", sel_seed, "seed");
    sel_cmd->add_option("--dump-points", dump_points, "selection CSV path")->required();
    sel_cmd->add_option("--dump-graph", dump_graph, "working-set kNN edge list CSV");
    sel_cmd->add_option("--dump-bqm", dump_bqm, "BQM dump path prefix");
    add_common(sel_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ref_cmd) {
            pinnsel::BurgersProblem problem;
            problem.nu = ref_nu;
            problem.T = ref_T;
            const auto sol = pinnsel::solve_reference(problem, ref_nx, ref_cfl, ref_nt);
            pinnsel::write_reference_csv(sol, ref_out);
            std::cout << "reference: nx=" << sol.nx() << " nt=" << sol.nt() << " -> "
                      << ref_out << "\n";
            return 0;
        }

        pinnsel::ExperimentConfig cfg = load_config(config_path, overrides);
        if (!method_override.empty()) cfg.method = pinnsel::parse_method(method_override);
        if (!seeds_override.empty()) pinnsel::apply_config_line(cfg, "seeds", seeds_override);
        if (!out_override.empty()) cfg.out_dir = out_override;

        if (*exp_cmd) {
            const auto result = pinnsel::run_experiment(cfg);
            std::cout << "method=" << pinnsel::method_name(cfg.method)
                      << " seeds=" << result.seeds.size()
                      << " mean_rel_l2=" << result.mean_rel_l2() << "\n";
            for (const auto& err : result.errors) std::cerr << "error: " << err << "\n";
            std::cout << "results in " << cfg.out_dir << "\n";
            return result.errors.empty() ? 0 : 1;
        }

        if (*abl_cmd) {
            std::vector<double> values;
            std::stringstream ss(values_csv);
            std::string item;
            while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
            const auto rows =
                pinnsel::run_ablation(pinnsel::parse_ablation_axis(axis_name), values, cfg);
            for (const auto& r : rows) {
                std::cout << axis_name << '=' << r.value << " k_anchor=" << r.k_anchor
                          << " rel_l2=" << r.rel_l2_mean << " +- " << r.rel_l2_std << "\n";
            }
            return 0;
        }

        if (*sel_cmd) {
            const auto run = pinnsel::run_selection_only(cfg, sel_seed);
            pinnsel::write_selection_csv(run.selection, dump_points);
            std::cout << "selected " << run.selection.size() << " points -> "
                      << dump_points << "\n";
            if (!dump_graph.empty() || !dump_bqm.empty()) {
                // Rebuild the working set the pipeline saw for inspection.
                const auto raw = pinnsel::score_candidates(run.warm_params, run.pool,
                                                           cfg.problem.nu, cfg.threads);
                const auto norm = pinnsel::normalize_scores(raw, cfg.pipeline.scoring);
                auto scoring = cfg.pipeline.scoring;
                scoring.prefilter_size = std::min(scoring.prefilter_size, run.pool.size());
                const auto working =
                    pinnsel::prefilter(run.pool, norm, scoring, sel_seed);
                std::vector<pinnsel::Point> wpts;
                std::vector<double> wscores;
                for (int idx : working) {
                    wpts.push_back(run.pool.points[idx]);
                    wscores.push_back(norm[idx]);
                }
                auto sim = (cfg.pipeline.ell_x > 0 && cfg.pipeline.ell_t > 0)
                               ? pinnsel::SimilarityConfig{cfg.pipeline.ell_x,
                                                           cfg.pipeline.ell_t,
                                                           cfg.pipeline.knn_k}
                               : pinnsel::auto_length_scales(wpts, cfg.pipeline.knn_k);
                const auto graph = pinnsel::build_knn_graph(wpts, sim);
                if (!dump_graph.empty()) {
                    pinnsel::write_graph_csv(graph, dump_graph);
                    std::cout << "graph: " << graph.edge_count() << " edges -> "
                              << dump_graph << "\n";
                }
                if (!dump_bqm.empty()) {
                    auto weights = cfg.pipeline.weights;
                    weights.mu = pinnsel::calibrate_mu(
                        wscores, cfg.pipeline.budget, static_cast<int>(wscores.size()),
                        cfg.pipeline.mu_mode, weights.alpha, &cfg.pipeline.sa);
                    const auto model = pinnsel::build_sparse_bqm(wscores, graph, weights);
                    pinnsel::write_bqm_csv(model, dump_bqm);
                    std::cout << "bqm: " << model.n << " variables -> " << dump_bqm
                              << "_{linear,quadratic}.csv\n";
                }
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
