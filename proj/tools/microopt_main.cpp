// microopt command-line interface: dataset simulation, slice-model training,
// single-scenario optimization, threshold sweeps and the scalar-QoS ablation.
//
// Exit codes: 0 success, 1 any cell failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "microopt/harness.hpp"

using namespace microopt;

namespace {

void bind_options(CLI::App& app, ExperimentConfig& cfg) {
    app.add_option("--seed", cfg.master_seed, "Master seed for every derived stream");
    app.add_option("--out", cfg.out_dir, "Output directory");
    app.add_option("--eval-trials", cfg.eval_trials,
                   "Oracle trials for the measured-degradation column");
    app.add_option("--validation-fraction", cfg.validation_fraction,
                   "Fraction of on-grid rows tagged as validation");

    app.add_option("--oracle.cpu-slope", cfg.oracle.cpu_capacity_slope,
                   "gNB Mbps per millicore");
    app.add_option("--oracle.app-max-rate", cfg.oracle.app_max_rate,
                   "Per-user application rate cap (Mbps)");
    app.add_option("--oracle.noise-base", cfg.oracle.noise_base, "Noise floor (Mbps)");
    app.add_option("--oracle.noise-slope", cfg.oracle.noise_slope, "Noise per Mbps of mean QoS");

    app.add_option("--grid.traffic-min", cfg.grid.traffic_range.lo, "Dataset traffic range low");
    app.add_option("--grid.traffic-max", cfg.grid.traffic_range.hi, "Dataset traffic range high");
    app.add_option("--grid.traffic-step", cfg.grid.traffic_range.step, "Dataset traffic step");
    app.add_option("--grid.bw-min", cfg.grid.bandwidth_range.lo, "Dataset bandwidth range low");
    app.add_option("--grid.bw-max", cfg.grid.bandwidth_range.hi, "Dataset bandwidth range high");
    app.add_option("--grid.bw-step", cfg.grid.bandwidth_range.step, "Dataset bandwidth step");
    app.add_option("--grid.cpu-min", cfg.grid.cpu_range.lo, "Dataset CPU range low");
    app.add_option("--grid.cpu-max", cfg.grid.cpu_range.hi, "Dataset CPU range high");
    app.add_option("--grid.cpu-step", cfg.grid.cpu_range.step, "Dataset CPU step");
    app.add_option("--grid.samples-per-point", cfg.grid.samples_per_point,
                   "Observations per grid point");

    app.add_option("--train.epochs", cfg.train.epochs, "Training epochs");
    app.add_option("--train.learning-rate", cfg.train.learning_rate, "Learning rate");
    app.add_option("--train.lr-decay-epoch", cfg.train.lr_decay_epoch,
                   "Epoch at which the learning rate decays");
    app.add_option("--train.lr-decay-factor", cfg.train.lr_decay_factor, "Decay factor");
    app.add_option("--train.batch-size", cfg.train.batch_size, "Mini-batch size");
    app.add_option("--train.momentum", cfg.train.momentum, "SGD momentum (0 = plain GD)");

    app.add_option("--surrogate.rho", cfg.optimizer.surrogate.rho, "Sigmoid sharpness per Mbps");
    app.add_option("--surrogate.n-mc", cfg.optimizer.surrogate.n_mc,
                   "Monte-Carlo replicates for the surrogate expectation");

    app.add_option("--optimizer.alpha1", cfg.optimizer.alpha1, "Primal step (normalized)");
    app.add_option("--optimizer.alpha2", cfg.optimizer.alpha2, "Lambda step");
    app.add_option("--optimizer.alpha3", cfg.optimizer.alpha3, "Mu step");
    app.add_option("--optimizer.tau1-max", cfg.optimizer.tau1_max, "Outer iteration cap");
    app.add_option("--optimizer.tau2-max", cfg.optimizer.tau2_max, "Inner iteration cap");
    app.add_option("--optimizer.eps1", cfg.optimizer.eps1, "Relative duality-gap tolerance");
    app.add_option("--optimizer.eps2", cfg.optimizer.eps2, "Inner gradient-norm tolerance");
    app.add_option("--optimizer.n-init", cfg.optimizer.n_init, "Random initialization samples");
    app.add_option("--optimizer.n-restarts", cfg.optimizer.n_restarts, "Random restarts");
    app.add_option("--optimizer.nmc-outer", cfg.optimizer.nmc_outer,
                   "Strict replicates for multiplier updates");
    app.add_option("--optimizer.nmc-cert", cfg.optimizer.nmc_cert,
                   "Strict replicates for feasibility certification");
    app.add_option("--optimizer.polish", cfg.optimizer.polish,
                   "Shrink certified incumbents to the constraint boundary");
    app.add_option("--optimizer.polish-margin", cfg.optimizer.polish_margin,
                   "Certification margin kept while polishing");

    app.add_option("--sweep.q-thresh", cfg.sweep.q_thresholds, "QoS thresholds (Mbps)");
    app.add_option("--sweep.beta-thresh", cfg.sweep.beta_thresholds, "Degradation thresholds");
    app.add_option("--sweep.centers", cfg.sweep.traffic_centers, "Traffic centers (users/s)");
    app.add_option("--sweep.peak-traffic", cfg.sweep.peak_traffic, "Peak traffic (users/s)");
    app.add_option("--sweep.tau", cfg.sweep.tau, "Reconfiguration interval (s)");
    app.add_option("--sweep.methods", cfg.sweep.methods,
                   "Methods to run: microopt, grid-optimum, peak-alloc");
    app.add_option("--sweep.include-center-scan", cfg.sweep.include_center_scan,
                   "Run constant traffic at every center");
    app.add_option("--sweep.include-dynamic", cfg.sweep.include_dynamic,
                   "Run truncated-normal traffic scenarios");
    app.add_option("--sweep.dynamic-q-thresh", cfg.sweep.dynamic_q_thresh,
                   "QoS threshold for center/dynamic scenarios");
    app.add_option("--sweep.dynamic-beta-thresh", cfg.sweep.dynamic_beta_thresh,
                   "Degradation threshold for center/dynamic scenarios");

    app.add_option("--peak.q-thresh", cfg.peak.q_thresh, "Peak-alloc QoS threshold");
    app.add_option("--peak.beta-thresh", cfg.peak.beta_thresh,
                   "Peak-alloc degradation threshold");

    app.add_option("--traffic.trace-csv", cfg.traffic.trace_csv,
                   "Measured activity trace (timestamp,activity)");
    app.add_option("--traffic.amplitude", cfg.traffic.amplitude, "Synthetic diurnal amplitude");
    app.add_option("--traffic.noise", cfg.traffic.noise, "Synthetic hourly noise");
    app.add_option("--traffic.peak-users", cfg.traffic.peak_users,
                   "Peak users/s the trace is scaled to");

    app.add_option("--search.cpu-min", cfg.search_grid.cpu_range.lo, "Search grid CPU low");
    app.add_option("--search.cpu-max", cfg.search_grid.cpu_range.hi, "Search grid CPU high");
    app.add_option("--search.cpu-step", cfg.search_grid.cpu_range.step, "Search grid CPU step");
    app.add_option("--search.bw-min", cfg.search_grid.bw_range.lo, "Search grid bandwidth low");
    app.add_option("--search.bw-max", cfg.search_grid.bw_range.hi, "Search grid bandwidth high");
    app.add_option("--search.bw-step", cfg.search_grid.bw_range.step,
                   "Search grid bandwidth step");
    app.add_option("--search.trials", cfg.search_trials, "Oracle trials per searched point");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"microopt: model-driven slice resource optimization toolkit"};
    app.set_config("--config", "", "TOML configuration file");
    app.require_subcommand(1);

    ExperimentConfig cfg;
    bind_options(app, cfg);

    auto* sim = app.add_subcommand("simulate-dataset", "Generate the synthetic QoS dataset");
    auto* trn = app.add_subcommand("train", "Train the slice model on the dataset");
    auto* opt = app.add_subcommand("optimize", "Optimize one scenario with the trained model");
    auto* exp = app.add_subcommand("experiment", "Run the full sweep and baselines");
    auto* abl = app.add_subcommand("ablation", "Run the scalar-QoS ablation variants");

    double opt_q = 5.0, opt_beta = 0.1, opt_center = 5.0, opt_std = 0.0;
    opt->add_option("--q-thresh", opt_q, "QoS threshold (Mbps)");
    opt->add_option("--beta-thresh", opt_beta, "Degradation threshold");
    opt->add_option("--center", opt_center, "Traffic center (users/s)");
    opt->add_option("--std", opt_std, "Traffic standard deviation (0 = constant)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            cmd_simulate_dataset(cfg);
            std::printf("dataset written to %s\n", cfg.out_dir.c_str());
            return 0;
        }
        if (trn->parsed()) {
            cmd_train(cfg);
            std::printf("model written to %s\n", model_path(cfg).c_str());
            return 0;
        }
        if (opt->parsed()) {
            validate_config(cfg);
            ScenarioSpec scenario =
                opt_std > 0.0
                    ? make_tnorm_scenario(cfg, opt_center, opt_std, "cli", opt_q, opt_beta)
                    : make_constant_scenario(cfg, opt_center, opt_q, opt_beta);
            ResultRow row;
            const Solution sol = cmd_optimize(cfg, scenario, &row);
            if (!sol.feasible) {
                std::fprintf(stderr, "optimize: no feasible allocation found\n");
                return 1;
            }
            std::printf("allocation: cpu=%.2f millicores, bw=%.2f Mbps, cost=%.4f, "
                        "measured beta=%.4f\n",
                        row.cpu, row.bw, row.cost, row.measured_beta);
            return 0;
        }
        if (exp->parsed()) {
            const int failures = cmd_experiment(cfg);
            std::printf("results written to %s\n", results_path(cfg).c_str());
            if (failures != 0) {
                std::fprintf(stderr, "experiment finished with failed cells (see summary)\n");
                return 1;
            }
            return 0;
        }
        if (abl->parsed()) {
            const int failures = cmd_ablation(cfg);
            std::printf("ablation rows written to %s\n", ablation_path(cfg).c_str());
            return failures != 0 ? 1 : 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
