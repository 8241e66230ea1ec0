#include "microopt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "microopt/mathutil.hpp"
#include "microopt/rng.hpp"

namespace fs = std::filesystem;

namespace microopt {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ConfigError(what + " not found: " + path + " (run the producing subcommand first)");
    }
}

double clock_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::string dataset_csv_path(const ExperimentConfig& cfg, Split split) {
    return cfg.out_dir + "/dataset_" + split_name(split) + ".csv";
}
std::string manifest_path(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/dataset_manifest.json";
}
std::string model_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/model.json"; }
std::string metrics_path(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/train_metrics.csv";
}
std::string results_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/results.csv"; }
std::string summary_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/summary.json"; }
std::string ablation_path(const ExperimentConfig& cfg) { return cfg.out_dir + "/ablation.csv"; }
std::string trace_path(const ExperimentConfig& cfg) {
    return cfg.out_dir + "/synthetic_trace.csv";
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.sweep.q_thresholds.empty() || cfg.sweep.beta_thresholds.empty()) {
        throw ConfigError("sweep threshold sets must be nonempty");
    }
    if (cfg.sweep.traffic_centers.empty()) {
        throw ConfigError("sweep traffic centers must be nonempty");
    }
    for (double q : cfg.sweep.q_thresholds) {
        if (!(q > 0.0)) throw ConfigError("q_thresh values must be positive");
    }
    for (double b : cfg.sweep.beta_thresholds) {
        if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta_thresh values must lie in [0,1]");
    }
    if (!(cfg.sweep.peak_traffic > 0.0)) throw ConfigError("peak traffic must be positive");
    if (cfg.sweep.tau < 1) throw ConfigError("tau must be at least 1 second");
    if (cfg.sweep.methods.empty()) throw ConfigError("methods must be nonempty");
    for (const auto& m : cfg.sweep.methods) {
        if (m != "microopt" && m != "grid-optimum" && m != "peak-alloc") {
            throw ConfigError("unknown method '" + m + "'");
        }
    }
    if (!(cfg.oracle.cpu_capacity_slope > 0.0) || !(cfg.oracle.app_max_rate > 0.0)) {
        throw ConfigError("oracle slope and app_max_rate must be positive");
    }
    if (cfg.oracle.noise_base < 0.0 || cfg.oracle.noise_slope < 0.0) {
        throw ConfigError("oracle noise parameters must be nonnegative");
    }
    for (double q : cfg.sweep.q_thresholds) {
        if (q >= cfg.oracle.app_max_rate) {
            throw ConfigError("app_max_rate must exceed every q_thresh in use");
        }
    }
    if (cfg.search_trials < 1 || cfg.eval_trials < 1) {
        throw ConfigError("trial counts must be positive");
    }
    if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
        throw ConfigError("validation fraction must lie in (0,1)");
    }
    if (!cfg.traffic.trace_csv.empty() && !fs::exists(cfg.traffic.trace_csv)) {
        throw ConfigError("trace file not found: " + cfg.traffic.trace_csv);
    }
}

void cmd_simulate_dataset(const ExperimentConfig& cfg) {
    validate_config(cfg);
    fs::create_directories(cfg.out_dir);
    const std::uint64_t seed = derive_seed(cfg.master_seed, "dataset");
    const QoSDataset ds =
        generate_grid_dataset(cfg.grid, cfg.oracle, seed, cfg.validation_fraction);
    for (Split split : {Split::Train, Split::Validation, Split::Test}) {
        write_dataset_csv(ds, split, dataset_csv_path(cfg, split));
    }

    const std::size_t nx = cfg.grid.traffic_range.points().size();
    const std::size_t ncpu = cfg.grid.cpu_range.points().size();
    const std::size_t nbw = cfg.grid.bandwidth_range.points().size();
    nlohmann::json manifest;
    manifest["master_seed"] = cfg.master_seed;
    manifest["dataset_seed"] = seed;
    manifest["grid"] = {{"traffic_points", nx},
                        {"cpu_points", ncpu},
                        {"bandwidth_points", nbw},
                        {"samples_per_point", cfg.grid.samples_per_point},
                        {"train_pool_rows", nx * ncpu * nbw * cfg.grid.samples_per_point}};
    manifest["oracle"] = {{"cpu_capacity_slope", cfg.oracle.cpu_capacity_slope},
                          {"app_max_rate", cfg.oracle.app_max_rate},
                          {"noise_base", cfg.oracle.noise_base},
                          {"noise_slope", cfg.oracle.noise_slope}};
    manifest["rows"] = {{"train", ds.count(Split::Train)},
                        {"validation", ds.count(Split::Validation)},
                        {"test", ds.count(Split::Test)}};
    manifest["files"] = {{"train", dataset_csv_path(cfg, Split::Train)},
                         {"validation", dataset_csv_path(cfg, Split::Validation)},
                         {"test", dataset_csv_path(cfg, Split::Test)}};
    std::ofstream out(manifest_path(cfg));
    if (!out) throw std::runtime_error("cannot open for writing: " + manifest_path(cfg));
    out << manifest.dump(2) << "\n";
}

void cmd_train(const ExperimentConfig& cfg) {
    validate_config(cfg);
    for (Split split : {Split::Train, Split::Validation, Split::Test}) {
        require_file(dataset_csv_path(cfg, split), "dataset split");
    }
    const QoSDataset ds = read_dataset_csv({dataset_csv_path(cfg, Split::Train),
                                            dataset_csv_path(cfg, Split::Validation),
                                            dataset_csv_path(cfg, Split::Test)});

    SliceModel model = init_model(cfg.arch, derive_seed(cfg.master_seed, "model-init"));
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.master_seed, "train");
    train(model, ds, tc);
    export_model(model, model_path(cfg));

    std::ofstream out(metrics_path(cfg));
    if (!out) throw std::runtime_error("cannot open for writing: " + metrics_path(cfg));
    out << "epoch,learning_rate,train_nll,train_mse,val_nll,val_mse\n";
    char buf[200];
    for (const auto& em : model.history) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g\n", em.epoch,
                      em.learning_rate, em.train_nll, em.train_mse, em.val_nll, em.val_mse);
        out << buf;
    }
}

namespace {

TrafficSeries scenario_series_constant(const ExperimentConfig& cfg, double center) {
    return TrafficSeries::constant(center, cfg.sweep.tau);
}

} // namespace

ScenarioSpec make_constant_scenario(const ExperimentConfig& cfg, double center, double q_thresh,
                                    double beta_thresh) {
    ScenarioSpec s;
    s.id = "const-x" + num(center);
    s.descriptor = "const(" + num(center) + ")";
    s.series = scenario_series_constant(cfg, center);
    s.q_thresh = q_thresh;
    s.beta_thresh = beta_thresh;
    return s;
}

ScenarioSpec make_tnorm_scenario(const ExperimentConfig& cfg, double center, double sd,
                                 const std::string& tag, double q_thresh, double beta_thresh) {
    ScenarioSpec s;
    s.id = "tnorm-c" + num(center) + "-" + tag;
    s.descriptor = "tnorm(c=" + num(center) + ",sd=" + fmt("%.4g", sd) + ")";
    TrafficDistribution dist{center, sd};
    s.series = sample_traffic_series(dist, cfg.sweep.tau,
                                     derive_seed(cfg.master_seed, "scenario/" + s.id));
    s.q_thresh = q_thresh;
    s.beta_thresh = beta_thresh;
    return s;
}

TraceStats experiment_trace_stats(const ExperimentConfig& cfg) {
    if (!cfg.traffic.trace_csv.empty()) {
        return ingest_trace_csv(cfg.traffic.trace_csv, cfg.traffic.peak_users);
    }
    fs::create_directories(cfg.out_dir);
    const auto trace = synth_weekly_trace(derive_seed(cfg.master_seed, "trace"),
                                          cfg.traffic.amplitude, cfg.traffic.noise);
    write_trace_csv(trace, trace_path(cfg));
    return ingest_trace_csv(trace_path(cfg), cfg.traffic.peak_users);
}

namespace {

struct CellContext {
    const ExperimentConfig& cfg;
    const SliceModel& model;
    const ResourceVector* peak_allocation; // null when peak-alloc is unavailable
};

std::uint64_t cell_seed(const ExperimentConfig& cfg, const std::string& method,
                        const ScenarioSpec& scenario) {
    return derive_seed(cfg.master_seed, "cell/" + method + "/" + scenario.id + "/q" +
                                            num(scenario.q_thresh) + "/b" +
                                            num(scenario.beta_thresh));
}

double model_strict_beta(const SliceModel& model, const ScenarioSpec& scenario,
                         const ResourceVector& r, int n_mc, std::uint64_t seed) {
    const auto panel =
        make_epsilon_panel(n_mc, static_cast<int>(scenario.series.tau()), seed);
    return expected_beta_value(model, scenario.series, r, scenario.q_thresh, 1.0,
                               BetaMode::Strict, panel);
}

double measured_beta(const ExperimentConfig& cfg, const ScenarioSpec& scenario,
                     const ResourceVector& r, std::uint64_t seed) {
    SlaSpec sla;
    sla.q_thresh = scenario.q_thresh;
    sla.beta_thresh = scenario.beta_thresh;
    return evaluate_allocation(scenario.series, r, sla, cfg.oracle, cfg.eval_trials, seed);
}

ResultRow finish_row(const CellContext& ctx, const ScenarioSpec& scenario,
                     const std::string& method, const ResourceVector& r, std::uint64_t seed,
                     double runtime_s) {
    ResultRow row;
    row.method = method;
    row.variant = "full";
    row.scenario = scenario.id;
    row.q_thresh = scenario.q_thresh;
    row.beta_thresh = scenario.beta_thresh;
    row.traffic = scenario.descriptor;
    row.cpu = r.cpu_millicores();
    row.bw = r.bandwidth_mbps();
    row.cost = normalized_cost(CostWeights(), r);
    row.model_beta = model_strict_beta(ctx.model, scenario, r, ctx.cfg.optimizer.nmc_cert,
                                       derive_seed(seed, "model-beta"));
    row.measured_beta = measured_beta(ctx.cfg, scenario, r, derive_seed(seed, "measure"));
    row.runtime_s = runtime_s;
    row.seed = seed;
    return row;
}

ResultRow run_microopt_cell(const CellContext& ctx, const ScenarioSpec& scenario) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = cell_seed(ctx.cfg, "microopt", scenario);

    Problem problem;
    problem.slices.push_back({&ctx.model, scenario.series,
                              SlaSpec{scenario.q_thresh, scenario.beta_thresh, CostWeights()}});
    OptimizerConfig oc = ctx.cfg.optimizer;
    oc.seed = seed;
    const Solution sol = optimize(problem, oc);
    if (!sol.feasible) {
        throw std::runtime_error("microopt found no feasible allocation for " + scenario.id);
    }
    ResultRow row = finish_row(ctx, scenario, "microopt", sol.allocations[0], seed,
                               clock_seconds(t0));
    row.model_beta = sol.certified_beta[0];
    return row;
}

ResultRow run_grid_optimum_cell(const CellContext& ctx, const ScenarioSpec& scenario) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = cell_seed(ctx.cfg, "grid-optimum", scenario);
    const auto evaluator =
        make_oracle_evaluator(ctx.cfg.oracle, ctx.cfg.search_trials, derive_seed(seed, "search"));
    SlaSpec sla{scenario.q_thresh, scenario.beta_thresh, CostWeights()};
    const ResourceVector r =
        grid_optimum(evaluator, scenario.series, ctx.cfg.search_grid, sla, CostWeights());
    return finish_row(ctx, scenario, "grid-optimum", r, seed, clock_seconds(t0));
}

ResultRow run_peak_alloc_cell(const CellContext& ctx, const ScenarioSpec& scenario) {
    if (ctx.peak_allocation == nullptr) {
        throw std::runtime_error("peak allocation unavailable for " + scenario.id);
    }
    const std::uint64_t seed = cell_seed(ctx.cfg, "peak-alloc", scenario);
    return finish_row(ctx, scenario, "peak-alloc", *ctx.peak_allocation, seed, 0.0);
}

} // namespace

Solution cmd_optimize(const ExperimentConfig& cfg, const ScenarioSpec& scenario,
                      ResultRow* row_out) {
    validate_config(cfg);
    require_file(model_path(cfg), "model file");
    const SliceModel model = import_model(model_path(cfg));
    fs::create_directories(cfg.out_dir);

    const std::uint64_t seed = cell_seed(cfg, "microopt", scenario);
    Problem problem;
    problem.slices.push_back({&model, scenario.series,
                              SlaSpec{scenario.q_thresh, scenario.beta_thresh, CostWeights()}});
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol = optimize(problem, oc);

    const std::string tag =
        scenario.id + "-q" + num(scenario.q_thresh) + "-b" + num(scenario.beta_thresh);
    write_solution_json(sol, oc, cfg.out_dir + "/solution-" + tag + ".json");

    if (sol.feasible) {
        CellContext ctx{cfg, model, nullptr};
        ResultRow row =
            finish_row(ctx, scenario, "microopt", sol.allocations[0], seed, clock_seconds(t0));
        row.model_beta = sol.certified_beta[0];
        write_results_csv({row}, cfg.out_dir + "/optimize-" + tag + ".csv");
        if (row_out) *row_out = row;
    }
    return sol;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path,
                       bool with_variant) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "method,";
    if (with_variant) out << "variant,";
    out << "scenario,q_thresh,beta_thresh,traffic,cpu_millicores,bw_mbps,cost,model_beta,"
           "measured_beta,seed\n";
    char buf[256];
    for (const auto& r : rows) {
        out << r.method << ',';
        if (with_variant) out << r.variant << ',';
        std::snprintf(buf, sizeof(buf), "%s,%.4g,%.4g,%s,%.4f,%.4f,%.6f,%.6f,%.6f,%llu\n",
                      r.scenario.c_str(), r.q_thresh, r.beta_thresh, r.traffic.c_str(), r.cpu,
                      r.bw, r.cost, r.model_beta, r.measured_beta,
                      static_cast<unsigned long long>(r.seed));
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    bool with_variant = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            with_variant = line.rfind("method,variant,", 0) == 0;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        ResultRow r;
        auto next = [&]() {
            if (!std::getline(ss, field, ',')) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": short row");
            }
            return field;
        };
        r.method = next();
        if (with_variant) r.variant = next();
        r.scenario = next();
        r.q_thresh = std::stod(next());
        r.beta_thresh = std::stod(next());
        r.traffic = next();
        r.cpu = std::stod(next());
        r.bw = std::stod(next());
        r.cost = std::stod(next());
        r.model_beta = std::stod(next());
        r.measured_beta = std::stod(next());
        r.seed = std::stoull(next());
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

void sort_rows(std::vector<ResultRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.scenario != b.scenario) return a.scenario < b.scenario;
        if (a.q_thresh != b.q_thresh) return a.q_thresh < b.q_thresh;
        if (a.beta_thresh != b.beta_thresh) return a.beta_thresh < b.beta_thresh;
        if (a.method != b.method) return a.method < b.method;
        return a.variant < b.variant;
    });
}

nlohmann::json aggregate_summary(const ExperimentConfig& cfg,
                                 const std::vector<ResultRow>& rows) {
    nlohmann::json summary;
    // constant-sweep aggregates per method
    const std::string sweep_scenario = "const-x" + num(cfg.sweep.peak_traffic);
    auto mean_over = [&](const std::string& method, auto pred, auto field) {
        double acc = 0.0;
        int n = 0;
        for (const auto& r : rows) {
            if (r.method != method || r.scenario != sweep_scenario) continue;
            if (!pred(r)) continue;
            acc += field(r);
            ++n;
        }
        return n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN();
    };

    nlohmann::json per_method;
    for (const auto& method : cfg.sweep.methods) {
        nlohmann::json m;
        m["mean_cost"] = mean_over(method, [](const ResultRow&) { return true; },
                                   [](const ResultRow& r) { return r.cost; });
        m["mean_measured_beta"] = mean_over(method, [](const ResultRow&) { return true; },
                                            [](const ResultRow& r) { return r.measured_beta; });
        nlohmann::json by_beta = nlohmann::json::object();
        for (double b : cfg.sweep.beta_thresholds) {
            by_beta[num(b)] =
                mean_over(method, [b](const ResultRow& r) { return r.beta_thresh == b; },
                          [](const ResultRow& r) { return r.cost; });
        }
        m["mean_cost_by_beta_thresh"] = by_beta;
        nlohmann::json by_q = nlohmann::json::object();
        for (double q : cfg.sweep.q_thresholds) {
            by_q[num(q)] = mean_over(method, [q](const ResultRow& r) { return r.q_thresh == q; },
                                     [](const ResultRow& r) { return r.cost; });
        }
        m["mean_cost_by_q_thresh"] = by_q;
        per_method[method] = m;
    }
    summary["constant_sweep"] = per_method;

    // savings vs peak-alloc over the constant sweep
    if (per_method.contains("peak-alloc") && per_method.contains("microopt")) {
        const double peak = per_method["peak-alloc"]["mean_cost"].get<double>();
        const double micro = per_method["microopt"]["mean_cost"].get<double>();
        if (std::isfinite(peak) && peak > 0.0 && std::isfinite(micro)) {
            summary["microopt_savings_vs_peak_alloc"] = 1.0 - micro / peak;
        }
    }

    // dynamic-traffic aggregates: per-center cost for each spread tag
    nlohmann::json dynamic = nlohmann::json::object();
    for (const auto& r : rows) {
        if (r.method != "microopt" || r.scenario.rfind("tnorm-", 0) != 0) continue;
        dynamic[r.scenario] = {{"cost", r.cost}, {"measured_beta", r.measured_beta}};
    }
    if (!dynamic.empty()) summary["dynamic_traffic"] = dynamic;
    return summary;
}

} // namespace

int cmd_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    require_file(model_path(cfg), "model file");
    const SliceModel model = import_model(model_path(cfg));
    fs::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::string> errors;
    const bool want_micro = std::count(cfg.sweep.methods.begin(), cfg.sweep.methods.end(),
                                       std::string("microopt")) > 0;
    const bool want_grid = std::count(cfg.sweep.methods.begin(), cfg.sweep.methods.end(),
                                      std::string("grid-optimum")) > 0;
    const bool want_peak = std::count(cfg.sweep.methods.begin(), cfg.sweep.methods.end(),
                                      std::string("peak-alloc")) > 0;

    // the static peak allocation is computed once, at peak traffic
    ResourceVector peak_allocation;
    bool have_peak = false;
    if (want_peak) {
        try {
            const std::uint64_t seed = derive_seed(cfg.master_seed, "peak-alloc");
            const auto evaluator =
                make_oracle_evaluator(cfg.oracle, cfg.search_trials, derive_seed(seed, "search"));
            SlaSpec sla{cfg.peak.q_thresh, cfg.peak.beta_thresh, CostWeights()};
            peak_allocation = peak_alloc(evaluator, cfg.sweep.peak_traffic, cfg.search_grid, sla,
                                         CostWeights(), cfg.sweep.tau);
            have_peak = true;
        } catch (const std::exception& e) {
            errors.push_back(std::string("peak-alloc: ") + e.what());
        }
    }

    CellContext ctx{cfg, model, have_peak ? &peak_allocation : nullptr};

    std::vector<ScenarioSpec> scenarios;
    for (double q : cfg.sweep.q_thresholds) {
        for (double b : cfg.sweep.beta_thresholds) {
            scenarios.push_back(make_constant_scenario(cfg, cfg.sweep.peak_traffic, q, b));
        }
    }
    std::vector<ScenarioSpec> center_scenarios;
    if (cfg.sweep.include_center_scan) {
        for (double c : cfg.sweep.traffic_centers) {
            if (c == cfg.sweep.peak_traffic) continue; // covered by the sweep cell
            center_scenarios.push_back(make_constant_scenario(
                cfg, c, cfg.sweep.dynamic_q_thresh, cfg.sweep.dynamic_beta_thresh));
        }
    }
    std::vector<ScenarioSpec> dynamic_scenarios;
    if (cfg.sweep.include_dynamic) {
        const TraceStats stats = experiment_trace_stats(cfg);
        for (double c : cfg.sweep.traffic_centers) {
            dynamic_scenarios.push_back(
                make_tnorm_scenario(cfg, c, stats.sigma_mean, "smean",
                                    cfg.sweep.dynamic_q_thresh, cfg.sweep.dynamic_beta_thresh));
            dynamic_scenarios.push_back(
                make_tnorm_scenario(cfg, c, stats.sigma_max, "smax",
                                    cfg.sweep.dynamic_q_thresh, cfg.sweep.dynamic_beta_thresh));
        }
    }

    std::vector<ResultRow> rows;
    auto run_cell = [&](const char* method, const ScenarioSpec& scenario, auto&& fn) {
        try {
            rows.push_back(fn());
        } catch (const std::exception& e) {
            errors.push_back(std::string(method) + "/" + scenario.id + "/q" +
                             num(scenario.q_thresh) + "/b" + num(scenario.beta_thresh) + ": " +
                             e.what());
        }
    };

    for (const auto& scenario : scenarios) {
        if (want_micro) {
            run_cell("microopt", scenario, [&] { return run_microopt_cell(ctx, scenario); });
        }
        if (want_grid) {
            run_cell("grid-optimum", scenario,
                     [&] { return run_grid_optimum_cell(ctx, scenario); });
        }
        if (want_peak && have_peak) {
            run_cell("peak-alloc", scenario, [&] { return run_peak_alloc_cell(ctx, scenario); });
        }
    }
    for (const auto& scenario : center_scenarios) {
        if (want_micro) {
            run_cell("microopt", scenario, [&] { return run_microopt_cell(ctx, scenario); });
        }
        if (want_peak && have_peak) {
            run_cell("peak-alloc", scenario, [&] { return run_peak_alloc_cell(ctx, scenario); });
        }
    }
    for (const auto& scenario : dynamic_scenarios) {
        if (want_micro) {
            run_cell("microopt", scenario, [&] { return run_microopt_cell(ctx, scenario); });
        }
    }

    sort_rows(rows);
    write_results_csv(rows, results_path(cfg));

    nlohmann::json summary = aggregate_summary(cfg, rows);
    summary["master_seed"] = cfg.master_seed;
    summary["row_count"] = rows.size();
    summary["errors"] = errors;
    nlohmann::json runtimes = nlohmann::json::object();
    for (const auto& r : rows) {
        if (r.runtime_s > 0.0) {
            runtimes[r.method + "/" + r.scenario + "/q" + num(r.q_thresh) + "/b" +
                     num(r.beta_thresh)] = r.runtime_s;
        }
    }
    summary["cell_runtime_s"] = runtimes;
    summary["total_runtime_s"] = clock_seconds(t0);
    std::ofstream out(summary_path(cfg));
    if (!out) throw std::runtime_error("cannot open for writing: " + summary_path(cfg));
    out << summary.dump(2) << "\n";

    return errors.empty() ? 0 : 1;
}

int cmd_ablation(const ExperimentConfig& cfg) {
    validate_config(cfg);
    require_file(model_path(cfg), "model file");
    const SliceModel model = import_model(model_path(cfg));
    fs::create_directories(cfg.out_dir);

    std::vector<std::string> errors;
    std::vector<ResultRow> rows;
    CellContext ctx{cfg, model, nullptr};

    for (double q : cfg.sweep.q_thresholds) {
        for (double b : cfg.sweep.beta_thresholds) {
            const ScenarioSpec scenario =
                make_constant_scenario(cfg, cfg.sweep.peak_traffic, q, b);
            for (const std::string variant : {"full", "0sigma", "2sigma"}) {
                try {
                    const std::uint64_t seed =
                        derive_seed(cell_seed(cfg, "microopt", scenario), "variant/" + variant);
                    Problem problem;
                    problem.slices.push_back(
                        {&model, scenario.series, SlaSpec{q, b, CostWeights()}});
                    OptimizerConfig oc = cfg.optimizer;
                    oc.seed = seed;
                    const auto t0 = std::chrono::steady_clock::now();
                    Solution sol;
                    if (variant == "full") {
                        sol = optimize(problem, oc);
                    } else {
                        sol = scalar_variant_optimize(problem, oc, variant == "0sigma" ? 0 : 2);
                    }
                    if (!sol.feasible) {
                        throw std::runtime_error("no feasible allocation");
                    }
                    ResultRow row = finish_row(ctx, scenario, "microopt", sol.allocations[0],
                                               seed, clock_seconds(t0));
                    row.variant = variant;
                    rows.push_back(std::move(row));
                } catch (const std::exception& e) {
                    errors.push_back(variant + "/" + scenario.id + "/q" + num(q) + "/b" + num(b) +
                                     ": " + e.what());
                }
            }
        }
    }

    sort_rows(rows);
    write_results_csv(rows, ablation_path(cfg), /*with_variant=*/true);
    for (const auto& e : errors) std::fprintf(stderr, "ablation cell failed: %s\n", e.c_str());
    return errors.empty() ? 0 : 1;
}

}  // namespace microopt
