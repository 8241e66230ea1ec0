#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "microopt/baselines.hpp"
#include "microopt/optimizer.hpp"
#include "microopt/oracle.hpp"
#include "microopt/slicemodel.hpp"
#include "microopt/traffic.hpp"

namespace microopt {

struct SweepConfig {
    std::vector<double> q_thresholds{3.0, 4.0, 5.0};
    std::vector<double> beta_thresholds{0.1, 0.2, 0.3};
    std::vector<double> traffic_centers{1.0, 2.0, 3.0, 4.0, 5.0};
    double peak_traffic = 5.0;  // users/s, the constant-sweep operating point
    std::size_t tau = 300;      // reconfiguration interval in seconds
    double dynamic_q_thresh = 5.0;
    double dynamic_beta_thresh = 0.1;
    bool include_center_scan = true; // constant traffic at each center, (5.0, 0.1)
    bool include_dynamic = true;     // truncated-normal scenarios
    std::vector<std::string> methods{"microopt", "grid-optimum", "peak-alloc"};
};

// The static peak-allocation SLA. The QoS threshold follows the strictest
// sweep setting; beta defaults to 0.05 because the synthetic oracle's
// app-rate ceiling makes tighter targets unreachable at q_thresh = 5.
struct PeakAllocConfig {
    double q_thresh = 5.0;
    double beta_thresh = 0.05;
};

struct TrafficModelConfig {
    std::string trace_csv;  // optional measured trace; synthesized when empty
    double amplitude = 1.0; // synthetic diurnal swing
    double noise = 0.05;    // synthetic hourly noise
    double peak_users = 5.0;
};

struct ExperimentConfig {
    OracleParams oracle;
    GridSpec grid;
    ModelArch arch;
    TrainConfig train;
    OptimizerConfig optimizer;
    SearchGrid search_grid;
    int search_trials = 200; // trials per grid point in brute-force searches
    int eval_trials = 200;   // trials for the measured-degradation column
    SweepConfig sweep;
    PeakAllocConfig peak;
    TrafficModelConfig traffic;
    double validation_fraction = 0.1;
    std::string out_dir = "out";
    std::uint64_t master_seed = 42;
};

struct ScenarioSpec {
    std::string id;         // e.g. const-x5 or tnorm-c3-smax
    std::string descriptor; // human-readable traffic description
    TrafficSeries series;
    double q_thresh = 5.0;
    double beta_thresh = 0.1;
};

struct ResultRow {
    std::string method;
    std::string variant; // full | 0sigma | 2sigma (ablation only)
    std::string scenario;
    double q_thresh = 0.0;
    double beta_thresh = 0.0;
    std::string traffic;
    double cpu = 0.0;
    double bw = 0.0;
    double cost = 0.0;
    double model_beta = 0.0;    // slice-model strict E(beta) at the allocation
    double measured_beta = 0.0; // oracle evaluator, never the learned model
    double runtime_s = 0.0;     // in-memory only; summary.json carries runtimes
    std::uint64_t seed = 0;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Output locations inside cfg.out_dir
std::string dataset_csv_path(const ExperimentConfig& cfg, Split split);
std::string manifest_path(const ExperimentConfig& cfg);
std::string model_path(const ExperimentConfig& cfg);
std::string metrics_path(const ExperimentConfig& cfg);
std::string results_path(const ExperimentConfig& cfg);
std::string summary_path(const ExperimentConfig& cfg);
std::string ablation_path(const ExperimentConfig& cfg);
std::string trace_path(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

// Subcommand bodies. Exit-code convention: 0 success, 1 when any sweep cell
// failed (experiment/ablation return the count of failed cells), config and
// missing-input problems throw ConfigError (exit 2 in the CLI).
void cmd_simulate_dataset(const ExperimentConfig& cfg);
void cmd_train(const ExperimentConfig& cfg);
Solution cmd_optimize(const ExperimentConfig& cfg, const ScenarioSpec& scenario,
                      ResultRow* row_out = nullptr);
int cmd_experiment(const ExperimentConfig& cfg);
int cmd_ablation(const ExperimentConfig& cfg);

// Scenario builders shared by the CLI and the test suites.
ScenarioSpec make_constant_scenario(const ExperimentConfig& cfg, double center, double q_thresh,
                                    double beta_thresh);
ScenarioSpec make_tnorm_scenario(const ExperimentConfig& cfg, double center, double sd,
                                 const std::string& tag, double q_thresh, double beta_thresh);

// Hourly-variability stats from the configured trace (synthesized and written
// to trace_path when no measured trace is configured).
TraceStats experiment_trace_stats(const ExperimentConfig& cfg);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path,
                       bool with_variant = false);
std::vector<ResultRow> read_results_csv(const std::string& path);

}  // namespace microopt
