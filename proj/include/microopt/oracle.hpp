#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "microopt/domain.hpp"

namespace microopt {

// Parametric ground-truth network model. Per-user QoS is the bottleneck of
// gNB compute (cpu_capacity_slope * millicores Mbps) and transport bandwidth,
// shared by x users and capped by what the application can consume:
//
//   mu(x, r) = min(app_max_rate, min(slope * cpu, bw) / x)
//
// Observations add heteroscedastic Gaussian noise clamped at zero.
struct OracleParams {
    double cpu_capacity_slope = 0.01; // Mbps of gNB throughput per millicore
    double app_max_rate = 6.0;        // Mbps a single user can consume
    double noise_base = 0.25;         // Mbps, constant noise floor
    double noise_slope = 0.05;        // extra noise per Mbps of mean QoS
};

struct RangeSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> points() const;
};

struct GridSpec {
    RangeSpec traffic_range{1.0, 5.0, 1.0};     // users/s
    RangeSpec bandwidth_range{5.0, 40.0, 5.0};  // Mbps
    RangeSpec cpu_range{500.0, 4000.0, 500.0};  // millicores
    int samples_per_point = 10;
};

enum class Split { Train, Validation, Test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

struct QoSRow {
    double traffic = 0.0; // users/s
    ResourceVector r;
    double qos = 0.0; // observed Mbps
    Split split = Split::Train;
};

struct QoSDataset {
    std::vector<QoSRow> rows;

    std::vector<const QoSRow*> split_rows(Split s) const;
    std::size_t count(Split s) const;
};

// Deterministic mean QoS; throws std::domain_error for x <= 0.
double oracle_qos_mean(double traffic, const ResourceVector& r, const OracleParams& p);

// One noisy observation, reproducible per seed.
double oracle_qos_sample(double traffic, const ResourceVector& r, const OracleParams& p,
                         std::uint64_t seed);

// Noise standard deviation at a given mean (used for irreducible-error bounds).
double oracle_noise_std(double mu, const OracleParams& p);

// Full factorial dataset over the grid, plus a validation split carved from
// the on-grid pool and a test split located at the midpoints between grid
// steps so that test inputs never coincide with training inputs.
QoSDataset generate_grid_dataset(const GridSpec& grid, const OracleParams& p,
                                 std::uint64_t seed, double validation_fraction = 0.1);

// Monte-Carlo ground-truth check of an allocation: n_trials simulated
// intervals, each drawing per-slot QoS and scoring strict traffic-weighted
// degradation against sla.q_thresh; returns the mean over trials.
double evaluate_allocation(const TrafficSeries& traffic, const ResourceVector& r,
                           const SlaSpec& sla, const OracleParams& p, int n_trials,
                           std::uint64_t seed);

// CSV persistence, header: x_users,cpu_millicores,bw_mbps,qos_mbps,split
void write_dataset_csv(const QoSDataset& ds, Split split, const std::string& path);
QoSDataset read_dataset_csv(const std::vector<std::string>& paths);

}  // namespace microopt
