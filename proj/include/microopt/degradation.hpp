#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "microopt/domain.hpp"
#include "microopt/model_iface.hpp"

namespace microopt {

struct SurrogateConfig {
    double rho = 5.0; // sigmoid sharpness, per Mbps
    int n_mc = 64;    // Monte-Carlo replicates per expectation
};

// Matrix of standard-normal draws, one row per Monte-Carlo replicate and one
// column per interval slot. Held fixed through one inner-descent phase and
// redrawn between outer iterations (common random numbers).
struct EpsilonPanel {
    int n_mc = 0;
    int tau = 0;
    std::vector<double> data; // row-major, n_mc x tau

    double at(int m, int t) const { return data[static_cast<std::size_t>(m) * tau + t]; }
};

EpsilonPanel make_epsilon_panel(int n_mc, int tau, std::uint64_t seed);

// Strict traffic-weighted degradation over one interval:
//   sum_t x(t) * 1[q(t) <= q_thresh] / sum_t x(t)
// A slot exactly at the threshold counts as degraded.
double beta_strict(const TrafficSeries& traffic, std::span<const double> qos, double q_thresh);

// Smooth surrogate: the indicator is replaced by logistic(rho * (q_thresh - q)),
// which recovers beta_strict as rho -> infinity.
double beta_surrogate(const TrafficSeries& traffic, std::span<const double> qos, double q_thresh,
                      double rho);

enum class BetaMode { Strict, Surrogate };

struct BetaEstimate {
    double value = 0.0;
    std::vector<double> grad_r; // d value / d r, filled in surrogate mode only
};

// Expected degradation under the model's QoS distribution, estimated with the
// reparameterized samples q = mu(x_t, r) + sigma(x_t, r) * eps[m][t] over the
// fixed panel. Surrogate mode also returns the pathwise gradient w.r.t. r.
BetaEstimate expected_beta(const QosModel& model, const TrafficSeries& traffic,
                           const ResourceVector& r, double q_thresh, const SurrogateConfig& cfg,
                           BetaMode mode, const EpsilonPanel& panel);

// Value-only variant; the replicate count is taken from the panel. Used for
// line searches and for the high-replicate strict evaluations.
double expected_beta_value(const QosModel& model, const TrafficSeries& traffic,
                           const ResourceVector& r, double q_thresh, double rho, BetaMode mode,
                           const EpsilonPanel& panel);

}  // namespace microopt
