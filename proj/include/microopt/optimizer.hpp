#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "microopt/degradation.hpp"
#include "microopt/domain.hpp"
#include "microopt/model_iface.hpp"

namespace microopt {

struct SliceSpec {
    const QosModel* model = nullptr;
    TrafficSeries traffic;
    SlaSpec sla;
};

struct Problem {
    std::vector<SliceSpec> slices;
    CapacityVector capacity{4500.0, 50.0};
    CostWeights weights;

    std::size_t resource_dim() const { return capacity.dim(); }
};

struct OptimizerConfig {
    double alpha1 = 0.05; // primal step in capacity-normalized coordinates
    double alpha2 = 1.0;  // lambda step
    double alpha3 = 1.0;  // mu step, applied to the capacity-normalized violation
    int tau1_max = 50;    // outer iterations
    int tau2_max = 200;   // inner iterations
    double eps1 = 0.01;   // relative duality-gap tolerance
    double eps2 = 1e-4;   // inner projected-gradient-norm tolerance
    int n_init = 16;      // random primal initialization samples
    SurrogateConfig surrogate;
    int n_restarts = 3;
    int nmc_outer = 256; // strict replicates for multiplier updates and LB
    int nmc_cert = 512;  // strict replicates for feasibility certification
    bool polish = true;  // shrink certified incumbents to the constraint boundary
    double polish_margin = 0.005;
    int polish_bisect_iters = 30;
    std::uint64_t seed = 0;
};

struct DualState {
    std::vector<double> lambda; // per slice, QoS degradation multipliers
    std::vector<double> mu;     // per resource, capacity multipliers

    static DualState zeros(std::size_t n_slices, std::size_t n_resources) {
        return {std::vector<double>(n_slices, 0.0), std::vector<double>(n_resources, 0.0)};
    }
};

struct LagrangianEval {
    double value = 0.0;
    std::vector<std::vector<double>> grads; // per slice, per resource
};

struct Solution {
    std::vector<ResourceVector> allocations;
    DualState dual;
    std::vector<double> lb_history;
    std::vector<double> ub_history;
    bool feasible = false;
    std::vector<double> certified_beta; // strict E(beta) per slice at nmc_cert
    double cost = 0.0;
    int outer_iterations = 0;
    int restarts_run = 0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
};

// Surrogate Lagrangian and its gradient per slice:
//   L_hat = sum_s eta'r_s + sum_s lambda_s (E beta_hat_s - beta_thresh_s)
//         + sum_k mu_k (sum_s r_sk - R_k)
LagrangianEval surrogate_lagrangian(const Problem& problem,
                                    const std::vector<ResourceVector>& allocations,
                                    const DualState& dual, const SurrogateConfig& cfg,
                                    const std::vector<EpsilonPanel>& panels);

double surrogate_lagrangian_value(const Problem& problem,
                                  const std::vector<ResourceVector>& allocations,
                                  const DualState& dual, const SurrogateConfig& cfg,
                                  const std::vector<EpsilonPanel>& panels);

// Same shape with the strict indicator degradation; used for the LB update.
double strict_lagrangian(const Problem& problem, const std::vector<ResourceVector>& allocations,
                         const DualState& dual, const std::vector<EpsilonPanel>& panels);

// Best of n_init uniform samples in [0, R] under the current duals.
std::vector<ResourceVector> initialize_primal(const Problem& problem, const DualState& dual,
                                              const OptimizerConfig& cfg,
                                              const std::vector<EpsilonPanel>& panels,
                                              std::uint64_t seed);

// Projected gradient descent on the surrogate Lagrangian with backtracking;
// allocations stay in [0, R_k] componentwise.
std::vector<ResourceVector> inner_descent(const Problem& problem,
                                          std::vector<ResourceVector> allocations,
                                          const DualState& dual, const OptimizerConfig& cfg,
                                          const std::vector<EpsilonPanel>& panels);

// Projected subgradient ascent on the multipliers.
DualState outer_update(const DualState& dual, const Problem& problem,
                       const std::vector<ResourceVector>& allocations,
                       const std::vector<double>& strict_betas, const OptimizerConfig& cfg);

Solution optimize(const Problem& problem, const OptimizerConfig& cfg);

std::string solution_to_json(const Solution& solution, const OptimizerConfig& cfg);
void write_solution_json(const Solution& solution, const OptimizerConfig& cfg,
                         const std::string& path);

}  // namespace microopt
