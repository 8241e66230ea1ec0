#pragma once

#include <cstdint>
#include <functional>

#include "microopt/domain.hpp"
#include "microopt/optimizer.hpp"
#include "microopt/oracle.hpp"

namespace microopt {

// Brute-force search grid; the defaults cover the full capacity range at the
// paper-scale granularity.
struct SearchGrid {
    RangeSpec cpu_range{100.0, 4500.0, 100.0}; // millicores
    RangeSpec bw_range{1.0, 50.0, 1.0};        // Mbps
};

// Measured mean degradation of an allocation against a traffic series and
// QoS threshold; `stream` keys the evaluation's random draws so grid points
// can be scored independently and deterministically.
using AllocationEvaluator =
    std::function<double(const TrafficSeries&, const ResourceVector&, double q_thresh,
                         std::uint64_t stream)>;

AllocationEvaluator make_oracle_evaluator(const OracleParams& params, int n_trials,
                                          std::uint64_t seed);

// Cheapest grid point whose measured degradation meets sla.beta_thresh; ties
// break by cost, then CPU, then bandwidth. Throws if no grid point qualifies.
ResourceVector grid_optimum(const AllocationEvaluator& evaluator, const TrafficSeries& traffic,
                            const SearchGrid& grid, const SlaSpec& sla,
                            const CostWeights& weights);

// Static peak-traffic allocation: grid_optimum at constant peak traffic under
// a strict SLA.
ResourceVector peak_alloc(const AllocationEvaluator& evaluator, double peak_traffic,
                          const SearchGrid& grid, const SlaSpec& strict_sla,
                          const CostWeights& weights, std::size_t tau = 300);

// Ablation variants: the optimizer run with the model's distribution
// collapsed to the deterministic value mu - k_sigma * sigma.
Solution scalar_variant_optimize(const Problem& problem, const OptimizerConfig& cfg,
                                 int k_sigma);

}  // namespace microopt
