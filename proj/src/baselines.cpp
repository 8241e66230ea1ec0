#include "microopt/baselines.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "microopt/model_adapters.hpp"
#include "microopt/rng.hpp"

namespace microopt {

AllocationEvaluator make_oracle_evaluator(const OracleParams& params, int n_trials,
                                          std::uint64_t seed) {
    return [params, n_trials, seed](const TrafficSeries& traffic, const ResourceVector& r,
                                    double q_thresh, std::uint64_t stream) {
        SlaSpec sla;
        sla.q_thresh = q_thresh;
        return evaluate_allocation(traffic, r, sla, params, n_trials, derive_seed(seed, stream));
    };
}

ResourceVector grid_optimum(const AllocationEvaluator& evaluator, const TrafficSeries& traffic,
                            const SearchGrid& grid, const SlaSpec& sla,
                            const CostWeights& weights) {
    if (auto v = validate_traffic(traffic); !v) {
        throw std::invalid_argument("grid_optimum: " + v.reason);
    }
    if (auto v = validate_sla(sla); !v) {
        throw std::invalid_argument("grid_optimum: " + v.reason);
    }
    const auto cpus = grid.cpu_range.points();
    const auto bws = grid.bw_range.points();

    struct Point {
        double cost;
        double cpu;
        double bw;
        std::uint64_t index;
    };
    std::vector<Point> points;
    points.reserve(cpus.size() * bws.size());
    std::uint64_t index = 0;
    for (double cpu : cpus) {
        for (double bw : bws) {
            points.push_back({normalized_cost(weights, ResourceVector(cpu, bw)), cpu, bw, index});
            ++index;
        }
    }
    // cheapest-first enumeration: the first feasible point is the optimum
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.cpu != b.cpu) return a.cpu < b.cpu;
        return a.bw < b.bw;
    });
    for (const Point& p : points) {
        const ResourceVector r(p.cpu, p.bw);
        if (evaluator(traffic, r, sla.q_thresh, p.index) <= sla.beta_thresh) {
            return r;
        }
    }
    throw std::runtime_error("grid_optimum: no feasible grid point for beta_thresh=" +
                             std::to_string(sla.beta_thresh));
}

ResourceVector peak_alloc(const AllocationEvaluator& evaluator, double peak_traffic,
                          const SearchGrid& grid, const SlaSpec& strict_sla,
                          const CostWeights& weights, std::size_t tau) {
    if (!(peak_traffic > 0.0)) {
        throw std::invalid_argument("peak_alloc: peak traffic must be positive");
    }
    return grid_optimum(evaluator, TrafficSeries::constant(peak_traffic, tau), grid, strict_sla,
                        weights);
}

Solution scalar_variant_optimize(const Problem& problem, const OptimizerConfig& cfg,
                                 int k_sigma) {
    if (k_sigma != 0 && k_sigma != 2) {
        throw std::invalid_argument("scalar_variant_optimize: k_sigma must be 0 or 2");
    }
    std::vector<ScalarizedModel> views;
    views.reserve(problem.slices.size());
    for (const auto& slice : problem.slices) {
        views.emplace_back(*slice.model, static_cast<double>(k_sigma));
    }
    Problem scalar_problem = problem;
    for (std::size_t s = 0; s < scalar_problem.slices.size(); ++s) {
        scalar_problem.slices[s].model = &views[s];
    }
    return optimize(scalar_problem, cfg);
}

}  // namespace microopt
