#include "microopt/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "microopt/rng.hpp"

namespace microopt {

namespace {

constexpr double kCapacityTol = 1e-9;

void check_problem(const Problem& problem) {
    if (problem.slices.empty()) throw std::invalid_argument("optimizer: no slices");
    const std::size_t k = problem.resource_dim();
    if (k == 0 || problem.weights.dim() != k) {
        throw std::invalid_argument("optimizer: weight/capacity dimension mismatch");
    }
    for (const auto& s : problem.slices) {
        if (s.model == nullptr) throw std::invalid_argument("optimizer: slice without model");
        if (static_cast<std::size_t>(s.model->resource_dim()) != k) {
            throw std::invalid_argument("optimizer: slice model resource dimension mismatch");
        }
        if (auto v = validate_traffic(s.traffic); !v) {
            throw std::invalid_argument("optimizer: " + v.reason);
        }
        if (auto v = validate_sla(s.sla); !v) {
            throw std::invalid_argument("optimizer: " + v.reason);
        }
    }
}

double total_cost(const Problem& problem, const std::vector<ResourceVector>& allocations) {
    double c = 0.0;
    for (const auto& r : allocations) c += normalized_cost(problem.weights, r);
    return c;
}

double capacity_term(const Problem& problem, const std::vector<ResourceVector>& allocations,
                     const DualState& dual) {
    double v = 0.0;
    for (std::size_t k = 0; k < problem.resource_dim(); ++k) {
        double used = 0.0;
        for (const auto& r : allocations) used += r[k];
        v += dual.mu[k] * (used - problem.capacity[k]);
    }
    return v;
}

bool capacity_ok(const Problem& problem, const std::vector<ResourceVector>& allocations,
                 double tol) {
    for (std::size_t k = 0; k < problem.resource_dim(); ++k) {
        double used = 0.0;
        for (const auto& r : allocations) used += r[k];
        if (used > problem.capacity[k] + tol) return false;
    }
    return true;
}

std::vector<double> strict_betas(const Problem& problem,
                                 const std::vector<ResourceVector>& allocations,
                                 const std::vector<EpsilonPanel>& panels) {
    std::vector<double> betas(problem.slices.size(), 0.0);
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        betas[s] = expected_beta_value(*problem.slices[s].model, problem.slices[s].traffic,
                                       allocations[s], problem.slices[s].sla.q_thresh, 1.0,
                                       BetaMode::Strict, panels[s]);
    }
    return betas;
}

std::vector<EpsilonPanel> draw_panels(const Problem& problem, int n_mc, std::uint64_t seed) {
    std::vector<EpsilonPanel> panels;
    panels.reserve(problem.slices.size());
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        panels.push_back(make_epsilon_panel(n_mc, static_cast<int>(problem.slices[s].traffic.tau()),
                                            derive_seed(seed, s)));
    }
    return panels;
}

struct Certificate {
    bool feasible = false;
    std::vector<double> betas;
    double violation = 0.0; // max constraint excess, for best-effort reporting
};

Certificate certify(const Problem& problem, const std::vector<ResourceVector>& allocations,
                    const std::vector<EpsilonPanel>& cert_panels, double beta_margin) {
    Certificate cert;
    cert.betas = strict_betas(problem, allocations, cert_panels);
    cert.feasible = true;
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        const double limit = problem.slices[s].sla.beta_thresh - beta_margin;
        const double excess = cert.betas[s] - limit;
        cert.violation = std::max(cert.violation, excess);
        if (excess > 0.0) cert.feasible = false;
    }
    for (std::size_t k = 0; k < problem.resource_dim(); ++k) {
        double used = 0.0;
        for (const auto& r : allocations) used += r[k];
        const double excess = (used - problem.capacity[k]) / problem.capacity[k];
        cert.violation = std::max(cert.violation, excess);
        if (used > problem.capacity[k] + kCapacityTol) cert.feasible = false;
    }
    return cert;
}

// Shrink a certified-feasible incumbent toward the constraint boundary:
// first along the ray to the origin, then one resource at a time. Every
// accepted point is re-certified, so the result is always feasible.
std::vector<ResourceVector> polish_incumbent(const Problem& problem,
                                             std::vector<ResourceVector> allocations,
                                             const std::vector<EpsilonPanel>& cert_panels,
                                             const OptimizerConfig& cfg) {
    const double margin = cfg.polish_margin;
    auto feasible_all = [&](const std::vector<ResourceVector>& a) {
        return certify(problem, a, cert_panels, margin).feasible;
    };
    if (!feasible_all(allocations)) return allocations; // already at the boundary

    const std::size_t n_slices = problem.slices.size();
    const std::size_t K = problem.resource_dim();

    auto scaled = [&](const std::vector<ResourceVector>& a, double t) {
        std::vector<ResourceVector> out = a;
        for (auto& r : out) {
            for (auto& v : r.values) v *= t;
        }
        return out;
    };

    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < cfg.polish_bisect_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible_all(scaled(allocations, mid))) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    allocations = scaled(allocations, hi);

    // per-coordinate passes; shrinking one slice's resource only affects that
    // slice's degradation, and capacity can only improve
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t s = 0; s < n_slices; ++s) {
            for (std::size_t k = 0; k < K; ++k) {
                const double base = allocations[s][k];
                if (base <= 0.0) continue;
                const double limit = problem.slices[s].sla.beta_thresh - margin;
                auto slice_ok = [&](double value) {
                    ResourceVector trial = allocations[s];
                    trial[k] = value;
                    const double beta = expected_beta_value(
                        *problem.slices[s].model, problem.slices[s].traffic, trial,
                        problem.slices[s].sla.q_thresh, 1.0, BetaMode::Strict, cert_panels[s]);
                    return beta <= limit;
                };
                double flo = 0.0, fhi = 1.0;
                for (int it = 0; it < cfg.polish_bisect_iters; ++it) {
                    const double mid = 0.5 * (flo + fhi);
                    if (slice_ok(base * mid)) {
                        fhi = mid;
                    } else {
                        flo = mid;
                    }
                }
                allocations[s][k] = base * fhi;
            }
        }
    }
    return allocations;
}

} // namespace

LagrangianEval surrogate_lagrangian(const Problem& problem,
                                    const std::vector<ResourceVector>& allocations,
                                    const DualState& dual, const SurrogateConfig& cfg,
                                    const std::vector<EpsilonPanel>& panels) {
    check_problem(problem);
    const std::size_t K = problem.resource_dim();
    LagrangianEval eval;
    eval.grads.assign(problem.slices.size(), std::vector<double>(K, 0.0));
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        const SliceSpec& slice = problem.slices[s];
        eval.value += normalized_cost(problem.weights, allocations[s]);
        const BetaEstimate est = expected_beta(*slice.model, slice.traffic, allocations[s],
                                               slice.sla.q_thresh, cfg, BetaMode::Surrogate,
                                               panels[s]);
        eval.value += dual.lambda[s] * (est.value - slice.sla.beta_thresh);
        for (std::size_t k = 0; k < K; ++k) {
            eval.grads[s][k] =
                problem.weights[k] + dual.lambda[s] * est.grad_r[k] + dual.mu[k];
        }
    }
    eval.value += capacity_term(problem, allocations, dual);
    return eval;
}

double surrogate_lagrangian_value(const Problem& problem,
                                  const std::vector<ResourceVector>& allocations,
                                  const DualState& dual, const SurrogateConfig& cfg,
                                  const std::vector<EpsilonPanel>& panels) {
    double value = total_cost(problem, allocations);
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        const SliceSpec& slice = problem.slices[s];
        const double beta =
            expected_beta_value(*slice.model, slice.traffic, allocations[s], slice.sla.q_thresh,
                                cfg.rho, BetaMode::Surrogate, panels[s]);
        value += dual.lambda[s] * (beta - slice.sla.beta_thresh);
    }
    value += capacity_term(problem, allocations, dual);
    return value;
}

double strict_lagrangian(const Problem& problem, const std::vector<ResourceVector>& allocations,
                         const DualState& dual, const std::vector<EpsilonPanel>& panels) {
    double value = total_cost(problem, allocations);
    const auto betas = strict_betas(problem, allocations, panels);
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        value += dual.lambda[s] * (betas[s] - problem.slices[s].sla.beta_thresh);
    }
    value += capacity_term(problem, allocations, dual);
    return value;
}

std::vector<ResourceVector> initialize_primal(const Problem& problem, const DualState& dual,
                                              const OptimizerConfig& cfg,
                                              const std::vector<EpsilonPanel>& panels,
                                              std::uint64_t seed) {
    check_problem(problem);
    if (cfg.n_init < 1) throw std::invalid_argument("initialize_primal: n_init must be >= 1");
    Rng rng(seed);
    std::vector<ResourceVector> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cfg.n_init; ++c) {
        std::vector<ResourceVector> cand(problem.slices.size());
        for (auto& r : cand) {
            r.values.resize(problem.resource_dim());
            for (std::size_t k = 0; k < problem.resource_dim(); ++k) {
                r[k] = rng.uniform(0.0, problem.capacity[k]);
            }
        }
        const double value = surrogate_lagrangian_value(problem, cand, dual, cfg.surrogate, panels);
        if (value < best_value) {
            best_value = value;
            best = std::move(cand);
        }
    }
    return best;
}

std::vector<ResourceVector> inner_descent(const Problem& problem,
                                          std::vector<ResourceVector> allocations,
                                          const DualState& dual, const OptimizerConfig& cfg,
                                          const std::vector<EpsilonPanel>& panels) {
    check_problem(problem);
    const std::size_t n_slices = problem.slices.size();
    const std::size_t K = problem.resource_dim();

    LagrangianEval eval = surrogate_lagrangian(problem, allocations, dual, cfg.surrogate, panels);
    double step = cfg.alpha1;
    for (int it = 0; it < cfg.tau2_max; ++it) {
        // projected gradient in capacity-normalized coordinates
        double norm2 = 0.0;
        for (std::size_t s = 0; s < n_slices; ++s) {
            for (std::size_t k = 0; k < K; ++k) {
                const double g = eval.grads[s][k] * problem.capacity[k];
                if (!std::isfinite(g)) {
                    throw std::runtime_error("inner_descent: non-finite gradient at slice " +
                                             std::to_string(s) + ", resource " +
                                             std::to_string(k));
                }
                const double u = allocations[s][k] / problem.capacity[k];
                const bool blocked = (u <= 0.0 && g > 0.0) || (u >= 1.0 && g < 0.0);
                if (!blocked) norm2 += g * g;
            }
        }
        if (std::sqrt(norm2) <= cfg.eps2) break;

        bool accepted = false;
        std::vector<ResourceVector> trial(n_slices);
        for (int h = 0; h < 30 && !accepted; ++h) {
            for (std::size_t s = 0; s < n_slices; ++s) {
                trial[s].values.resize(K);
                for (std::size_t k = 0; k < K; ++k) {
                    const double u = allocations[s][k] / problem.capacity[k] -
                                     step * eval.grads[s][k] * problem.capacity[k];
                    trial[s][k] = std::clamp(u, 0.0, 1.0) * problem.capacity[k];
                }
            }
            const double trial_value =
                surrogate_lagrangian_value(problem, trial, dual, cfg.surrogate, panels);
            if (trial_value < eval.value) {
                accepted = true;
            } else {
                step *= 0.5;
            }
        }
        if (!accepted) break; // no descent along the gradient at line-search resolution

        allocations = std::move(trial);
        eval = surrogate_lagrangian(problem, allocations, dual, cfg.surrogate, panels);
        step = std::min(step * 1.5, cfg.alpha1);
    }
    return allocations;
}

DualState outer_update(const DualState& dual, const Problem& problem,
                       const std::vector<ResourceVector>& allocations,
                       const std::vector<double>& strict_betas, const OptimizerConfig& cfg) {
    DualState next = dual;
    for (std::size_t s = 0; s < problem.slices.size(); ++s) {
        next.lambda[s] = std::max(
            0.0, dual.lambda[s] + cfg.alpha2 * (strict_betas[s] - problem.slices[s].sla.beta_thresh));
    }
    // capacity violation normalized per resource so one alpha3 covers
    // millicore- and Mbps-scaled constraints alike
    for (std::size_t k = 0; k < problem.resource_dim(); ++k) {
        double used = 0.0;
        for (const auto& r : allocations) used += r[k];
        next.mu[k] = std::max(
            0.0, dual.mu[k] + cfg.alpha3 * (used - problem.capacity[k]) / problem.capacity[k]);
    }
    return next;
}

Solution optimize(const Problem& problem, const OptimizerConfig& cfg) {
    check_problem(problem);
    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t n_slices = problem.slices.size();
    const std::size_t K = problem.resource_dim();

    Solution best;
    best.seed = cfg.seed;
    best.cost = std::numeric_limits<double>::infinity();
    double best_infeasible_violation = std::numeric_limits<double>::infinity();
    Solution best_infeasible;
    best_infeasible.seed = cfg.seed;

    for (int restart = 0; restart < std::max(1, cfg.n_restarts); ++restart) {
        const std::uint64_t rs_seed = derive_seed(cfg.seed, "restart/" + std::to_string(restart));
        const auto cert_panels = draw_panels(problem, cfg.nmc_cert, derive_seed(rs_seed, "cert"));

        DualState dual = DualState::zeros(n_slices, K);
        double lb = 0.0;
        double ub = std::numeric_limits<double>::infinity();
        std::vector<double> lb_hist, ub_hist;
        std::vector<ResourceVector> incumbent;
        std::vector<double> incumbent_betas;
        std::vector<ResourceVector> prev;
        int outer_done = 0;

        for (int t1 = 0; t1 < cfg.tau1_max; ++t1) {
            const std::uint64_t iter_seed = derive_seed(rs_seed, "outer/" + std::to_string(t1));
            const auto panels =
                draw_panels(problem, cfg.surrogate.n_mc, derive_seed(iter_seed, "panel"));
            const auto outer_panels =
                draw_panels(problem, cfg.nmc_outer, derive_seed(iter_seed, "strict"));

            auto start = initialize_primal(problem, dual, cfg, panels, derive_seed(iter_seed, "init"));
            if (!prev.empty()) {
                const double v_start =
                    surrogate_lagrangian_value(problem, start, dual, cfg.surrogate, panels);
                const double v_prev =
                    surrogate_lagrangian_value(problem, prev, dual, cfg.surrogate, panels);
                if (v_prev < v_start) start = prev;
            }

            auto r = inner_descent(problem, start, dual, cfg, panels);
            prev = r;

            const auto betas = strict_betas(problem, r, outer_panels);

            Certificate cert = certify(problem, r, cert_panels, 0.0);
            if (cert.feasible) {
                auto candidate = r;
                if (cfg.polish) {
                    candidate = polish_incumbent(problem, candidate, cert_panels, cfg);
                    cert = certify(problem, candidate, cert_panels, 0.0);
                }
                const double cand_cost = total_cost(problem, candidate);
                if (cert.feasible && cand_cost < ub) {
                    ub = cand_cost;
                    incumbent = candidate;
                    incumbent_betas = cert.betas;
                }
            } else if (cert.violation < best_infeasible_violation) {
                best_infeasible_violation = cert.violation;
                best_infeasible.allocations = r;
                best_infeasible.certified_beta = cert.betas;
                best_infeasible.cost = total_cost(problem, r);
                best_infeasible.dual = dual;
            }

            const double lb_cand = strict_lagrangian(problem, r, dual, outer_panels);
            lb = std::max(lb, std::min(lb_cand, ub));

            dual = outer_update(dual, problem, r, betas, cfg);

            lb_hist.push_back(lb);
            ub_hist.push_back(ub);
            outer_done = t1 + 1;
            if (std::isfinite(ub) && ub > 0.0 && (ub - lb) / ub <= cfg.eps1) break;
            if (std::isfinite(ub) && ub == 0.0) break; // zero-cost optimum
        }

        if (!incumbent.empty()) {
            const bool better = !best.feasible || ub < best.cost;
            if (better) {
                best.feasible = true;
                best.allocations = incumbent;
                best.certified_beta = incumbent_betas;
                best.cost = ub;
                best.dual = dual;
                best.lb_history = lb_hist;
                best.ub_history = ub_hist;
                best.outer_iterations = outer_done;
            }
        }
        best.restarts_run = restart + 1;
    }

    if (!best.feasible) {
        best_infeasible.feasible = false;
        best_infeasible.restarts_run = std::max(1, cfg.n_restarts);
        best_infeasible.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return best_infeasible;
    }
    best.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return best;
}

std::string solution_to_json(const Solution& solution, const OptimizerConfig& cfg) {
    nlohmann::json j;
    nlohmann::json allocs = nlohmann::json::array();
    for (const auto& r : solution.allocations) allocs.push_back(r.values);
    j["allocations"] = allocs;
    j["dual"] = {{"lambda", solution.dual.lambda}, {"mu", solution.dual.mu}};
    j["lb_history"] = solution.lb_history;
    j["ub_history"] = solution.ub_history;
    j["feasible"] = solution.feasible;
    j["certified_beta"] = solution.certified_beta;
    j["cost"] = solution.cost;
    j["outer_iterations"] = solution.outer_iterations;
    j["restarts_run"] = solution.restarts_run;
    j["wall_time_s"] = solution.wall_time_s;
    j["seed"] = solution.seed;
    j["config"] = {{"alpha1", cfg.alpha1},
                   {"alpha2", cfg.alpha2},
                   {"alpha3", cfg.alpha3},
                   {"tau1_max", cfg.tau1_max},
                   {"tau2_max", cfg.tau2_max},
                   {"eps1", cfg.eps1},
                   {"eps2", cfg.eps2},
                   {"n_init", cfg.n_init},
                   {"rho", cfg.surrogate.rho},
                   {"n_mc", cfg.surrogate.n_mc},
                   {"n_restarts", cfg.n_restarts},
                   {"nmc_outer", cfg.nmc_outer},
                   {"nmc_cert", cfg.nmc_cert},
                   {"polish", cfg.polish},
                   {"polish_margin", cfg.polish_margin},
                   {"seed", cfg.seed}};
    return j.dump(2);
}

void write_solution_json(const Solution& solution, const OptimizerConfig& cfg,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << solution_to_json(solution, cfg) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace microopt
