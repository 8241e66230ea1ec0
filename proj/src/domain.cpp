#include "microopt/domain.hpp"

#include <cmath>
#include <stdexcept>

namespace microopt {

double TrafficSeries::total() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

double normalized_cost(const CostWeights& weights, const ResourceVector& r) {
    if (weights.dim() != r.dim()) {
        throw std::invalid_argument("normalized_cost: weight dimension " +
                                    std::to_string(weights.dim()) +
                                    " does not match resource dimension " +
                                    std::to_string(r.dim()));
    }
    double cost = 0.0;
    for (std::size_t k = 0; k < r.dim(); ++k) cost += weights[k] * r[k];
    return cost;
}

Verdict validate_sla(const SlaSpec& sla) {
    if (!(sla.q_thresh > 0.0) || !std::isfinite(sla.q_thresh)) {
        return {false, "q_thresh must be positive"};
    }
    if (!(sla.beta_thresh >= 0.0 && sla.beta_thresh <= 1.0)) {
        return {false, "beta_thresh must lie in [0,1]"};
    }
    if (sla.weights.dim() == 0) {
        return {false, "weights must be nonempty"};
    }
    for (double w : sla.weights.values) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            return {false, "weights must be positive"};
        }
    }
    return {};
}

Verdict validate_traffic(const TrafficSeries& traffic) {
    if (traffic.tau() == 0) return {false, "traffic series is empty"};
    for (double v : traffic.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            return {false, "traffic values must be nonnegative and finite"};
        }
    }
    if (!(traffic.total() > 0.0)) {
        return {false, "traffic series must have positive total"};
    }
    return {};
}

}  // namespace microopt
