#pragma once

#include <span>

namespace microopt {

struct MuSigma {
    double mu = 0.0;
    double sigma = 0.0;
};

// A QoS distribution model: maps (slice traffic, allocation) to the Gaussian
// parameters (mu, sigma) and exposes reverse-mode gradients with respect to
// the allocation. Implemented by the trained neural slice model, by the
// ground-truth oracle used as a deterministic model, and by the scalarized
// ablation views.
class QosModel {
  public:
    virtual ~QosModel() = default;

    virtual MuSigma predict(double traffic, std::span<const double> r) const = 0;

    // Accumulate d(g_mu * mu + g_sigma * sigma)/dr into grad (length K).
    virtual void accumulate_input_grad(double traffic, std::span<const double> r, double g_mu,
                                       double g_sigma, std::span<double> grad) const = 0;

    virtual int resource_dim() const = 0;
};

}  // namespace microopt
