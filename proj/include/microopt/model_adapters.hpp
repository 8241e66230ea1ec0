#pragma once

#include <algorithm>
#include <stdexcept>

#include "microopt/model_iface.hpp"
#include "microopt/oracle.hpp"

namespace microopt {

// The ground-truth oracle mean used directly as a deterministic QoS model
// (sigma = 0). Gradients are the subgradients of the bottleneck min; on ties
// the CPU branch is charged.
class OracleMeanModel final : public QosModel {
  public:
    explicit OracleMeanModel(OracleParams params) : params_(params) {}

    MuSigma predict(double traffic, std::span<const double> r) const override {
        if (!(traffic > 0.0)) throw std::domain_error("OracleMeanModel: traffic must be positive");
        const double gnb = params_.cpu_capacity_slope * r[0];
        const double shared = std::min(gnb, r[1]);
        return {std::min(params_.app_max_rate, shared / traffic), 0.0};
    }

    void accumulate_input_grad(double traffic, std::span<const double> r, double g_mu,
                               double /*g_sigma*/, std::span<double> grad) const override {
        if (!(traffic > 0.0)) throw std::domain_error("OracleMeanModel: traffic must be positive");
        const double gnb = params_.cpu_capacity_slope * r[0];
        const double shared = std::min(gnb, r[1]);
        if (shared / traffic >= params_.app_max_rate) return; // app-rate capped: flat
        if (gnb <= r[1]) {
            grad[0] += g_mu * params_.cpu_capacity_slope / traffic;
        } else {
            grad[1] += g_mu / traffic;
        }
    }

    int resource_dim() const override { return 2; }

  private:
    OracleParams params_;
};

// Scalar ablation view: the base model's distribution collapsed to the
// deterministic value mu - k_sigma * sigma.
class ScalarizedModel final : public QosModel {
  public:
    ScalarizedModel(const QosModel& base, double k_sigma) : base_(&base), k_sigma_(k_sigma) {}

    MuSigma predict(double traffic, std::span<const double> r) const override {
        const MuSigma d = base_->predict(traffic, r);
        return {d.mu - k_sigma_ * d.sigma, 0.0};
    }

    void accumulate_input_grad(double traffic, std::span<const double> r, double g_mu,
                               double /*g_sigma*/, std::span<double> grad) const override {
        base_->accumulate_input_grad(traffic, r, g_mu, -k_sigma_ * g_mu, grad);
    }

    int resource_dim() const override { return base_->resource_dim(); }

  private:
    const QosModel* base_;
    double k_sigma_;
};

}  // namespace microopt
