#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "microopt/model_iface.hpp"
#include "microopt/oracle.hpp"

namespace microopt {

// Feed-forward slice model f(x, r) -> (mu, sigma): shared ReLU trunk, a
// linear head for the mean and a softplus head for the standard deviation.
// Inputs are standardized with statistics frozen at training time so the
// optimizer differentiates a stationary function.
struct ModelArch {
    int resource_dim = 2; // K
    int shared_layers = 3;
    int hidden_units = 16;
    int branch_units = 16;

    int input_dim() const { return 1 + resource_dim; }
};

struct TrainConfig {
    int epochs = 3000;
    double learning_rate = 0.001;
    int lr_decay_epoch = 1500;    // learning rate multiplied by lr_decay_factor here
    double lr_decay_factor = 0.1;
    int batch_size = 64;
    double momentum = 0.0;        // plain mini-batch gradient descent by default
    std::uint64_t seed = 0;
};

struct EpochMetrics {
    int epoch = 0;
    double learning_rate = 0.0;
    double train_nll = 0.0;
    double train_mse = 0.0;
    double val_nll = 0.0;
    double val_mse = 0.0;
};

struct SplitMetrics {
    double nll = 0.0;
    double mse = 0.0;
    double mae = 0.0;
};

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> w; // out x in, row-major
    std::vector<double> b; // out
};

class SliceModel final : public QosModel {
  public:
    ModelArch arch;
    std::vector<double> norm_mean;   // per input feature
    std::vector<double> norm_std;    // per input feature, floored at 1e-12
    std::vector<DenseLayer> shared;  // trunk
    DenseLayer mean_hidden, mean_head;
    DenseLayer std_hidden, std_head;
    std::vector<EpochMetrics> history;

    MuSigma predict(double traffic, std::span<const double> r) const override;
    void accumulate_input_grad(double traffic, std::span<const double> r, double g_mu,
                               double g_sigma, std::span<double> grad) const override;
    int resource_dim() const override { return arch.resource_dim; }
};

// Fan-in-scaled uniform initialization, deterministic per seed.
SliceModel init_model(const ModelArch& arch, std::uint64_t seed);

MuSigma predict_dist(const SliceModel& model, double traffic, const ResourceVector& r);

// Mean Gaussian negative log-likelihood of the batch under the model.
double nll_loss(const SliceModel& model, const std::vector<const QoSRow*>& batch);

// Mini-batch gradient descent on the NLL with the configured schedule;
// fills model.history with one row per epoch.
void train(SliceModel& model, const QoSDataset& dataset, const TrainConfig& cfg);

// Reparameterized sample q = mu + sigma * eps, differentiable in r for fixed eps.
double sample_qos_reparam(const SliceModel& model, double traffic, const ResourceVector& r,
                          double eps);

// d(mu + sigma * eps)/dr via reverse-mode accumulation through both branches.
std::vector<double> grad_qos_wrt_r(const SliceModel& model, double traffic,
                                   const ResourceVector& r, double eps);

SplitMetrics model_metrics(const SliceModel& model, const std::vector<const QoSRow*>& rows);

// JSON round trip, version tag "microopt-model-v1"; preserves every weight
// and normalization statistic bit-exactly.
void export_model(const SliceModel& model, const std::string& path);
SliceModel import_model(const std::string& path);

}  // namespace microopt
