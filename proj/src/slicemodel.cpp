#include "microopt/slicemodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "microopt/mathutil.hpp"
#include "microopt/rng.hpp"

namespace microopt {

namespace {

constexpr double kSigmaFloor = 1e-9; // keeps the NLL finite if softplus underflows

struct Workspace {
    std::vector<double> input;                    // normalized features
    std::vector<std::vector<double>> trunk_pre;   // preactivations per shared layer
    std::vector<std::vector<double>> trunk_act;
    std::vector<double> mean_pre, mean_act;
    std::vector<double> std_pre, std_act;
    double mu = 0.0;
    double zs = 0.0; // pre-softplus std head
    double sigma = 0.0;

    // scratch for backward
    std::vector<double> delta_a, delta_b, delta_trunk, delta_input;
};

Workspace& workspace() {
    static thread_local Workspace ws;
    return ws;
}

void affine(const DenseLayer& l, const std::vector<double>& in, std::vector<double>& out) {
    out.resize(l.out);
    for (int o = 0; o < l.out; ++o) {
        double acc = l.b[o];
        const double* wrow = &l.w[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) acc += wrow[i] * in[i];
        out[o] = acc;
    }
}

void relu(const std::vector<double>& pre, std::vector<double>& act) {
    act.resize(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) act[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

double head_scalar(const DenseLayer& l, const std::vector<double>& in) {
    double acc = l.b[0];
    for (int i = 0; i < l.in; ++i) acc += l.w[i] * in[i];
    return acc;
}

void forward(const SliceModel& m, double traffic, std::span<const double> r, Workspace& ws) {
    const int d = m.arch.input_dim();
    ws.input.resize(d);
    ws.input[0] = (traffic - m.norm_mean[0]) / m.norm_std[0];
    for (int k = 0; k < m.arch.resource_dim; ++k) {
        ws.input[k + 1] = (r[k] - m.norm_mean[k + 1]) / m.norm_std[k + 1];
    }

    ws.trunk_pre.resize(m.shared.size());
    ws.trunk_act.resize(m.shared.size());
    const std::vector<double>* cur = &ws.input;
    for (std::size_t l = 0; l < m.shared.size(); ++l) {
        affine(m.shared[l], *cur, ws.trunk_pre[l]);
        relu(ws.trunk_pre[l], ws.trunk_act[l]);
        cur = &ws.trunk_act[l];
    }

    affine(m.mean_hidden, *cur, ws.mean_pre);
    relu(ws.mean_pre, ws.mean_act);
    ws.mu = head_scalar(m.mean_head, ws.mean_act);

    affine(m.std_hidden, *cur, ws.std_pre);
    relu(ws.std_pre, ws.std_act);
    ws.zs = head_scalar(m.std_head, ws.std_act);
    ws.sigma = softplus(ws.zs) + kSigmaFloor;
}

struct LayerGrad {
    std::vector<double> w, b;

    void match(const DenseLayer& l) {
        w.assign(l.w.size(), 0.0);
        b.assign(l.b.size(), 0.0);
    }
};

struct ModelGrad {
    std::vector<LayerGrad> shared;
    LayerGrad mean_hidden, mean_head, std_hidden, std_head;

    void match(const SliceModel& m) {
        shared.resize(m.shared.size());
        for (std::size_t l = 0; l < m.shared.size(); ++l) shared[l].match(m.shared[l]);
        mean_hidden.match(m.mean_hidden);
        mean_head.match(m.mean_head);
        std_hidden.match(m.std_hidden);
        std_head.match(m.std_head);
    }
};

// delta_out is d loss / d layer-output; returns d loss / d layer-input in
// delta_in and (optionally) accumulates weight gradients.
void backprop_layer(const DenseLayer& l, const std::vector<double>& in,
                    const std::vector<double>& delta_out, std::vector<double>& delta_in,
                    LayerGrad* grad) {
    delta_in.assign(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
        const double d = delta_out[o];
        if (d == 0.0) continue;
        const double* wrow = &l.w[static_cast<std::size_t>(o) * l.in];
        for (int i = 0; i < l.in; ++i) delta_in[i] += wrow[i] * d;
        if (grad) {
            double* grow = &grad->w[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) grow[i] += in[i] * d;
            grad->b[o] += d;
        }
    }
}

void relu_backward(const std::vector<double>& pre, std::vector<double>& delta) {
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (pre[i] <= 0.0) delta[i] = 0.0;
    }
}

// Backward pass from head seeds (g_mu, g_sigma). Writes the gradient with
// respect to the raw (unnormalized) inputs into input_grad when non-null and
// accumulates weight gradients into grad when non-null.
void backward(const SliceModel& m, Workspace& ws, double g_mu, double g_sigma,
              std::vector<double>* input_grad, ModelGrad* grad) {
    const std::vector<double>& trunk_out = ws.trunk_act.back();
    ws.delta_trunk.assign(trunk_out.size(), 0.0);

    // mean branch
    ws.delta_a.assign(m.mean_head.in, 0.0);
    for (int i = 0; i < m.mean_head.in; ++i) ws.delta_a[i] = m.mean_head.w[i] * g_mu;
    if (grad) {
        for (int i = 0; i < m.mean_head.in; ++i) grad->mean_head.w[i] += ws.mean_act[i] * g_mu;
        grad->mean_head.b[0] += g_mu;
    }
    relu_backward(ws.mean_pre, ws.delta_a);
    backprop_layer(m.mean_hidden, trunk_out, ws.delta_a, ws.delta_b,
                   grad ? &grad->mean_hidden : nullptr);
    for (std::size_t i = 0; i < ws.delta_trunk.size(); ++i) ws.delta_trunk[i] += ws.delta_b[i];

    // std branch, chained through softplus
    const double g_zs = g_sigma * sigmoid(ws.zs);
    ws.delta_a.assign(m.std_head.in, 0.0);
    for (int i = 0; i < m.std_head.in; ++i) ws.delta_a[i] = m.std_head.w[i] * g_zs;
    if (grad) {
        for (int i = 0; i < m.std_head.in; ++i) grad->std_head.w[i] += ws.std_act[i] * g_zs;
        grad->std_head.b[0] += g_zs;
    }
    relu_backward(ws.std_pre, ws.delta_a);
    backprop_layer(m.std_hidden, trunk_out, ws.delta_a, ws.delta_b,
                   grad ? &grad->std_hidden : nullptr);
    for (std::size_t i = 0; i < ws.delta_trunk.size(); ++i) ws.delta_trunk[i] += ws.delta_b[i];

    // shared trunk
    for (int l = static_cast<int>(m.shared.size()) - 1; l >= 0; --l) {
        relu_backward(ws.trunk_pre[l], ws.delta_trunk);
        const std::vector<double>& in = (l == 0) ? ws.input : ws.trunk_act[l - 1];
        backprop_layer(m.shared[l], in, ws.delta_trunk, ws.delta_b,
                       grad ? &grad->shared[l] : nullptr);
        ws.delta_trunk = ws.delta_b;
    }

    if (input_grad) {
        input_grad->resize(m.arch.input_dim());
        for (int i = 0; i < m.arch.input_dim(); ++i) {
            (*input_grad)[i] = ws.delta_trunk[i] / m.norm_std[i];
        }
    }
}

void check_inputs(const SliceModel& m, double traffic, std::span<const double> r) {
    if (static_cast<int>(r.size()) != m.arch.resource_dim) {
        throw std::invalid_argument("slice model: allocation has wrong dimension");
    }
    if (!std::isfinite(traffic)) throw std::invalid_argument("slice model: non-finite traffic");
    for (double v : r) {
        if (!std::isfinite(v)) throw std::invalid_argument("slice model: non-finite allocation");
    }
}

DenseLayer init_layer(int in, int out, Rng& rng) {
    DenseLayer l;
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<std::size_t>(in) * out);
    l.b.resize(out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : l.w) v = rng.uniform(-bound, bound);
    for (auto& v : l.b) v = rng.uniform(-bound, bound);
    return l;
}

void sgd_step(DenseLayer& l, LayerGrad& g, LayerGrad& vel, double lr, double momentum,
              double scale) {
    for (std::size_t i = 0; i < l.w.size(); ++i) {
        const double step = g.w[i] * scale;
        vel.w[i] = momentum * vel.w[i] + step;
        l.w[i] -= lr * vel.w[i];
    }
    for (std::size_t i = 0; i < l.b.size(); ++i) {
        const double step = g.b[i] * scale;
        vel.b[i] = momentum * vel.b[i] + step;
        l.b[i] -= lr * vel.b[i];
    }
}

} // namespace

MuSigma SliceModel::predict(double traffic, std::span<const double> r) const {
    check_inputs(*this, traffic, r);
    Workspace& ws = workspace();
    forward(*this, traffic, r, ws);
    return {ws.mu, ws.sigma};
}

void SliceModel::accumulate_input_grad(double traffic, std::span<const double> r, double g_mu,
                                       double g_sigma, std::span<double> grad) const {
    check_inputs(*this, traffic, r);
    Workspace& ws = workspace();
    forward(*this, traffic, r, ws);
    std::vector<double> input_grad;
    backward(*this, ws, g_mu, g_sigma, &input_grad, nullptr);
    for (int k = 0; k < arch.resource_dim; ++k) grad[k] += input_grad[k + 1];
}

SliceModel init_model(const ModelArch& arch, std::uint64_t seed) {
    if (arch.resource_dim < 1 || arch.shared_layers < 1 || arch.hidden_units < 1 ||
        arch.branch_units < 1) {
        throw std::invalid_argument("init_model: invalid architecture");
    }
    SliceModel m;
    m.arch = arch;
    m.norm_mean.assign(arch.input_dim(), 0.0);
    m.norm_std.assign(arch.input_dim(), 1.0);
    Rng rng(derive_seed(seed, "init"));
    int in = arch.input_dim();
    for (int l = 0; l < arch.shared_layers; ++l) {
        m.shared.push_back(init_layer(in, arch.hidden_units, rng));
        in = arch.hidden_units;
    }
    m.mean_hidden = init_layer(in, arch.branch_units, rng);
    m.mean_head = init_layer(arch.branch_units, 1, rng);
    m.std_hidden = init_layer(in, arch.branch_units, rng);
    m.std_head = init_layer(arch.branch_units, 1, rng);
    return m;
}

MuSigma predict_dist(const SliceModel& model, double traffic, const ResourceVector& r) {
    return model.predict(traffic, std::span<const double>(r.values));
}

double nll_loss(const SliceModel& model, const std::vector<const QoSRow*>& batch) {
    if (batch.empty()) throw std::invalid_argument("nll_loss: empty batch");
    double acc = 0.0;
    for (const QoSRow* row : batch) {
        const MuSigma d = model.predict(row->traffic, std::span<const double>(row->r.values));
        acc += gaussian_nll(row->qos, d.mu, d.sigma);
    }
    return acc / static_cast<double>(batch.size());
}

SplitMetrics model_metrics(const SliceModel& model, const std::vector<const QoSRow*>& rows) {
    if (rows.empty()) throw std::invalid_argument("model_metrics: empty split");
    SplitMetrics out;
    for (const QoSRow* row : rows) {
        const MuSigma d = model.predict(row->traffic, std::span<const double>(row->r.values));
        const double err = d.mu - row->qos;
        out.nll += gaussian_nll(row->qos, d.mu, d.sigma);
        out.mse += err * err;
        out.mae += std::abs(err);
    }
    const double n = static_cast<double>(rows.size());
    out.nll /= n;
    out.mse /= n;
    out.mae /= n;
    return out;
}

double sample_qos_reparam(const SliceModel& model, double traffic, const ResourceVector& r,
                          double eps) {
    if (!std::isfinite(eps)) throw std::invalid_argument("sample_qos_reparam: non-finite eps");
    const MuSigma d = predict_dist(model, traffic, r);
    return d.mu + d.sigma * eps;
}

std::vector<double> grad_qos_wrt_r(const SliceModel& model, double traffic,
                                   const ResourceVector& r, double eps) {
    if (!std::isfinite(eps)) throw std::invalid_argument("grad_qos_wrt_r: non-finite eps");
    std::vector<double> grad(model.arch.resource_dim, 0.0);
    model.accumulate_input_grad(traffic, std::span<const double>(r.values), 1.0, eps,
                                std::span<double>(grad));
    return grad;
}

void train(SliceModel& model, const QoSDataset& dataset, const TrainConfig& cfg) {
    if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("train: invalid configuration");
    }
    const auto train_rows = dataset.split_rows(Split::Train);
    const auto val_rows = dataset.split_rows(Split::Validation);
    if (train_rows.empty() || val_rows.empty()) {
        throw std::invalid_argument("train: dataset is missing train or validation split");
    }

    // normalization statistics from the training split, frozen from here on
    const int d = model.arch.input_dim();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (const QoSRow* row : train_rows) {
        mean[0] += row->traffic;
        for (int k = 1; k < d; ++k) mean[k] += row->r[k - 1];
    }
    for (double& v : mean) v /= static_cast<double>(train_rows.size());
    for (const QoSRow* row : train_rows) {
        const double dx = row->traffic - mean[0];
        var[0] += dx * dx;
        for (int k = 1; k < d; ++k) {
            const double dr = row->r[k - 1] - mean[k];
            var[k] += dr * dr;
        }
    }
    model.norm_mean = mean;
    model.norm_std.resize(d);
    for (int k = 0; k < d; ++k) {
        model.norm_std[k] = std::max(std::sqrt(var[k] / train_rows.size()), 1e-12);
    }

    ModelGrad grad, velocity;
    grad.match(model);
    velocity.match(model);

    Rng rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<std::size_t> order(train_rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    Workspace& ws = workspace();
    model.history.clear();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = epoch >= cfg.lr_decay_epoch ? cfg.learning_rate * cfg.lr_decay_factor
                                                      : cfg.learning_rate;
        // Fisher-Yates shuffle
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            grad.match(model); // zero
            for (std::size_t i = start; i < stop; ++i) {
                const QoSRow* row = train_rows[order[i]];
                forward(model, row->traffic, std::span<const double>(row->r.values), ws);
                const double res = ws.mu - row->qos;
                const double inv_s2 = 1.0 / (ws.sigma * ws.sigma);
                const double g_mu = res * inv_s2;
                const double g_sigma = 1.0 / ws.sigma - res * res * inv_s2 / ws.sigma;
                backward(model, ws, g_mu, g_sigma, nullptr, &grad);
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            for (std::size_t l = 0; l < model.shared.size(); ++l) {
                sgd_step(model.shared[l], grad.shared[l], velocity.shared[l], lr, cfg.momentum,
                         scale);
            }
            sgd_step(model.mean_hidden, grad.mean_hidden, velocity.mean_hidden, lr, cfg.momentum,
                     scale);
            sgd_step(model.mean_head, grad.mean_head, velocity.mean_head, lr, cfg.momentum,
                     scale);
            sgd_step(model.std_hidden, grad.std_hidden, velocity.std_hidden, lr, cfg.momentum,
                     scale);
            sgd_step(model.std_head, grad.std_head, velocity.std_head, lr, cfg.momentum, scale);
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.learning_rate = lr;
        const SplitMetrics tm = model_metrics(model, train_rows);
        const SplitMetrics vm = model_metrics(model, val_rows);
        em.train_nll = tm.nll;
        em.train_mse = tm.mse;
        em.val_nll = vm.nll;
        em.val_mse = vm.mse;
        model.history.push_back(em);
    }
}

namespace {

nlohmann::json layer_to_json(const DenseLayer& l) {
    return {{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}};
}

DenseLayer layer_from_json(const nlohmann::json& j, const std::string& name) {
    DenseLayer l;
    try {
        l.in = j.at("in").get<int>();
        l.out = j.at("out").get<int>();
        l.w = j.at("w").get<std::vector<double>>();
        l.b = j.at("b").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file: bad layer '" + name + "': " + e.what());
    }
    if (l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
        l.b.size() != static_cast<std::size_t>(l.out)) {
        throw std::runtime_error("model file: layer '" + name + "' has inconsistent shapes");
    }
    return l;
}

constexpr const char* kModelVersion = "microopt-model-v1";

} // namespace

void export_model(const SliceModel& model, const std::string& path) {
    nlohmann::json j;
    j["version"] = kModelVersion;
    j["arch"] = {{"resource_dim", model.arch.resource_dim},
                 {"shared_layers", model.arch.shared_layers},
                 {"hidden_units", model.arch.hidden_units},
                 {"branch_units", model.arch.branch_units}};
    j["normalization"] = {{"mean", model.norm_mean}, {"std", model.norm_std}};
    nlohmann::json shared = nlohmann::json::array();
    for (const auto& l : model.shared) shared.push_back(layer_to_json(l));
    j["layers"] = {{"shared", shared},
                   {"mean_hidden", layer_to_json(model.mean_hidden)},
                   {"mean_head", layer_to_json(model.mean_head)},
                   {"std_hidden", layer_to_json(model.std_hidden)},
                   {"std_head", layer_to_json(model.std_head)}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

SliceModel import_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file: parse error in " + path + ": " + e.what());
    }
    if (!j.contains("version")) throw std::runtime_error("model file: missing field 'version'");
    if (j["version"] != kModelVersion) {
        throw std::runtime_error("model file: incompatible version '" +
                                 j["version"].get<std::string>() + "', expected '" +
                                 kModelVersion + "'");
    }
    SliceModel m;
    try {
        const auto& arch = j.at("arch");
        m.arch.resource_dim = arch.at("resource_dim").get<int>();
        m.arch.shared_layers = arch.at("shared_layers").get<int>();
        m.arch.hidden_units = arch.at("hidden_units").get<int>();
        m.arch.branch_units = arch.at("branch_units").get<int>();
        m.norm_mean = j.at("normalization").at("mean").get<std::vector<double>>();
        m.norm_std = j.at("normalization").at("std").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model file: bad header: ") + e.what());
    }
    if (m.norm_mean.size() != static_cast<std::size_t>(m.arch.input_dim()) ||
        m.norm_std.size() != static_cast<std::size_t>(m.arch.input_dim())) {
        throw std::runtime_error("model file: normalization length mismatch");
    }
    try {
        const auto& layers = j.at("layers");
        for (std::size_t i = 0; i < layers.at("shared").size(); ++i) {
            m.shared.push_back(
                layer_from_json(layers.at("shared").at(i), "shared" + std::to_string(i)));
        }
        m.mean_hidden = layer_from_json(layers.at("mean_hidden"), "mean_hidden");
        m.mean_head = layer_from_json(layers.at("mean_head"), "mean_head");
        m.std_hidden = layer_from_json(layers.at("std_hidden"), "std_hidden");
        m.std_head = layer_from_json(layers.at("std_head"), "std_head");
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model file: bad layers: ") + e.what());
    }
    if (m.shared.size() != static_cast<std::size_t>(m.arch.shared_layers)) {
        throw std::runtime_error("model file: shared layer count mismatch");
    }
    return m;
}

}  // namespace microopt
