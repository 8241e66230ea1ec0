#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "microopt/mathutil.hpp"
#include "microopt/rng.hpp"
#include "microopt/slicemodel.hpp"

using namespace microopt;

namespace {

// zero every weight so the heads emit exactly their biases; the sigma head
// bias is set through the softplus inverse
SliceModel constant_model(double mu, double sigma) {
    SliceModel m = init_model(ModelArch{}, 1);
    for (auto& layer : m.shared) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    for (DenseLayer* layer : {&m.mean_hidden, &m.mean_head, &m.std_hidden, &m.std_head}) {
        std::fill(layer->w.begin(), layer->w.end(), 0.0);
        std::fill(layer->b.begin(), layer->b.end(), 0.0);
    }
    m.mean_head.b[0] = mu;
    m.std_head.b[0] = std::log(std::expm1(sigma)); // softplus inverse
    return m;
}

QoSRow make_row(double x, double cpu, double bw, double q) {
    QoSRow row;
    row.traffic = x;
    row.r = ResourceVector(cpu, bw);
    row.qos = q;
    return row;
}

QoSDataset tiny_deterministic_dataset() {
    // q = 1 + 0.5 * normalized(cpu): an easy smooth target
    QoSDataset ds;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(1, 5);
        const double cpu = rng.uniform(500, 4000);
        const double bw = rng.uniform(5, 40);
        QoSRow row = make_row(x, cpu, bw, 1.0 + 0.002 * cpu - 0.1 * x);
        row.split = i % 10 == 0 ? Split::Validation : Split::Train;
        ds.rows.push_back(row);
    }
    return ds;
}

} // namespace

TEST_CASE("initialization is seed-deterministic") {
    const SliceModel a = init_model(ModelArch{}, 42);
    const SliceModel b = init_model(ModelArch{}, 42);
    const SliceModel c = init_model(ModelArch{}, 43);
    CHECK(a.shared[0].w == b.shared[0].w);
    CHECK(a.std_head.b == b.std_head.b);
    CHECK(a.shared[0].w != c.shared[0].w);
}

TEST_CASE("fresh models emit positive sigma") {
    Rng rng(3);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const SliceModel m = init_model(ModelArch{}, seed);
        for (int i = 0; i < 32; ++i) {
            const MuSigma d =
                predict_dist(m, rng.uniform(0.5, 6), ResourceVector(rng.uniform(0, 4500),
                                                                    rng.uniform(0, 50)));
            CHECK(d.sigma > 0.0);
        }
    }
}

TEST_CASE("prediction is pure and rejects non-finite inputs") {
    const SliceModel m = init_model(ModelArch{}, 9);
    const ResourceVector r(1200.0, 30.0);
    const MuSigma a = predict_dist(m, 2.5, r);
    const MuSigma b = predict_dist(m, 2.5, r);
    CHECK(a.mu == b.mu);
    CHECK(a.sigma == b.sigma);
    CHECK_THROWS(predict_dist(m, std::nan(""), r));
    CHECK_THROWS(predict_dist(m, 2.5, ResourceVector(std::nan(""), 3.0)));
}

TEST_CASE("nll closed forms") {
    // mu = q, sigma = 1 -> 0.5 ln(2 pi)
    const SliceModel unit = constant_model(3.0, 1.0);
    QoSRow row = make_row(2.0, 1000.0, 20.0, 3.0);
    CHECK(nll_loss(unit, {&row}) == doctest::Approx(0.9189385).epsilon(1e-6));

    // mu = q, sigma = 1/sqrt(2 pi) -> density 1, loss 0
    const SliceModel peaked = constant_model(3.0, 1.0 / std::sqrt(kTwoPi));
    CHECK(std::abs(nll_loss(peaked, {&row})) < 1e-7);

    CHECK_THROWS(nll_loss(unit, {}));
}

TEST_CASE("reparameterized sampling") {
    const SliceModel m = constant_model(3.0, 0.5);
    const ResourceVector r(1000.0, 10.0);
    CHECK(sample_qos_reparam(m, 2.0, r, 0.0) == doctest::Approx(3.0));
    CHECK(sample_qos_reparam(m, 2.0, r, 1.0) == doctest::Approx(3.5));
    const double up = sample_qos_reparam(m, 2.0, r, 0.7);
    const double dn = sample_qos_reparam(m, 2.0, r, -0.7);
    CHECK(0.5 * (up + dn) == doctest::Approx(3.0));
}

TEST_CASE("input gradient matches central finite differences") {
    Rng rng(71);
    int checked = 0;
    for (int trial = 0; trial < 300 && checked < 100; ++trial) {
        const SliceModel m = init_model(ModelArch{}, derive_seed(100, trial));
        const double x = rng.uniform(0.5, 5.5);
        const ResourceVector r(rng.uniform(200, 4400), rng.uniform(2, 48));
        const double eps = rng.normal();
        const auto grad = grad_qos_wrt_r(m, x, r, eps);

        bool fd_valid = true;
        std::vector<double> fd(r.dim());
        for (std::size_t k = 0; k < r.dim(); ++k) {
            const double h = 1e-3 * std::max(std::abs(r[k]), 1.0);
            auto value_at = [&](double delta) {
                ResourceVector rp = r;
                rp[k] += delta;
                return sample_qos_reparam(m, x, rp, eps);
            };
            const double d1 = (value_at(h) - value_at(-h)) / (2 * h);
            const double d2 = (value_at(h / 2) - value_at(-h / 2)) / h;
            if (std::abs(d1 - d2) > 1e-4 * std::max(1.0, std::abs(d1))) fd_valid = false;
            fd[k] = d2;
        }
        if (!fd_valid) continue; // ReLU kink inside the stencil
        ++checked;
        for (std::size_t k = 0; k < r.dim(); ++k) {
            CHECK(std::abs(grad[k] - fd[k]) <= std::max(1e-3 * std::abs(fd[k]), 1e-6));
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("eps = 0 gives the mean gradient; zero model gives zero gradient") {
    const SliceModel m = init_model(ModelArch{}, 15);
    const ResourceVector r(2000.0, 25.0);
    const auto g_mean = grad_qos_wrt_r(m, 3.0, r, 0.0);
    std::vector<double> acc(2, 0.0);
    m.accumulate_input_grad(3.0, std::span<const double>(r.values), 1.0, 0.0,
                            std::span<double>(acc));
    CHECK(g_mean[0] == doctest::Approx(acc[0]));
    CHECK(g_mean[1] == doctest::Approx(acc[1]));

    const SliceModel zero = constant_model(2.0, 0.3);
    const auto gz = grad_qos_wrt_r(zero, 3.0, r, 0.7);
    CHECK(gz[0] == 0.0);
    CHECK(gz[1] == 0.0);
}

TEST_CASE("training reduces the loss on an easy surface") {
    const QoSDataset ds = tiny_deterministic_dataset();
    SliceModel m = init_model(ModelArch{}, 2);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.lr_decay_epoch = 50;
    cfg.learning_rate = 0.003;
    cfg.seed = 11;
    train(m, ds, cfg);
    REQUIRE(m.history.size() == 60);
    CHECK(m.history.back().val_nll < m.history.front().val_nll);
    CHECK(m.history.back().train_nll < m.history.front().train_nll);
}

TEST_CASE("zero epochs leaves the model unchanged") {
    const QoSDataset ds = tiny_deterministic_dataset();
    SliceModel m = init_model(ModelArch{}, 2);
    const auto w_before = m.shared[0].w;
    TrainConfig cfg;
    cfg.epochs = 0;
    train(m, ds, cfg);
    CHECK(m.shared[0].w == w_before);
    CHECK(m.history.empty());
}

TEST_CASE("training is deterministic per seed") {
    const QoSDataset ds = tiny_deterministic_dataset();
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = 77;
    SliceModel a = init_model(ModelArch{}, 4);
    SliceModel b = init_model(ModelArch{}, 4);
    train(a, ds, cfg);
    train(b, ds, cfg);
    CHECK(a.shared[2].w == b.shared[2].w);
    CHECK(a.history.back().train_nll == b.history.back().train_nll);
}

TEST_CASE("training requires both splits") {
    QoSDataset ds;
    for (int i = 0; i < 10; ++i) ds.rows.push_back(make_row(1, 1000, 10, 2.0));
    SliceModel m = init_model(ModelArch{}, 1);
    CHECK_THROWS(train(m, ds, TrainConfig{}));
}

TEST_CASE("metrics of a perfect deterministic fit") {
    const SliceModel m = constant_model(4.0, 0.1);
    QoSRow r1 = make_row(1, 1000, 10, 4.0);
    QoSRow r2 = make_row(2, 2000, 20, 4.0);
    const SplitMetrics sm = model_metrics(m, {&r1, &r2});
    CHECK(sm.mse == 0.0);
    CHECK(sm.mae == 0.0);
    const SplitMetrics again = model_metrics(m, {&r1, &r2});
    CHECK(sm.nll == again.nll);
    CHECK_THROWS(model_metrics(m, {}));
}

TEST_CASE("export and import round trip bit-exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "microopt_model_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "model.json").string();

    QoSDataset ds = tiny_deterministic_dataset();
    SliceModel m = init_model(ModelArch{}, 31);
    TrainConfig cfg;
    cfg.epochs = 5;
    train(m, ds, cfg);
    export_model(m, path);
    const SliceModel back = import_model(path);

    CHECK(back.norm_mean == m.norm_mean);
    CHECK(back.norm_std == m.norm_std);
    CHECK(back.shared[1].w == m.shared[1].w);
    CHECK(back.std_head.b == m.std_head.b);

    Rng rng(101);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(0.5, 6);
        const ResourceVector r(rng.uniform(0, 4500), rng.uniform(0, 50));
        const MuSigma da = predict_dist(m, x, r);
        const MuSigma db = predict_dist(back, x, r);
        CHECK(da.mu == db.mu);
        CHECK(da.sigma == db.sigma);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("import rejects truncated and mismatched files") {
    const auto dir = std::filesystem::temp_directory_path() / "microopt_model_bad";
    std::filesystem::create_directories(dir);

    const auto truncated = (dir / "truncated.json").string();
    {
        std::ofstream out(truncated);
        out << "{\"version\": \"microopt-model-v1\", \"arch\": {\"resource_d";
    }
    CHECK_THROWS_WITH_AS(import_model(truncated), doctest::Contains("parse error"),
                         std::runtime_error);

    const auto wrong = (dir / "wrong_version.json").string();
    {
        std::ofstream out(wrong);
        out << "{\"version\": \"microopt-model-v999\"}";
    }
    CHECK_THROWS_WITH_AS(import_model(wrong), doctest::Contains("incompatible version"),
                         std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("softplus is overflow-safe") {
    CHECK(softplus(1000.0) == 1000.0);
    CHECK(softplus(-1000.0) >= 0.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(std::isfinite(softplus(700.0)));
}
