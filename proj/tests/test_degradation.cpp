#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "microopt/degradation.hpp"
#include "microopt/mathutil.hpp"
#include "microopt/model_adapters.hpp"
#include "microopt/rng.hpp"
#include "microopt/slicemodel.hpp"

using namespace microopt;

namespace {

// independent reference: plain per-slot enumeration of the weighted average
double beta_bruteforce(const std::vector<double>& x, const std::vector<double>& q,
                       double q_thresh) {
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (q[t] <= q_thresh) num += x[t];
        den += x[t];
    }
    return num / den;
}

OracleParams noiseless() {
    OracleParams p;
    p.noise_base = 0.0;
    p.noise_slope = 0.0;
    return p;
}

} // namespace

TEST_CASE("strict degradation worked examples") {
    CHECK(beta_strict(TrafficSeries({1, 1, 1, 1}), std::vector<double>{6, 7, 8, 9}, 5.0) == 0.0);
    CHECK(beta_strict(TrafficSeries({1, 1, 1, 1}), std::vector<double>{4, 6, 6, 6}, 5.0) ==
          doctest::Approx(0.25));
    CHECK(beta_strict(TrafficSeries({3, 1}), std::vector<double>{4, 6}, 5.0) ==
          doctest::Approx(0.75));
}

TEST_CASE("strict degradation error paths") {
    CHECK_THROWS(beta_strict(TrafficSeries({0, 0}), std::vector<double>{1, 2}, 5.0));
    CHECK_THROWS(beta_strict(TrafficSeries({1, 1, 1}), std::vector<double>{1, 2}, 5.0));
}

TEST_CASE("strict degradation equals brute-force enumeration exactly") {
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const int tau = 1 + static_cast<int>(rng.below(50));
        std::vector<double> x(tau), q(tau);
        for (int t = 0; t < tau; ++t) {
            x[t] = rng.uniform(0.0, 5.0);
            q[t] = rng.uniform(0.0, 8.0);
        }
        x[static_cast<std::size_t>(rng.below(tau))] += 1.0; // ensure positive total
        const double thresh = rng.uniform(0.0, 8.0);
        CHECK(beta_strict(TrafficSeries(x), q, thresh) == beta_bruteforce(x, q, thresh));
    }
}

TEST_CASE("strict degradation is invariant to traffic rescaling") {
    Rng rng(37);
    for (int i = 0; i < 200; ++i) {
        const int tau = 2 + static_cast<int>(rng.below(30));
        std::vector<double> x(tau), q(tau);
        for (int t = 0; t < tau; ++t) {
            x[t] = rng.uniform(0.1, 5.0);
            q[t] = rng.uniform(0.0, 8.0);
        }
        const double c = rng.uniform(0.1, 20.0);
        std::vector<double> xs(tau);
        for (int t = 0; t < tau; ++t) xs[t] = c * x[t];
        CHECK(beta_strict(TrafficSeries(x), q, 5.0) ==
              doctest::Approx(beta_strict(TrafficSeries(xs), q, 5.0)).epsilon(1e-12));
    }
}

TEST_CASE("surrogate degradation worked examples") {
    // all slots exactly at the threshold -> logistic(0) = 1/2
    CHECK(beta_surrogate(TrafficSeries({1, 1}), std::vector<double>{5.0, 5.0}, 5.0, 5.0) ==
          doctest::Approx(0.5));
    // one slot 1 Mbps below threshold at rho = 5
    CHECK(beta_surrogate(TrafficSeries({1}), std::vector<double>{4.0}, 5.0, 5.0) ==
          doctest::Approx(sigmoid(5.0)).epsilon(1e-6));
    CHECK(sigmoid(5.0) == doctest::Approx(0.9933).epsilon(1e-3));
}

TEST_CASE("surrogate converges to strict as rho grows") {
    Rng rng(41);
    for (int i = 0; i < 100; ++i) {
        const int tau = 1 + static_cast<int>(rng.below(20));
        std::vector<double> x(tau), q(tau);
        for (int t = 0; t < tau; ++t) {
            x[t] = rng.uniform(0.1, 5.0);
            q[t] = rng.uniform(0.0, 8.0); // almost surely != threshold
        }
        const TrafficSeries traffic{x};
        CHECK(beta_surrogate(traffic, q, 5.0, 1e6) ==
              doctest::Approx(beta_strict(traffic, q, 5.0)).epsilon(1e-9));
    }
}

TEST_CASE("degradations stay in range and respond monotonically to QoS") {
    Rng rng(43);
    for (int i = 0; i < 300; ++i) {
        const int tau = 1 + static_cast<int>(rng.below(20));
        std::vector<double> x(tau), q(tau);
        for (int t = 0; t < tau; ++t) {
            x[t] = rng.uniform(0.1, 5.0);
            q[t] = rng.uniform(-2.0, 10.0);
        }
        const TrafficSeries traffic{x};
        const double bs = beta_strict(traffic, q, 5.0);
        const double bg = beta_surrogate(traffic, q, 5.0, 5.0);
        CHECK(bs >= 0.0);
        CHECK(bs <= 1.0);
        CHECK(bg > 0.0);
        CHECK(bg < 1.0);
        // raising any single q never increases either measure
        std::vector<double> q2 = q;
        const std::size_t t = rng.below(tau);
        q2[t] += rng.uniform(0.0, 5.0);
        CHECK(beta_strict(traffic, q2, 5.0) <= bs);
        CHECK(beta_surrogate(traffic, q2, 5.0, 5.0) <= bg);
    }
}

TEST_CASE("epsilon panels are deterministic and correctly shaped") {
    const EpsilonPanel a = make_epsilon_panel(8, 16, 77);
    const EpsilonPanel b = make_epsilon_panel(8, 16, 77);
    CHECK(a.data == b.data);
    CHECK(a.data.size() == 8 * 16);
    CHECK_THROWS(make_epsilon_panel(0, 4, 1));
}

TEST_CASE("expected beta of a deterministic model above threshold") {
    // oracle-as-model: sigma = 0, mu = 5.5 > q_thresh
    const OracleMeanModel model(noiseless());
    const TrafficSeries traffic = TrafficSeries::constant(5.0, 20);
    const ResourceVector r(2750.0, 40.0);
    SurrogateConfig cfg;
    const EpsilonPanel panel = make_epsilon_panel(cfg.n_mc, 20, 5);
    const BetaEstimate strict =
        expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Strict, panel);
    CHECK(strict.value == 0.0);
    const BetaEstimate sur =
        expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Surrogate, panel);
    CHECK(sur.value < 0.5);
    CHECK(sur.value > 0.0);
}

TEST_CASE("expected beta stays in range as replicates vary") {
    const SliceModel model = init_model(ModelArch{}, 3);
    const TrafficSeries traffic = TrafficSeries::constant(3.0, 10);
    const ResourceVector r(2000.0, 20.0);
    for (int n_mc : {1, 64}) {
        SurrogateConfig cfg;
        cfg.n_mc = n_mc;
        const EpsilonPanel panel = make_epsilon_panel(n_mc, 10, 9);
        const BetaEstimate est =
            expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Surrogate, panel);
        CHECK(est.value > 0.0);
        CHECK(est.value < 1.0);
    }
}

TEST_CASE("expected beta is deterministic given a fixed panel") {
    const SliceModel model = init_model(ModelArch{}, 21);
    const TrafficSeries traffic = TrafficSeries::constant(4.0, 12);
    const ResourceVector r(1500.0, 25.0);
    SurrogateConfig cfg;
    const EpsilonPanel panel = make_epsilon_panel(cfg.n_mc, 12, 13);
    const BetaEstimate a = expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Surrogate, panel);
    const BetaEstimate b = expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Surrogate, panel);
    CHECK(a.value == b.value);
    CHECK(a.grad_r == b.grad_r);
}

TEST_CASE("surrogate gradient matches central finite differences") {
    const SliceModel model = init_model(ModelArch{}, 57);
    Rng rng(59);
    SurrogateConfig cfg;
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int tau = 4;
        std::vector<double> x(tau);
        for (auto& v : x) v = rng.uniform(0.5, 5.0);
        const TrafficSeries traffic{x};
        const ResourceVector r(rng.uniform(300, 4000), rng.uniform(3, 45));
        const EpsilonPanel panel = make_epsilon_panel(cfg.n_mc, tau, derive_seed(61, trial));
        const BetaEstimate est =
            expected_beta(model, traffic, r, 5.0, cfg, BetaMode::Surrogate, panel);

        bool fd_valid = true;
        std::vector<double> fd(r.dim(), 0.0);
        for (std::size_t k = 0; k < r.dim(); ++k) {
            const double h = 1e-3 * std::max(std::abs(r[k]), 1.0);
            auto value_at = [&](double delta) {
                ResourceVector rp = r;
                rp[k] += delta;
                return expected_beta(model, traffic, rp, 5.0, cfg, BetaMode::Surrogate, panel)
                    .value;
            };
            const double d1 = (value_at(h) - value_at(-h)) / (2 * h);
            const double d2 = (value_at(h / 2) - value_at(-h / 2)) / h;
            // skip points where the difference quotient itself is unstable
            // (a ReLU kink inside the stencil)
            if (std::abs(d1 - d2) > 1e-4 * std::max(1.0, std::abs(d1))) fd_valid = false;
            fd[k] = d2;
        }
        if (!fd_valid) continue;
        ++checked;
        for (std::size_t k = 0; k < r.dim(); ++k) {
            CHECK(std::abs(est.grad_r[k] - fd[k]) <=
                  std::max(1e-3 * std::abs(fd[k]), 1e-6));
        }
    }
    CHECK(checked >= 20);
}
