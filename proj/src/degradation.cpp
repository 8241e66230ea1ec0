#include "microopt/degradation.hpp"

#include <cmath>
#include <stdexcept>

#include "microopt/mathutil.hpp"
#include "microopt/rng.hpp"

namespace microopt {

EpsilonPanel make_epsilon_panel(int n_mc, int tau, std::uint64_t seed) {
    if (n_mc < 1 || tau < 1) {
        throw std::invalid_argument("make_epsilon_panel: n_mc and tau must be >= 1");
    }
    EpsilonPanel panel;
    panel.n_mc = n_mc;
    panel.tau = tau;
    panel.data.resize(static_cast<std::size_t>(n_mc) * tau);
    Rng rng(seed);
    for (auto& v : panel.data) v = rng.normal();
    return panel;
}

namespace {

void check_beta_inputs(const TrafficSeries& traffic, std::span<const double> qos) {
    if (traffic.tau() != qos.size()) {
        throw std::invalid_argument("beta: traffic and qos lengths differ");
    }
    if (auto v = validate_traffic(traffic); !v) {
        throw std::invalid_argument("beta: " + v.reason);
    }
}

} // namespace

double beta_strict(const TrafficSeries& traffic, std::span<const double> qos, double q_thresh) {
    check_beta_inputs(traffic, qos);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < qos.size(); ++t) {
        const double x = traffic.values[t];
        if (qos[t] <= q_thresh) num += x;
        den += x;
    }
    return num / den;
}

double beta_surrogate(const TrafficSeries& traffic, std::span<const double> qos, double q_thresh,
                      double rho) {
    check_beta_inputs(traffic, qos);
    if (!(rho > 0.0)) throw std::invalid_argument("beta_surrogate: rho must be positive");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < qos.size(); ++t) {
        const double x = traffic.values[t];
        num += x * logistic01(rho * (q_thresh - qos[t]));
        den += x;
    }
    return num / den;
}

namespace {

void check_panel(const TrafficSeries& traffic, const EpsilonPanel& panel) {
    if (auto v = validate_traffic(traffic); !v) {
        throw std::invalid_argument("expected_beta: " + v.reason);
    }
    if (panel.tau != static_cast<int>(traffic.tau()) || panel.n_mc < 1) {
        throw std::invalid_argument("expected_beta: panel shape does not match tau");
    }
}

} // namespace

BetaEstimate expected_beta(const QosModel& model, const TrafficSeries& traffic,
                           const ResourceVector& r, double q_thresh, const SurrogateConfig& cfg,
                           BetaMode mode, const EpsilonPanel& panel) {
    check_panel(traffic, panel);
    if (panel.n_mc != cfg.n_mc) {
        throw std::invalid_argument("expected_beta: panel shape does not match (n_mc, tau)");
    }

    if (mode == BetaMode::Strict) {
        BetaEstimate est;
        est.value = expected_beta_value(model, traffic, r, q_thresh, cfg.rho, mode, panel);
        return est;
    }

    const std::size_t tau = traffic.tau();
    const double total = traffic.total();
    const int n_mc = panel.n_mc;

    BetaEstimate est;
    est.grad_r.assign(r.dim(), 0.0);

    double num = 0.0;
    for (std::size_t t = 0; t < tau; ++t) {
        const double x = traffic.values[t];
        if (x <= 0.0) continue; // zero weight in the traffic-weighted average
        const double w = x / total;
        const MuSigma d = model.predict(x, std::span<const double>(r.values));

        // Per-slot sums of the logistic derivative and its eps-weighted
        // counterpart let one backward pass per slot carry the entire
        // panel's gradient contribution.
        double slot_val = 0.0;
        double dsum = 0.0;
        double dsum_eps = 0.0;
        for (int m = 0; m < n_mc; ++m) {
            const double eps = panel.at(m, static_cast<int>(t));
            const double q = d.mu + d.sigma * eps;
            const double s = logistic01(cfg.rho * (q_thresh - q));
            const double sprime = cfg.rho * s * (1.0 - s);
            slot_val += s;
            dsum += sprime;
            dsum_eps += sprime * eps;
        }
        num += x * (slot_val / n_mc);
        const double g_mu = -w * dsum / n_mc;
        const double g_sigma = -w * dsum_eps / n_mc;
        model.accumulate_input_grad(x, std::span<const double>(r.values), g_mu, g_sigma,
                                    std::span<double>(est.grad_r));
    }
    est.value = num / total;
    return est;
}

double expected_beta_value(const QosModel& model, const TrafficSeries& traffic,
                           const ResourceVector& r, double q_thresh, double rho, BetaMode mode,
                           const EpsilonPanel& panel) {
    check_panel(traffic, panel);

    const std::size_t tau = traffic.tau();
    const double total = traffic.total();
    const int n_mc = panel.n_mc;

    // numerator/denominator form so a fully degraded interval is exactly 1
    double num = 0.0;
    for (std::size_t t = 0; t < tau; ++t) {
        const double x = traffic.values[t];
        if (x <= 0.0) continue;
        const MuSigma d = model.predict(x, std::span<const double>(r.values));
        if (mode == BetaMode::Strict) {
            int degraded = 0;
            for (int m = 0; m < n_mc; ++m) {
                const double q = d.mu + d.sigma * panel.at(m, static_cast<int>(t));
                if (q <= q_thresh) ++degraded;
            }
            num += x * (static_cast<double>(degraded) / n_mc);
        } else {
            double slot_val = 0.0;
            for (int m = 0; m < n_mc; ++m) {
                const double q = d.mu + d.sigma * panel.at(m, static_cast<int>(t));
                slot_val += logistic01(rho * (q_thresh - q));
            }
            num += x * (slot_val / n_mc);
        }
    }
    return num / total;
}

}  // namespace microopt
