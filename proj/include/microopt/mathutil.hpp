#pragma once

#include <cmath>
#include <limits>

namespace microopt {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kLnTwoPi = 1.8378770664093454835606594728112;

// ln(1 + e^x) with an overflow-safe branch for large |x|
inline double softplus(double x) {
    if (x > 30.0) return x;            // e^-x below double noise
    if (x < -30.0) return std::exp(x); // ln(1+t) ~ t
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// sigmoid clamped into the open interval (0, 1); saturation to exactly 0 or 1
// would break the strict range invariants of the surrogate degradation
inline double logistic01(double x) {
    const double v = sigmoid(x);
    if (v <= 0.0) return std::numeric_limits<double>::min();
    if (v >= 1.0) return 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return v;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi); }

// negative log density of N(mu, sigma) at q
inline double gaussian_nll(double q, double mu, double sigma) {
    const double z = (q - mu) / sigma;
    return 0.5 * kLnTwoPi + std::log(sigma) + 0.5 * z * z;
}

}  // namespace microopt
