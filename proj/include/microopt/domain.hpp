#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace microopt {

// Per-slice allocation of K resources. The canonical experiment uses K = 2:
// index 0 = gNB CPU in millicores, index 1 = transport bandwidth in Mbps.
struct ResourceVector {
    std::vector<double> values;

    ResourceVector() = default;
    explicit ResourceVector(std::vector<double> v) : values(std::move(v)) {}
    ResourceVector(double cpu_millicores, double bandwidth_mbps)
        : values{cpu_millicores, bandwidth_mbps} {}

    std::size_t dim() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }

    double cpu_millicores() const { return values.at(0); }
    double bandwidth_mbps() const { return values.at(1); }
};

// Per-resource capacities R, same ordering as ResourceVector; all > 0.
struct CapacityVector {
    std::vector<double> values;

    CapacityVector() = default;
    explicit CapacityVector(std::vector<double> v) : values(std::move(v)) {}
    CapacityVector(double cpu_millicores, double bandwidth_mbps)
        : values{cpu_millicores, bandwidth_mbps} {}

    std::size_t dim() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
};

// Per-unit normalized cost weights eta. The defaults make one full eMBB
// allocation (4500 millicores, 50 Mbps) cost exactly 2.0 units.
struct CostWeights {
    std::vector<double> values;

    CostWeights() : values{1.0 / 4500.0, 1.0 / 50.0} {}
    explicit CostWeights(std::vector<double> v) : values(std::move(v)) {}

    std::size_t dim() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
};

struct SlaSpec {
    double q_thresh = 5.0;    // Mbps, QoS threshold
    double beta_thresh = 0.1; // acceptable degradation fraction in [0, 1]
    CostWeights weights;
};

// Slice traffic x(t) in users/s, one sample per second of the
// reconfiguration interval.
struct TrafficSeries {
    std::vector<double> values;

    TrafficSeries() = default;
    explicit TrafficSeries(std::vector<double> v) : values(std::move(v)) {}
    static TrafficSeries constant(double users_per_s, std::size_t tau) {
        return TrafficSeries(std::vector<double>(tau, users_per_s));
    }

    std::size_t tau() const { return values.size(); }
    double total() const;
};

struct Verdict {
    bool ok = true;
    std::string reason;

    explicit operator bool() const { return ok; }
};

// eta' r; throws std::invalid_argument on dimension mismatch
double normalized_cost(const CostWeights& weights, const ResourceVector& r);

Verdict validate_sla(const SlaSpec& sla);
Verdict validate_traffic(const TrafficSeries& traffic);

}  // namespace microopt
