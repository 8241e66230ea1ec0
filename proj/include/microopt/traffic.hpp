#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "microopt/domain.hpp"

namespace microopt {

// Hourly variability extracted from a week-long activity trace, scaled to
// users/s: sigma_mean is the mean of the per-hour-of-day standard deviations
// across the week, sigma_max their maximum.
struct TraceStats {
    double sigma_mean = 0.0;
    double sigma_max = 0.0;
};

// Truncated normal slice-traffic distribution on [0, center + 4 * std].
struct TrafficDistribution {
    double center = 1.0; // users/s
    double std = 0.0;

    double upper() const { return center + 4.0 * std; }
};

struct TracePoint {
    std::string timestamp; // ISO-8601
    double activity = 0.0;
};

// Parse a `timestamp,activity` CSV, normalize activity to [0,1], compute
// per-hour-of-day standard deviations across the days, and scale the
// resulting stats by peak_users_per_s.
TraceStats ingest_trace_csv(const std::string& path, double peak_users_per_s = 5.0);

// Synthetic week of hourly activity: diurnal sinusoid with weekday/weekend
// modulation plus seeded Gaussian noise, clamped at zero. 168 points.
std::vector<TracePoint> synth_weekly_trace(std::uint64_t seed, double amplitude, double noise);

void write_trace_csv(const std::vector<TracePoint>& trace, const std::string& path);

// tau independent truncated-normal draws via rejection sampling.
TrafficSeries sample_traffic_series(const TrafficDistribution& dist, std::size_t tau,
                                    std::uint64_t seed);

}  // namespace microopt
