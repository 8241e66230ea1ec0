#include "microopt/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "microopt/mathutil.hpp"
#include "microopt/rng.hpp"

namespace microopt {

namespace {

// expects ISO-8601 like 2024-01-03T14:00:00; returns the hour of day
int parse_hour(const std::string& timestamp, const std::string& path, std::size_t line_no) {
    if (timestamp.size() < 13 || timestamp[10] != 'T') {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": timestamp is not ISO-8601: '" + timestamp + "'");
    }
    const char h0 = timestamp[11];
    const char h1 = timestamp[12];
    if (h0 < '0' || h0 > '9' || h1 < '0' || h1 > '9') {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": bad hour field in timestamp '" + timestamp + "'");
    }
    const int hour = (h0 - '0') * 10 + (h1 - '0');
    if (hour > 23) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": hour out of range in '" + timestamp + "'");
    }
    return hour;
}

} // namespace

TraceStats ingest_trace_csv(const std::string& path, double peak_users_per_s) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace: " + path);

    std::vector<int> hours;
    std::vector<double> activity;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line.rfind("timestamp,", 0) != 0) {
                throw std::runtime_error(path + ":1: expected header 'timestamp,activity'");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": malformed row, expected 'timestamp,activity'");
        }
        const std::string ts = line.substr(0, comma);
        double value = 0.0;
        try {
            value = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": activity is not a number");
        }
        if (!std::isfinite(value)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": activity is not finite");
        }
        hours.push_back(parse_hour(ts, path, line_no));
        activity.push_back(value);
    }
    if (activity.size() < 24) {
        throw std::runtime_error(path + ": too few rows (" + std::to_string(activity.size()) +
                                 "), need at least 24");
    }

    // normalize activity to [0, 1]
    const auto [mn_it, mx_it] = std::minmax_element(activity.begin(), activity.end());
    const double mn = *mn_it, mx = *mx_it;
    const double range = mx - mn;
    if (range > 0.0) {
        for (double& v : activity) v = (v - mn) / range;
    } else {
        for (double& v : activity) v = 0.0;
    }

    // per-hour-of-day standard deviation across the week
    std::vector<std::vector<double>> by_hour(24);
    for (std::size_t i = 0; i < activity.size(); ++i) by_hour[hours[i]].push_back(activity[i]);

    TraceStats stats;
    double sum = 0.0;
    int used = 0;
    for (const auto& vals : by_hour) {
        if (vals.empty()) continue;
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(vals.size()));
        sum += sd;
        ++used;
        stats.sigma_max = std::max(stats.sigma_max, sd);
    }
    stats.sigma_mean = used > 0 ? sum / used : 0.0;
    stats.sigma_mean *= peak_users_per_s;
    stats.sigma_max *= peak_users_per_s;
    return stats;
}

std::vector<TracePoint> synth_weekly_trace(std::uint64_t seed, double amplitude, double noise) {
    if (amplitude < 0.0 || noise < 0.0) {
        throw std::invalid_argument("synth_weekly_trace: amplitude and noise must be >= 0");
    }
    Rng rng(seed);
    std::vector<TracePoint> trace;
    trace.reserve(7 * 24);
    char buf[32];
    for (int day = 0; day < 7; ++day) {
        const double week_factor = day < 5 ? 1.0 : 0.55; // quieter weekend
        for (int hour = 0; hour < 24; ++hour) {
            const double diurnal = 0.5 * (1.0 + std::sin(kTwoPi * (hour - 8) / 24.0));
            double v = 0.35 + amplitude * diurnal * week_factor + noise * rng.normal();
            v = std::max(0.0, v);
            std::snprintf(buf, sizeof(buf), "2024-01-%02dT%02d:00:00", day + 1, hour);
            trace.push_back({buf, v});
        }
    }
    return trace;
}

void write_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "timestamp,activity\n";
    char buf[64];
    for (const auto& p : trace) {
        std::snprintf(buf, sizeof(buf), "%.10g", p.activity);
        out << p.timestamp << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TrafficSeries sample_traffic_series(const TrafficDistribution& dist, std::size_t tau,
                                    std::uint64_t seed) {
    if (!(dist.center > 0.0)) {
        throw std::invalid_argument("sample_traffic_series: center must be positive");
    }
    if (dist.std < 0.0) {
        throw std::invalid_argument("sample_traffic_series: std must be nonnegative");
    }
    if (tau < 1) throw std::invalid_argument("sample_traffic_series: tau must be >= 1");

    TrafficSeries series;
    series.values.reserve(tau);
    Rng rng(seed);
    const double upper = dist.upper();
    for (std::size_t t = 0; t < tau; ++t) {
        double v = dist.center;
        if (dist.std > 0.0) {
            do {
                v = dist.center + dist.std * rng.normal();
            } while (v < 0.0 || v > upper);
        }
        series.values.push_back(v);
    }
    return series;
}

}  // namespace microopt
