#include "microopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "microopt/degradation.hpp"
#include "microopt/rng.hpp"

namespace microopt {

std::vector<double> RangeSpec::points() const {
    if (!(step > 0.0)) throw std::invalid_argument("RangeSpec: step must be positive");
    if (hi < lo) throw std::invalid_argument("RangeSpec: empty range");
    std::vector<double> pts;
    for (double v = lo; v <= hi + 1e-9 * step; v += step) pts.push_back(v);
    return pts;
}

std::string split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    throw std::invalid_argument("unknown split tag: " + name);
}

std::vector<const QoSRow*> QoSDataset::split_rows(Split s) const {
    std::vector<const QoSRow*> out;
    for (const auto& row : rows) {
        if (row.split == s) out.push_back(&row);
    }
    return out;
}

std::size_t QoSDataset::count(Split s) const {
    std::size_t n = 0;
    for (const auto& row : rows) {
        if (row.split == s) ++n;
    }
    return n;
}

double oracle_qos_mean(double traffic, const ResourceVector& r, const OracleParams& p) {
    if (!(traffic > 0.0)) {
        throw std::domain_error("oracle_qos_mean: traffic must be positive");
    }
    if (r.dim() != 2) {
        throw std::invalid_argument("oracle_qos_mean: expected (cpu, bandwidth) allocation");
    }
    const double gnb_rate = p.cpu_capacity_slope * r.cpu_millicores();
    const double shared = std::min(gnb_rate, r.bandwidth_mbps());
    return std::min(p.app_max_rate, shared / traffic);
}

double oracle_noise_std(double mu, const OracleParams& p) {
    return p.noise_base + p.noise_slope * mu;
}

double oracle_qos_sample(double traffic, const ResourceVector& r, const OracleParams& p,
                         std::uint64_t seed) {
    const double mu = oracle_qos_mean(traffic, r, p);
    Rng rng(seed);
    return std::max(0.0, mu + oracle_noise_std(mu, p) * rng.normal());
}

namespace {

std::vector<double> midpoints(const RangeSpec& range) {
    const auto pts = range.points();
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        mids.push_back(0.5 * (pts[i] + pts[i + 1]));
    }
    if (mids.empty()) mids.push_back(pts.front()); // degenerate single-point range
    return mids;
}

} // namespace

QoSDataset generate_grid_dataset(const GridSpec& grid, const OracleParams& p,
                                 std::uint64_t seed, double validation_fraction) {
    if (grid.samples_per_point < 1) {
        throw std::invalid_argument("generate_grid_dataset: samples_per_point must be >= 1");
    }
    const auto xs = grid.traffic_range.points();
    const auto bws = grid.bandwidth_range.points();
    const auto cpus = grid.cpu_range.points();
    if (xs.empty() || bws.empty() || cpus.empty()) {
        throw std::invalid_argument("generate_grid_dataset: empty grid");
    }

    QoSDataset ds;
    Rng split_rng(derive_seed(seed, "split"));
    std::uint64_t point_index = 0;
    for (double x : xs) {
        for (double cpu : cpus) {
            for (double bw : bws) {
                const ResourceVector r(cpu, bw);
                for (int s = 0; s < grid.samples_per_point; ++s) {
                    QoSRow row;
                    row.traffic = x;
                    row.r = r;
                    row.qos = oracle_qos_sample(x, r, p, derive_seed(seed, point_index));
                    row.split = split_rng.uniform() < validation_fraction ? Split::Validation
                                                                          : Split::Train;
                    ds.rows.push_back(std::move(row));
                    ++point_index;
                }
            }
        }
    }

    // off-grid test split at the midpoints between neighbouring grid steps
    for (double x : midpoints(grid.traffic_range)) {
        for (double cpu : midpoints(grid.cpu_range)) {
            for (double bw : midpoints(grid.bandwidth_range)) {
                const ResourceVector r(cpu, bw);
                for (int s = 0; s < grid.samples_per_point; ++s) {
                    QoSRow row;
                    row.traffic = x;
                    row.r = r;
                    row.qos = oracle_qos_sample(x, r, p, derive_seed(seed, point_index));
                    row.split = Split::Test;
                    ds.rows.push_back(std::move(row));
                    ++point_index;
                }
            }
        }
    }
    return ds;
}

double evaluate_allocation(const TrafficSeries& traffic, const ResourceVector& r,
                           const SlaSpec& sla, const OracleParams& p, int n_trials,
                           std::uint64_t seed) {
    if (auto v = validate_traffic(traffic); !v) {
        throw std::invalid_argument("evaluate_allocation: " + v.reason);
    }
    if (n_trials < 1) throw std::invalid_argument("evaluate_allocation: n_trials must be >= 1");

    std::vector<double> qos(traffic.tau(), 0.0);
    double acc = 0.0;
    for (int trial = 0; trial < n_trials; ++trial) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
        for (std::size_t t = 0; t < traffic.tau(); ++t) {
            const double x = traffic.values[t];
            if (x <= 0.0) {
                qos[t] = 0.0; // zero-weight slot, value irrelevant
                continue;
            }
            const double mu = oracle_qos_mean(x, r, p);
            qos[t] = std::max(0.0, mu + oracle_noise_std(mu, p) * rng.normal());
        }
        acc += beta_strict(traffic, qos, sla.q_thresh);
    }
    return acc / n_trials;
}

void write_dataset_csv(const QoSDataset& ds, Split split, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x_users,cpu_millicores,bw_mbps,qos_mbps,split\n";
    char buf[160];
    for (const auto& row : ds.rows) {
        if (row.split != split) continue;
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%s\n", row.traffic,
                      row.r.cpu_millicores(), row.r.bandwidth_mbps(), row.qos,
                      split_name(row.split).c_str());
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

QoSDataset read_dataset_csv(const std::vector<std::string>& paths) {
    QoSDataset ds;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open dataset: " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line_no == 1) {
                if (line.rfind("x_users,", 0) != 0) {
                    throw std::runtime_error(path + ":1: unexpected dataset header");
                }
                continue;
            }
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string field;
            QoSRow row;
            double cpu = 0.0, bw = 0.0;
            try {
                std::getline(ss, field, ',');
                row.traffic = std::stod(field);
                std::getline(ss, field, ',');
                cpu = std::stod(field);
                std::getline(ss, field, ',');
                bw = std::stod(field);
                std::getline(ss, field, ',');
                row.qos = std::stod(field);
                std::getline(ss, field, ',');
                row.split = split_from_name(field);
            } catch (const std::exception& e) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": malformed dataset row (" + e.what() + ")");
            }
            row.r = ResourceVector(cpu, bw);
            ds.rows.push_back(std::move(row));
        }
    }
    return ds;
}

}  // namespace microopt
