#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "microopt/oracle.hpp"
#include "microopt/rng.hpp"

using namespace microopt;

namespace {

OracleParams noiseless() {
    OracleParams p;
    p.noise_base = 0.0;
    p.noise_slope = 0.0;
    return p;
}

} // namespace

TEST_CASE("mean QoS follows the bottleneck formula") {
    const OracleParams p;
    CHECK(oracle_qos_mean(5.0, ResourceVector(2500.0, 40.0), p) == doctest::Approx(5.0));
    CHECK(oracle_qos_mean(1.0, ResourceVector(4000.0, 40.0), p) == doctest::Approx(6.0));
    CHECK(oracle_qos_mean(2.0, ResourceVector(500.0, 40.0), p) == doctest::Approx(2.5));
    CHECK_THROWS_AS(oracle_qos_mean(0.0, ResourceVector(500.0, 40.0), p), std::domain_error);
    CHECK_THROWS_AS(oracle_qos_mean(-1.0, ResourceVector(500.0, 40.0), p), std::domain_error);
}

TEST_CASE("samples with degenerate noise equal the mean") {
    const OracleParams p = noiseless();
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
        CHECK(oracle_qos_sample(5.0, ResourceVector(2500.0, 40.0), p, seed) ==
              doctest::Approx(5.0));
    }
}

TEST_CASE("sample mean matches the oracle mean within Monte-Carlo error") {
    const OracleParams p;
    const ResourceVector r(2500.0, 40.0);
    const int n = 10000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += oracle_qos_sample(5.0, r, p, derive_seed(123, (uint64_t)i));
    const double mean = acc / n;
    const double sd = oracle_noise_std(5.0, p);
    CHECK(std::abs(mean - 5.0) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("samples are clamped at zero") {
    OracleParams p;
    p.noise_base = 50.0; // absurd noise to force negative draws
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CHECK(oracle_qos_sample(5.0, ResourceVector(500.0, 5.0), p, seed) >= 0.0);
    }
}

TEST_CASE("grid dataset has the expected cardinality and splits") {
    GridSpec grid; // 5 x 8 x 8 points
    const QoSDataset ds = generate_grid_dataset(grid, OracleParams{}, 42);
    CHECK(ds.count(Split::Train) + ds.count(Split::Validation) == 3200);
    CHECK(ds.count(Split::Test) == 4 * 7 * 7 * 10);
    CHECK(ds.count(Split::Validation) > 0);
}

TEST_CASE("zero-noise dataset rows equal the oracle mean") {
    GridSpec grid;
    grid.samples_per_point = 1;
    const OracleParams p = noiseless();
    const QoSDataset ds = generate_grid_dataset(grid, p, 7);
    for (const auto& row : ds.rows) {
        CHECK(row.qos == doctest::Approx(oracle_qos_mean(row.traffic, row.r, p)));
    }
}

TEST_CASE("same seed reproduces the dataset exactly") {
    GridSpec grid;
    grid.samples_per_point = 2;
    const QoSDataset a = generate_grid_dataset(grid, OracleParams{}, 99);
    const QoSDataset b = generate_grid_dataset(grid, OracleParams{}, 99);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].qos == b.rows[i].qos);
        CHECK(a.rows[i].split == b.rows[i].split);
    }
}

TEST_CASE("test rows sit strictly off the training grid") {
    GridSpec grid;
    grid.samples_per_point = 1;
    const QoSDataset ds = generate_grid_dataset(grid, OracleParams{}, 5);
    const auto on_lattice = [](double v, const RangeSpec& range) {
        for (double p : range.points()) {
            if (v == p) return true;
        }
        return false;
    };
    for (const auto& row : ds.rows) {
        if (row.split != Split::Test) continue;
        const bool on_grid = on_lattice(row.traffic, grid.traffic_range) &&
                             on_lattice(row.r.cpu_millicores(), grid.cpu_range) &&
                             on_lattice(row.r.bandwidth_mbps(), grid.bandwidth_range);
        CHECK_FALSE(on_grid);
    }
}

TEST_CASE("empty grid is rejected") {
    GridSpec grid;
    grid.cpu_range.step = 0.0;
    CHECK_THROWS(generate_grid_dataset(grid, OracleParams{}, 1));
}

TEST_CASE("evaluate_allocation on deterministic extremes") {
    const OracleParams p = noiseless();
    const TrafficSeries x = TrafficSeries::constant(5.0, 30);
    SlaSpec sla{5.0, 0.1, CostWeights()};

    // comfortably above threshold: mu = 5.5
    CHECK(evaluate_allocation(x, ResourceVector(2750.0, 40.0), sla, p, 20, 1) == 0.0);
    // below threshold: mu = 4.0
    CHECK(evaluate_allocation(x, ResourceVector(2000.0, 40.0), sla, p, 20, 1) == 1.0);
    // boundary: mu equals q_thresh exactly and counts as degraded
    CHECK(evaluate_allocation(x, ResourceVector(2500.0, 25.0), sla, p, 20, 1) == 1.0);
}

TEST_CASE("evaluate_allocation rejects zero traffic") {
    SlaSpec sla{5.0, 0.1, CostWeights()};
    CHECK_THROWS(evaluate_allocation(TrafficSeries({0.0, 0.0}), ResourceVector(2500.0, 25.0), sla,
                                     OracleParams{}, 10, 1));
}

TEST_CASE("mean QoS is monotone in resources and antitone in traffic") {
    const OracleParams p;
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(0.5, 6.0);
        const ResourceVector lo(rng.uniform(100, 4000), rng.uniform(1, 45));
        const ResourceVector hi(lo[0] + rng.uniform(0, 500), lo[1] + rng.uniform(0, 5));
        CHECK(oracle_qos_mean(x, hi, p) >= oracle_qos_mean(x, lo, p));
        const double x2 = x + rng.uniform(0.0, 2.0);
        CHECK(oracle_qos_mean(x2, lo, p) <= oracle_qos_mean(x, lo, p));
    }
}

TEST_CASE("bandwidth beyond the gNB bottleneck changes nothing") {
    const OracleParams p;
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const double cpu = rng.uniform(100, 4000);
        const double gnb = p.cpu_capacity_slope * cpu;
        const double bw = gnb + rng.uniform(0.1, 10.0); // already past the bottleneck
        const double x = rng.uniform(0.5, 6.0);
        const double base = oracle_qos_mean(x, ResourceVector(cpu, bw), p);
        const double more = oracle_qos_mean(x, ResourceVector(cpu, bw + rng.uniform(0, 20)), p);
        CHECK(base == more);
    }
}

TEST_CASE("measured degradation is stable across seeds at high trial counts") {
    const OracleParams p;
    const TrafficSeries x = TrafficSeries::constant(5.0, 60);
    SlaSpec sla{5.0, 0.1, CostWeights()};
    const ResourceVector r(2700.0, 27.0);
    const double a = evaluate_allocation(x, r, sla, p, 2000, 101);
    const double b = evaluate_allocation(x, r, sla, p, 2000, 202);
    CHECK(std::abs(a - b) < 0.02);
}

TEST_CASE("dataset CSV round trip") {
    GridSpec grid;
    grid.samples_per_point = 1;
    grid.cpu_range = {500.0, 1000.0, 500.0};
    grid.bandwidth_range = {5.0, 10.0, 5.0};
    grid.traffic_range = {1.0, 2.0, 1.0};
    const QoSDataset ds = generate_grid_dataset(grid, OracleParams{}, 3);
    const auto dir = std::filesystem::temp_directory_path() / "microopt_oracle_test";
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (Split s : {Split::Train, Split::Validation, Split::Test}) {
        const auto path = (dir / ("ds_" + split_name(s) + ".csv")).string();
        write_dataset_csv(ds, s, path);
        paths.push_back(path);
    }
    const QoSDataset back = read_dataset_csv(paths);
    CHECK(back.rows.size() == ds.rows.size());
    CHECK(back.count(Split::Test) == ds.count(Split::Test));

    // malformed row reports its line number
    const auto bad = (dir / "bad.csv").string();
    {
        std::ofstream out(bad);
        out << "x_users,cpu_millicores,bw_mbps,qos_mbps,split\n";
        out << "1,2,3,notanumber,train\n";
    }
    CHECK_THROWS_WITH_AS(read_dataset_csv({bad}), doctest::Contains(":2:"), std::runtime_error);
    std::filesystem::remove_all(dir);
}
