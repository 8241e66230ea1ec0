#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "microopt/domain.hpp"
#include "microopt/rng.hpp"

using namespace microopt;

TEST_CASE("normalized cost of the full default allocation") {
    CostWeights eta; // 1/4500 per millicore, 1/50 per Mbps
    CHECK(normalized_cost(eta, ResourceVector(4500.0, 50.0)) == doctest::Approx(2.0));
    CHECK(normalized_cost(eta, ResourceVector(0.0, 0.0)) == 0.0);
}

TEST_CASE("normalized cost of the static peak allocation") {
    // 3123.80/4500 + 42.20/50
    CostWeights eta;
    CHECK(normalized_cost(eta, ResourceVector(3123.80, 42.20)) ==
          doctest::Approx(1.5382).epsilon(1e-4));
}

TEST_CASE("normalized cost rejects dimension mismatch") {
    CostWeights eta;
    CHECK_THROWS_AS(normalized_cost(eta, ResourceVector(std::vector<double>{1.0, 2.0, 3.0})),
                    std::invalid_argument);
}

TEST_CASE("normalized cost is linear in the allocation") {
    Rng rng(7);
    CostWeights eta;
    for (int i = 0; i < 200; ++i) {
        const ResourceVector r1(rng.uniform(0, 4500), rng.uniform(0, 50));
        const ResourceVector r2(rng.uniform(0, 4500), rng.uniform(0, 50));
        const double a = rng.uniform(0, 3);
        const double b = rng.uniform(0, 3);
        const ResourceVector mix(a * r1[0] + b * r2[0], a * r1[1] + b * r2[1]);
        const double lhs = normalized_cost(eta, mix);
        const double rhs = a * normalized_cost(eta, r1) + b * normalized_cost(eta, r2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("normalized cost is strictly monotone per component") {
    Rng rng(11);
    CostWeights eta;
    for (int i = 0; i < 200; ++i) {
        ResourceVector r(rng.uniform(0, 4500), rng.uniform(0, 50));
        const double base = normalized_cost(eta, r);
        for (std::size_t k = 0; k < r.dim(); ++k) {
            ResourceVector bumped = r;
            bumped[k] += rng.uniform(0.001, 10.0);
            CHECK(normalized_cost(eta, bumped) > base);
        }
    }
}

TEST_CASE("validate_sla") {
    CHECK(validate_sla(SlaSpec{5.0, 0.1, CostWeights()}).ok);
    const Verdict bad_q = validate_sla(SlaSpec{-1.0, 0.1, CostWeights()});
    CHECK_FALSE(bad_q.ok);
    CHECK(bad_q.reason == "q_thresh must be positive");
    const Verdict bad_beta = validate_sla(SlaSpec{5.0, 1.5, CostWeights()});
    CHECK_FALSE(bad_beta.ok);
    CHECK(bad_beta.reason == "beta_thresh must lie in [0,1]");
}

TEST_CASE("traffic validation") {
    CHECK(validate_traffic(TrafficSeries::constant(2.0, 10)).ok);
    CHECK_FALSE(validate_traffic(TrafficSeries(std::vector<double>{})).ok);
    CHECK_FALSE(validate_traffic(TrafficSeries({0.0, 0.0})).ok);
    CHECK_FALSE(validate_traffic(TrafficSeries({1.0, -0.5})).ok);
}
