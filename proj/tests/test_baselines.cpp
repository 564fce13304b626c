#include <doctest.h>

#include <cmath>

#include "beacon/baselines.hpp"
#include "beacon/rng.hpp"
#include "f1.hpp"

using namespace beacon;

TEST_CASE("rf_defend on F1") {
  const auto fx = f1::make();
  SUBCASE("p=0 flips nothing") {
    CHECK(rf_defend(fx.g, fx.beacon, fx.x, 0.0, 1).flipped_count() == 0);
  }
  SUBCASE("p=1 flips exactly the unique-carrier SNVs {2,3}") {
    const auto fs = rf_defend(fx.g, fx.beacon, fx.x, 1.0, 1);
    CHECK(fs.indices() == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("seeded determinism") {
    const auto a = rf_defend(fx.g, fx.beacon, fx.x, 0.5, 42);
    const auto b = rf_defend(fx.g, fx.beacon, fx.x, 0.5, 42);
    CHECK(a.y == b.y);
  }
  SUBCASE("p=0.5 Monte Carlo mean within 3 sigma of Binomial(2, 0.5)") {
    const int trials = 10000;
    double total = 0.0;
    for (int t = 0; t < trials; ++t)
      total += static_cast<double>(
          rf_defend(fx.g, fx.beacon, fx.x, 0.5, 1000 + t).flipped_count());
    const double mean = total / trials;
    const double sigma = std::sqrt(2 * 0.25 / trials);  // var of the mean
    CHECK(std::abs(mean - 1.0) < 3.0 * sigma);
  }
  SUBCASE("out-of-range p rejected") {
    CHECK_THROWS_AS(rf_defend(fx.g, fx.beacon, fx.x, 1.5, 1), ParameterError);
  }
}

TEST_CASE("dp_defend") {
  const auto fx = f1::make();
  SUBCASE("flips only 1-responses") {
    const auto fs = dp_defend(fx.x, 0.01, 7);
    fs.validate_against(fx.x);  // would throw on a 0-response flip
  }
  SUBCASE("epsilon <= 0 rejected") {
    CHECK_THROWS_AS(dp_defend(fx.x, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(dp_defend(fx.x, -1.0, 1), ParameterError);
  }
  SUBCASE("huge epsilon flips nothing") {
    CHECK(dp_defend(fx.x, 50.0, 1).flipped_count() == 0);
  }
  SUBCASE("epsilon=1 flip rate concentrates at 1/(1+e)") {
    ResponseVector ones;
    ones.x.assign(10000, 1);
    const auto fs = dp_defend(ones, 1.0, 3);
    const double q = 1.0 / (1.0 + std::exp(1.0));
    const double rate = static_cast<double>(fs.flipped_count()) / 10000.0;
    const double sigma = std::sqrt(q * (1 - q) / 10000.0);
    CHECK(std::abs(rate - q) < 3.0 * sigma);
  }
}

TEST_CASE("calibrate_baseline on F1") {
  const auto fx = f1::make();
  SUBCASE("already-private instance selects the cheapest parameter") {
    const auto threat = ThreatSpec::fixed_threshold(-10.0);
    const auto rf = calibrate_baseline(BaselineConfig::Kind::rf, fx.params,
                                       fx.g, fx.beacon, fx.q, fx.x, threat, 5, 1);
    CHECK(rf.achievable);
    CHECK(rf.config.p == 0.0);
    CHECK(rf.mean_flips == 0.0);
    const auto dp = calibrate_baseline(BaselineConfig::Kind::dp, fx.params,
                                       fx.g, fx.beacon, fx.q, fx.x, threat, 5, 1);
    CHECK(dp.achievable);
    CHECK(dp.config.epsilon == 5.0);  // largest epsilon on the grid
  }
  SUBCASE("theta=0 on F1 forces RF to p=1 (both unique SNVs must flip)") {
    const auto threat = ThreatSpec::fixed_threshold(0.0);
    const auto rf = calibrate_baseline(BaselineConfig::Kind::rf, fx.params,
                                       fx.g, fx.beacon, fx.q, fx.x, threat,
                                       50, 11);
    CHECK(rf.achievable);
    CHECK(rf.config.p == 1.0);
    CHECK(rf.mean_flips == 2.0);
    // The flip pair {2,3} really does protect both members.
    CHECK(f1::kRf23Member1 >= 0.0);
    CHECK(f1::kRf23Member2 >= 0.0);
  }
  SUBCASE("unreachable privacy reports none-achievable") {
    // theta above the best reachable score for member 1: RF cannot flip SNV 1
    // (two carriers), so member 1 is capped at B3 + A1 < 4.
    const auto threat = ThreatSpec::fixed_threshold(4.0);
    const auto rf = calibrate_baseline(BaselineConfig::Kind::rf, fx.params,
                                       fx.g, fx.beacon, fx.q, fx.x, threat, 10, 1);
    CHECK_FALSE(rf.achievable);
  }
}

TEST_CASE("baselines respect the 1->0-only rule on random data") {
  Rng rng(5000);
  for (int t = 0; t < 20; ++t) {
    const auto data = generate_synthetic(4, 0, 40, 1.0, 3.0, 90000 + t);
    const auto x = true_responses(data.genotypes, data.split.beacon);
    const auto rf = rf_defend(data.genotypes, data.split.beacon, x,
                              rng.uniform(), t);
    rf.validate_against(x);
    const auto dp = dp_defend(x, 0.5 + rng.uniform(), t);
    dp.validate_against(x);
  }
}
