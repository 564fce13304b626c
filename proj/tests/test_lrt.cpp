#include <doctest.h>

#include <cmath>

#include "beacon/rng.hpp"
#include "beacon/verify.hpp"
#include "f1.hpp"

using namespace beacon;

TEST_CASE("compute_params matches the F1 closed forms") {
  const auto fx = f1::make();
  for (int j = 0; j < 4; ++j) {
    CHECK(fx.params.a[j] == doctest::Approx(f1::kA[j]).epsilon(1e-14));
    CHECK(fx.params.b[j] == doctest::Approx(f1::kB[j]).epsilon(1e-14));
    CHECK(fx.params.gain[j] == doctest::Approx(f1::kB[j] - f1::kA[j]));
  }
}

TEST_CASE("compute_params rejects bad delta") {
  AafVector aaf;
  aaf.f = {0.1};
  CHECK_THROWS_AS(compute_params(aaf, 2, 0.3), ParameterError);
  CHECK_THROWS_AS(compute_params(aaf, 2, 0.25), ParameterError);
  CHECK_THROWS_AS(compute_params(aaf, 2, 0.0), ParameterError);
  CHECK_THROWS_AS(compute_params(aaf, 2, -0.1), ParameterError);
}

TEST_CASE("tiny delta stays finite in the log domain") {
  AafVector aaf;
  aaf.f = {0.1};
  const auto p = compute_params(aaf, 2, 1e-240);
  CHECK(std::isfinite(p.a[0]));
  CHECK(std::isfinite(p.b[0]));
  CHECK(p.b[0] == doctest::Approx(f1::kB1TinyDelta).epsilon(1e-13));
}

TEST_CASE("large n keeps D terms representable") {
  AafVector aaf;
  aaf.f = {0.3};
  const auto p = compute_params(aaf, 400, 1e-6);
  // (0.7)^800 underflows a double; the log form must not.
  CHECK(p.log_dn[0] == doctest::Approx(800.0 * std::log(0.7)));
  CHECK(std::isfinite(p.a[0]));
  CHECK(std::isfinite(p.b[0]));
  CHECK(p.a[0] < 0.0);
  CHECK(p.b[0] > 0.0);
}

TEST_CASE("lrt_score on F1") {
  const auto fx = f1::make();
  CHECK(lrt_score(fx.params, fx.g, 0, fx.q, fx.x) ==
        doctest::Approx(f1::kEta1).epsilon(1e-14));
  CHECK(lrt_score(fx.params, fx.g, 1, fx.q, fx.x) ==
        doctest::Approx(f1::kEta2).epsilon(1e-14));

  SUBCASE("empty query set scores zero") {
    CHECK(lrt_score(fx.params, fx.g, 0, QuerySet{}, fx.x) == 0.0);
  }
  SUBCASE("an all-zero genotype row scores zero") {
    auto g2 = GenotypeMatrix::from_rows({{0, 0, 0, 0}});
    CHECK(lrt_score(fx.params, g2, 0, fx.q, fx.x) == 0.0);
  }
  SUBCASE("out-of-range query index") {
    CHECK_THROWS_AS(
        lrt_score(fx.params, fx.g, 0, QuerySet{{0, 7}}, fx.x), IndexError);
  }
}

TEST_CASE("lrt_score_flipped on F1") {
  const auto fx = f1::make();
  const std::size_t one[] = {0};
  const FlipSet y = FlipSet::from_indices(4, one);
  CHECK(lrt_score_flipped(fx.params, fx.g, 0, fx.q, fx.x, y) ==
        doctest::Approx(f1::kFlip1Member1).epsilon(1e-14));
  CHECK(lrt_score_flipped(fx.params, fx.g, 1, fx.q, fx.x, y) ==
        doctest::Approx(f1::kFlip1Member2).epsilon(1e-14));

  SUBCASE("all-zero flip set equals the plain score") {
    CHECK(lrt_score_flipped(fx.params, fx.g, 0, fx.q, fx.x, FlipSet::none(4)) ==
          lrt_score(fx.params, fx.g, 0, fx.q, fx.x));
  }
  SUBCASE("flipping a 0-response is a contract violation") {
    const std::size_t at3[] = {3};  // x_4 = 0
    const FlipSet bad = FlipSet::from_indices(4, at3);
    CHECK_THROWS_AS(lrt_score_flipped(fx.params, fx.g, 0, fx.q, fx.x, bad),
                    ContractError);
  }
}

TEST_CASE("eta_and_deltas on F1") {
  const auto fx = f1::make();
  const auto ed = eta_and_deltas(fx.params, fx.g, fx.beacon, fx.q, fx.x);
  CHECK(ed.eta[0] == doctest::Approx(f1::kEta1).epsilon(1e-14));
  CHECK(ed.eta[1] == doctest::Approx(f1::kEta2).epsilon(1e-14));
  CHECK(ed.support[0] == std::vector<std::size_t>{0, 2});
  CHECK(ed.support[1] == std::vector<std::size_t>{0, 1});

  SUBCASE("no alternate alleles means eta 0 and empty support") {
    auto g2 = GenotypeMatrix::from_rows({{0, 0, 0, 0}});
    const std::size_t only[] = {0};
    const auto ed2 = eta_and_deltas(fx.params, g2, only, fx.q, fx.x);
    CHECK(ed2.eta[0] == 0.0);
    CHECK(ed2.support[0].empty());
  }
  SUBCASE("empty query set zeroes everything") {
    const auto ed2 = eta_and_deltas(fx.params, fx.g, fx.beacon, QuerySet{}, fx.x);
    CHECK(ed2.eta[0] == 0.0);
    CHECK(ed2.eta[1] == 0.0);
  }
}

TEST_CASE("theorem_delta_bound on F1") {
  const auto fx = f1::make();
  const auto bound = theorem_delta_bound(fx.params, fx.g, fx.beacon, fx.q, fx.x, 0.0);
  CHECK(bound.dn_term == doctest::Approx(f1::kThmDn).epsilon(1e-13));
  CHECK(bound.eta_term == doctest::Approx(f1::kThmEta).epsilon(1e-13));
  CHECK(bound.bound == doctest::Approx(f1::kThmBound).epsilon(1e-12));
  CHECK_FALSE(bound.certified);  // delta = 0.1 > 0.0603

  SUBCASE("smaller delta certifies") {
    const auto p2 = compute_params(fx.aaf, 2, 0.01);
    CHECK(theorem_delta_bound(p2, fx.g, fx.beacon, fx.q, fx.x, 0.0).certified);
  }
  SUBCASE("theta -> -inf pushes the bound to 1") {
    const auto b2 =
        theorem_delta_bound(fx.params, fx.g, fx.beacon, fx.q, fx.x, -1e6);
    CHECK(b2.bound == doctest::Approx(1.0));
    CHECK(b2.certified);
  }
  SUBCASE("empty Q1 is a domain error") {
    ResponseVector zeros;
    zeros.x = {0, 0, 0, 0};
    CHECK_THROWS_AS(
        theorem_delta_bound(fx.params, fx.g, fx.beacon, fx.q, zeros, 0.0),
        ParameterError);
  }
}

TEST_CASE("beta_expectation_params") {
  SUBCASE("uniform AAF, n=1: E[(1-f)^2] = 1/3") {
    const auto e = beta_expectation_params(1.0, 1.0, 1, 0.1);
    // D-bar_{n-1} = E[1] = 1, so b = ln(1/3) - ln(0.1).
    CHECK(e.b == doctest::Approx(std::log(1.0 / 3.0) - std::log(0.1)));
    CHECK(e.a == doctest::Approx(std::log(2.0 / 3.0) - std::log1p(-0.1)));
    CHECK(e.gain() > 0.0);
  }
  SUBCASE("a=1, b=3, n=2: E[(1-f)^4] = 3/7, checked by quadrature") {
    // Midpoint quadrature of the Beta(1,3) density as an independent route.
    const int steps = 2000000;
    double num = 0.0;
    for (int s = 0; s < steps; ++s) {
      const double f = (s + 0.5) / steps;
      const double density = 3.0 * (1.0 - f) * (1.0 - f);
      num += density * std::pow(1.0 - f, 4) / steps;
    }
    CHECK(num == doctest::Approx(3.0 / 7.0).epsilon(1e-6));
    const auto e = beta_expectation_params(1.0, 3.0, 2, 0.1);
    const double dbar_n1 = 3.0 / 5.0;  // E[(1-f)^2] = B(1,5)/B(1,3)
    CHECK(e.b == doctest::Approx(std::log(3.0 / 7.0) - std::log(0.1) -
                                 std::log(dbar_n1)));
  }
  SUBCASE("invalid shapes and delta rejected") {
    CHECK_THROWS_AS(beta_expectation_params(0.0, 1.0, 2, 0.1), ParameterError);
    CHECK_THROWS_AS(beta_expectation_params(1.0, 1.0, 2, 0.3), ParameterError);
  }
}

TEST_CASE("property: 0->1 flips never help, and the decomposition identity") {
  // Random instances: lifting any 0-response never raises a member's score,
  // and the decomposed scoring route agrees with direct rescoring.
  InstanceOptions opts;
  Rng rng(4242);
  for (int t = 0; t < 200; ++t) {
    const auto inst = random_instance(1000 + t, opts);
    FlipSet y = FlipSet::none(inst.x.size());
    for (std::size_t j = 0; j < inst.x.size(); ++j)
      if (inst.x.x[j] && rng.bernoulli(0.5)) y.y[j] = 1;
    const auto served = apply_flips(inst.x, y);
    for (std::size_t i : inst.split.beacon) {
      const double direct = lrt_score(inst.params, inst.g, i, inst.q, served);
      const double decomposed =
          lrt_score_flipped(inst.params, inst.g, i, inst.q, inst.x, y);
      CHECK(decomposed ==
            doctest::Approx(direct).epsilon(1e-12));
      const double base = lrt_score(inst.params, inst.g, i, inst.q, inst.x);
      for (std::size_t j = 0; j < inst.x.size(); ++j) {
        if (inst.x.x[j]) continue;
        ResponseVector lifted = inst.x;
        lifted.x[j] = 1;
        CHECK(lrt_score(inst.params, inst.g, i, inst.q, lifted) <= base + 1e-12);
      }
    }
    for (std::size_t j = 0; j < inst.params.n_snvs(); ++j) {
      CHECK(inst.params.a[j] < 0.0);
      CHECK(inst.params.b[j] > 0.0);
    }
  }
}

TEST_CASE("query sets reject duplicates") {
  CHECK_THROWS_AS(QuerySet({1, 2, 1}), ParameterError);
  CHECK(QuerySet::all(3).size() == 3);
}
