#include <doctest.h>

#include <cmath>

#include "beacon/defense_batch.hpp"
#include "beacon/rng.hpp"
#include "beacon/verify.hpp"
#include "f1.hpp"

using namespace beacon;

TEST_CASE("exact_min_flips on F1") {
  const auto fx = f1::make();
  SUBCASE("theta = 0 needs exactly SNV 1") {
    const auto r = exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                                   ThreatSpec::fixed_threshold(0.0));
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
    CHECK(r.margins[0] == doctest::Approx(f1::kFlip1Member1));
    CHECK(r.margins[1] == doctest::Approx(f1::kFlip1Member2));
  }
  SUBCASE("theta = -2 needs nothing") {
    const auto r = exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                                   ThreatSpec::fixed_threshold(-2.0));
    CHECK(r.feasible);
    CHECK(r.flips.flipped_count() == 0);
  }
  SUBCASE("adaptive K=2 flips SNV 1 over the eligible set") {
    const auto r = exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                                   ThreatSpec::adaptive(2, fx.reference));
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
  }
  SUBCASE("column cap throws SizeError") {
    BatchOptions opts;
    opts.max_exact_columns = 2;
    CHECK_THROWS_AS(exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                                    ThreatSpec::fixed_threshold(0.0), opts),
                    SizeError);
  }
}

TEST_CASE("greedy_min_beacon_cover") {
  SUBCASE("F1 supports collapse to one pick") {
    const auto r = greedy_min_beacon_cover({{0, 2}, {0, 1}}, 4);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
  }
  SUBCASE("disjoint singleton supports force both, lowest index first") {
    const auto r = greedy_min_beacon_cover({{0}, {1}}, 4);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0, 1});
    CHECK(r.iterations == 2);
  }
  SUBCASE("empty support is infeasible and names the individual") {
    const auto r = greedy_min_beacon_cover({{}, {1}}, 4);
    CHECK_FALSE(r.feasible);
    CHECK(r.witness == 0);
  }
}

TEST_CASE("k_quotas rounding") {
  BetaExpectationParams e;
  e.a = -1.0;
  e.b = 1.0;  // gain = 2
  const double eta[] = {-3.0, 0.5, -0.1};
  const auto q = k_quotas(0.0, eta, e);
  CHECK(q == std::vector<std::size_t>{2, 0, 1});  // ceil(3/2), clamp, ceil(0.05)
}

TEST_CASE("greedy_k_cover") {
  SUBCASE("unit quotas reduce to the beacon cover") {
    const auto r = greedy_k_cover({{0, 2}, {0, 1}}, {1, 1}, 4);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
  }
  SUBCASE("mixed quotas: pick 1 then 3") {
    const auto r = greedy_k_cover({{0, 2}, {0, 1}}, {2, 1}, 4);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0, 2});
  }
  SUBCASE("all-zero quotas flip nothing") {
    const auto r = greedy_k_cover({{0, 2}, {0, 1}}, {0, 0}, 4);
    CHECK(r.feasible);
    CHECK(r.flips.flipped_count() == 0);
  }
  SUBCASE("quota above the support is infeasible with a witness") {
    const auto r = greedy_k_cover({{0, 2}, {0, 1}}, {3, 1}, 4);
    CHECK_FALSE(r.feasible);
    CHECK(r.witness == 0);
  }
}

TEST_CASE("mi_greedy on F1") {
  const auto fx = f1::make();
  SUBCASE("theta = 0: SNV 1 wins the first pick and finishes") {
    const auto r = mi_greedy(fx.params, fx.g, fx.beacon, fx.q, fx.x, 0.0);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
    CHECK(r.margins[0] == doctest::Approx(f1::kFlip1Member1).epsilon(1e-12));
    CHECK(r.margins[1] == doctest::Approx(f1::kFlip1Member2).epsilon(1e-12));
  }
  SUBCASE("theta = -10: nobody is at risk") {
    const auto r = mi_greedy(fx.params, fx.g, fx.beacon, fx.q, fx.x, -10.0);
    CHECK(r.feasible);
    CHECK(r.flips.flipped_count() == 0);
  }
  SUBCASE("single individual with a singleton support") {
    auto g = GenotypeMatrix::from_rows({{0, 0, 1, 0}});
    const std::size_t members[] = {0};
    ResponseVector x;
    x.x = {1, 1, 1, 0};
    const auto r = mi_greedy(fx.params, g, members, fx.q, x, 0.0);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{2});
  }
}

TEST_CASE("adaptive_mi_greedy on F1") {
  const auto fx = f1::make();
  SUBCASE("K=2 flips SNV 1") {
    const auto r = adaptive_mi_greedy(fx.params, fx.g, fx.beacon, fx.reference,
                                      fx.q, fx.x, 2);
    CHECK(r.feasible);
    CHECK(r.flips.indices() == std::vector<std::size_t>{0});
    // Condition values: eta_i + Delta_i1^(K) - eta^(K) >= 0.
    CHECK(r.margins[0] ==
          doctest::Approx(f1::kEta1 + f1::kDeltaK2[0] - f1::kThetaK2));
    CHECK(r.margins[1] ==
          doctest::Approx(f1::kEta2 + f1::kDeltaK2[0] - f1::kThetaK2));
  }
  SUBCASE("K=1 already holds with equality at the boundary") {
    const auto r = adaptive_mi_greedy(fx.params, fx.g, fx.beacon, fx.reference,
                                      fx.q, fx.x, 1);
    CHECK(r.feasible);
    CHECK(r.flips.flipped_count() == 0);
    CHECK(r.margins[1] == doctest::Approx(0.0));
  }
  SUBCASE("beacon identical to the bottom-K needs nothing") {
    auto g = GenotypeMatrix::from_rows({{1, 1, 0, 0}, {1, 1, 0, 0}});
    const std::size_t members[] = {0};
    const std::size_t refs[] = {1};
    ResponseVector x;
    x.x = {1, 1, 0, 0};
    const auto r = adaptive_mi_greedy(fx.params, g, members, refs, fx.q, x, 1);
    CHECK(r.feasible);
    CHECK(r.flips.flipped_count() == 0);
  }
}

TEST_CASE("max_aaf restricts the candidate pool") {
  const auto fx = f1::make();
  BatchOptions opts;
  opts.max_aaf = 0.05;  // nothing in F1 qualifies
  const auto r = mi_greedy(fx.params, fx.g, fx.beacon, fx.q, fx.x, 0.0, opts);
  CHECK_FALSE(r.feasible);
  CHECK(r.flips.flipped_count() == 0);

  opts.max_aaf = 0.15;  // only SNV 1 (f = 0.1)
  const auto r2 = mi_greedy(fx.params, fx.g, fx.beacon, fx.q, fx.x, 0.0, opts);
  CHECK(r2.feasible);
  CHECK(r2.flips.indices() == std::vector<std::size_t>{0});
}

TEST_CASE("determinism: identical inputs give identical flip sets") {
  InstanceOptions opts;
  for (int t = 0; t < 10; ++t) {
    const auto inst = random_instance(31000 + t, opts);
    const auto a = mi_greedy(inst.params, inst.g, inst.split.beacon, inst.q,
                             inst.x, -1.0);
    const auto b = mi_greedy(inst.params, inst.g, inst.split.beacon, inst.q,
                             inst.x, -1.0);
    CHECK(a.flips.indices() == b.flips.indices());
  }
}

TEST_CASE("property: greedy solvers never beat the exact oracle") {
  InstanceOptions opts;
  opts.m_max = 12;
  Rng rng(5150);
  for (int t = 0; t < 30; ++t) {
    const auto inst = random_instance(32000 + t, opts);
    const double theta = -3.0 * rng.uniform();
    const auto threat = ThreatSpec::fixed_threshold(theta);
    const auto exact =
        exact_min_flips(inst.params, inst.g, inst.split.beacon, inst.q, inst.x, threat);
    REQUIRE(exact.feasible);

    const auto mig = mi_greedy(inst.params, inst.g, inst.split.beacon, inst.q,
                               inst.x, theta);
    REQUIRE(mig.feasible);
    CHECK(exact.flips.flipped_count() <= mig.flips.flipped_count());
    CHECK(mig.flips.flipped_count() <=
          static_cast<std::size_t>(
              std::count(inst.x.x.begin(), inst.x.x.end(), 1)));

    // Monotone coverage: replaying MIG's picks never un-covers anyone.
    const auto ed =
        eta_and_deltas(inst.params, inst.g, inst.split.beacon, inst.q, inst.x);
    std::vector<double> acc = ed.eta;
    std::vector<char> covered(acc.size(), 0);
    for (std::size_t j : mig.flips.indices()) {
      for (std::size_t bi = 0; bi < acc.size(); ++bi) {
        if (covered[bi]) {
          CHECK(acc[bi] >= theta);  // was covered, must stay covered
        }
        if (inst.g.get(inst.split.beacon[bi], j)) acc[bi] += inst.params.gain[j];
        if (acc[bi] >= theta) covered[bi] = 1;
      }
    }

    // GMBC versus the exact minimum cover, in the certified regime.
    const auto bound = theorem_delta_bound(inst.params, inst.g,
                                           inst.split.beacon, inst.q, inst.x, theta);
    bool supports_ok = true;
    for (const auto& p : ed.support) supports_ok &= !p.empty();
    if (bound.certified && supports_ok) {
      const auto gmbc = greedy_min_beacon_cover(ed.support, inst.params.n_snvs());
      REQUIRE(gmbc.feasible);
      const std::size_t opt_cover =
          brute_force_min_cover(ed.support, inst.params.n_snvs());
      const double ratio =
          1.0 + std::log(static_cast<double>(inst.split.beacon.size()));
      CHECK(static_cast<double>(gmbc.flips.flipped_count()) <=
            ratio * static_cast<double>(opt_cover) + 1e-9);
      // A certified cover is feasible, so the exact optimum cannot exceed it.
      CHECK(exact.flips.flipped_count() <= gmbc.flips.flipped_count());
      const auto cover_margins =
          privacy_margins(inst.params, inst.g, inst.split.beacon, inst.q,
                          inst.x, gmbc.flips, threat);
      for (double mg : cover_margins) CHECK(mg >= -1e-9);
    }
  }
}

TEST_CASE("property: feasible results pass the independent post-check") {
  InstanceOptions opts;
  Rng rng(5151);
  for (int t = 0; t < 30; ++t) {
    const auto inst = random_instance(33000 + t, opts);
    const std::size_t k = 1 + rng.uniform_index(inst.split.reference.size());
    const auto r = adaptive_mi_greedy(inst.params, inst.g, inst.split.beacon,
                                      inst.split.reference, inst.q, inst.x, k);
    const auto margins = privacy_margins(
        inst.params, inst.g, inst.split.beacon, inst.q, inst.x, r.flips,
        ThreatSpec::adaptive(k, inst.split.reference));
    if (r.feasible)
      for (double mg : margins) CHECK(mg >= -1e-8);
  }
}
