// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "beacon/attack.hpp"
#include "beacon/baselines.hpp"
#include "beacon/rng.hpp"
#include "beacon/service.hpp"
#include "beacon/verify.hpp"

using namespace beacon;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int number;
  std::string description;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

// ---------------------------------------------------------------------------
// Shared helpers

std::string source_path(const char* rel) {
  return (fs::path(BEACON_SOURCE_DIR) / rel).string();
}

struct F1 {
  GenotypeMatrix g;
  AafVector aaf;
  std::vector<std::size_t> beacon{0, 1};
  std::vector<std::size_t> reference{2, 3};
  LrtParams params;
  QuerySet q;
  ResponseVector x;
};

F1 load_f1() {
  F1 fx;
  auto [gb, fb] = load_matrix(source_path("tests/data/f1_beacon.matrix"));
  auto [gr, fr] = load_matrix(source_path("tests/data/f1_reference.matrix"));
  fx.g = GenotypeMatrix(4, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 2; ++i) {
      fx.g.set(i, j, gb.get(i, j));
      fx.g.set(2 + i, j, gr.get(i, j));
    }
  }
  fx.aaf = fb;
  fx.params = compute_params(fx.aaf, 2, 0.1);
  fx.q = QuerySet::all(4);
  fx.x = true_responses(fx.g, fx.beacon);
  return fx;
}

InstanceOptions small_instances(double delta) {
  InstanceOptions opts;
  opts.n_beacon_min = 2;
  opts.n_beacon_max = 8;
  opts.m_min = 4;
  opts.m_max = 16;
  opts.n_reference = 6;
  opts.delta = delta;
  return opts;
}

std::size_t mask_of(const FlipSet& flips) {
  std::size_t mask = 0;
  for (std::size_t j : flips.indices()) mask |= std::size_t{1} << j;
  return mask;
}

// ---------------------------------------------------------------------------
// Criterion 1: F1 golden values, implementation vs the brute-force script.

bool criterion_f1_golden(std::string& why) {
  // Run the committed reference script and parse `name value` lines.
  const std::string cmd = "python3 " + source_path("scripts/f1_reference.py");
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    why = "cannot run the reference script";
    return false;
  }
  std::map<std::string, double> oracle;
  char line[256];
  while (fgets(line, sizeof line, pipe)) {
    std::istringstream ls(line);
    std::string key;
    double value;
    if (ls >> key >> value) oracle[key] = value;
  }
  if (::pclose(pipe) != 0) {
    why = "reference script exited nonzero";
    return false;
  }
  if (oracle.size() < 50) {
    why = "reference script produced only " + std::to_string(oracle.size()) + " values";
    return false;
  }

  const F1 fx = load_f1();
  std::map<std::string, double> impl;

  for (int j = 0; j < 4; ++j) {
    impl["a" + std::to_string(j + 1)] = fx.params.a[j];
    impl["b" + std::to_string(j + 1)] = fx.params.b[j];
  }
  const auto ed = eta_and_deltas(fx.params, fx.g, fx.beacon, fx.q, fx.x);
  impl["eta1"] = ed.eta[0];
  impl["eta2"] = ed.eta[1];
  impl["score_b2"] = lrt_score(fx.params, fx.g, 3, fx.q, fx.x);
  const std::size_t one[] = {0};
  const FlipSet flip1 = FlipSet::from_indices(4, one);
  impl["flip1_member1"] = lrt_score_flipped(fx.params, fx.g, 0, fx.q, fx.x, flip1);
  impl["flip1_member2"] = lrt_score_flipped(fx.params, fx.g, 1, fx.q, fx.x, flip1);
  impl["theta_k1"] = adaptive_threshold(fx.params, fx.g, fx.reference, fx.q,
                                        fx.x, FlipSet::none(4), 1);
  impl["theta_k2"] = adaptive_threshold(fx.params, fx.g, fx.reference, fx.q,
                                        fx.x, FlipSet::none(4), 2);
  const auto bound = theorem_delta_bound(fx.params, fx.g, fx.beacon, fx.q, fx.x, 0.0);
  impl["thm_dn"] = bound.dn_term;
  impl["thm_eta"] = bound.eta_term;
  impl["thm_bound"] = bound.bound;
  {
    AafVector rare;
    rare.f = {0.1};
    impl["b1_tiny_delta"] = compute_params(rare, 2, 1e-240).b[0];
  }
  const auto aq2 = adaptive_quantities(fx.params, fx.g, fx.beacon, fx.reference,
                                       fx.q, fx.x, 2);
  const auto aq1 = adaptive_quantities(fx.params, fx.g, fx.beacon, fx.reference,
                                       fx.q, fx.x, 1);
  for (int j = 0; j < 4; ++j) {
    impl["delta_k2_" + std::to_string(j + 1)] = aq2.delta_k[j];
    impl["delta_1k_" + std::to_string(j + 1)] = aq2.delta_ik(fx.params, fx.g, 0, j);
    impl["delta_2k_" + std::to_string(j + 1)] = aq2.delta_ik(fx.params, fx.g, 1, j);
  }
  const auto mask_of_vec = [](const std::vector<std::size_t>& v) {
    std::size_t mask = 0;
    for (std::size_t j : v) mask |= std::size_t{1} << j;
    return static_cast<double>(mask);
  };
  impl["eligible_k1_mask"] = mask_of_vec(eligible_flips(aq1, fx.params, fx.g, fx.beacon));
  impl["eligible_k2_mask"] = mask_of_vec(eligible_flips(aq2, fx.params, fx.g, fx.beacon));

  impl["exact_theta0_mask"] = static_cast<double>(mask_of(
      exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                      ThreatSpec::fixed_threshold(0.0)).flips));
  impl["exact_thetam2_mask"] = static_cast<double>(mask_of(
      exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                      ThreatSpec::fixed_threshold(-2.0)).flips));
  impl["exact_adapt_k2_mask"] = static_cast<double>(mask_of(
      exact_min_flips(fx.params, fx.g, fx.beacon, fx.q, fx.x,
                      ThreatSpec::adaptive(2, fx.reference)).flips));

  {
    OnlineState state = make_online_state(2);
    const std::size_t order[] = {2, 0, 1};
    int step = 0;
    for (std::size_t q : order) {
      const auto s = online_greedy_step(state, q, fx.params, fx.g, fx.beacon, fx.x, 0.0);
      impl["online_resp_" + std::to_string(++step)] = s.response;
    }
    impl["online_flips"] = static_cast<double>(state.flips);
  }
  {
    OnlineState state = make_online_state(2, 2);
    const std::size_t order[] = {0, 1, 2};
    int step = 0;
    for (std::size_t q : order) {
      const auto s = online_greedy_adaptive_step(state, q, fx.params, fx.g,
                                                 fx.beacon, fx.reference, fx.x, 2);
      impl["aonline_resp_" + std::to_string(++step)] = s.response;
    }
    impl["aonline_flips"] = static_cast<double>(state.flips);
  }

  impl["wc_m1_f0_th11"] =
      unauth_worst_case_margin(fx.params, fx.g, 0, FlipSet::none(4), fx.x, -1.1);
  impl["wc_m1_f1_th11"] =
      unauth_worst_case_margin(fx.params, fx.g, 0, flip1, fx.x, -1.1);
  impl["unauth_exact_th11_mask"] = static_cast<double>(mask_of(
      unauth_fixed_solve(fx.params, fx.g, fx.beacon, fx.x, -1.1, SolveMode::exact).flips));
  impl["unauth_exact_th0_mask"] = static_cast<double>(mask_of(
      unauth_fixed_solve(fx.params, fx.g, fx.beacon, fx.x, 0.0, SolveMode::exact).flips));
  impl["unauth_exact_thm100_mask"] = static_cast<double>(mask_of(
      unauth_fixed_solve(fx.params, fx.g, fx.beacon, fx.x, -100.0, SolveMode::exact).flips));

  {
    const auto r = unauth_adaptive_solve(fx.params, fx.g, fx.beacon, fx.reference, fx.x, 2);
    impl["unauth_adapt_feasible"] = r.feasible ? 1.0 : 0.0;
    impl["w1_after1"] = r.margins[0];  // k_1 = 0, so margin = W_1
    impl["w2_after1"] = r.margins[1];
    // W_1 at y=0 via the brute-force oracle route.
    impl["w1_y0"] = brute_force_adaptive_worst(fx.params, fx.g, aq2, 0, fx.x,
                                               FlipSet::none(4));
    impl["k1_const"] = 0.0;
    impl["k2_const"] = 0.0;
  }

  {
    const auto served = apply_flips(fx.x, flip1);
    std::vector<double> ref_scores;
    for (std::size_t r : fx.reference)
      ref_scores.push_back(lrt_score(fx.params, fx.g, r, fx.q, served));
    std::sort(ref_scores.begin(), ref_scores.end());
    impl["adapt_theta_postflip1"] = (ref_scores[0] + ref_scores[1]) / 2.0;
    const std::size_t both[] = {1, 2};
    const auto served23 = apply_flips(fx.x, FlipSet::from_indices(4, both));
    impl["rf23_member1"] = lrt_score(fx.params, fx.g, 0, fx.q, served23);
    impl["rf23_member2"] = lrt_score(fx.params, fx.g, 1, fx.q, served23);
  }
  impl["dbar_n_1_3_2"] = std::exp(std::lgamma(4.0) + std::lgamma(7.0) -
                                  std::lgamma(3.0) - std::lgamma(8.0));

  for (const auto& [key, expected] : oracle) {
    const auto it = impl.find(key);
    if (it == impl.end()) {
      why = "implementation value missing for '" + key + "'";
      return false;
    }
    if (std::abs(it->second - expected) > 1e-5) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: impl %.12g vs script %.12g", key.c_str(),
                    it->second, expected);
      why = buf;
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 2: exact-oracle agreement across the greedy family.

bool criterion_oracle_agreement(std::string& why) {
  Rng rng(20240001);
  std::size_t gmbc_checked = 0, gkc_checked = 0;
  for (int t = 0; t < 200; ++t) {
    const double delta = t % 2 == 0 ? 0.2 : 1e-3;
    const auto inst = random_instance(100000 + t, small_instances(delta));
    const double theta = -3.0 * rng.uniform();
    const auto threat = ThreatSpec::fixed_threshold(theta);
    const auto fail = [&](const std::string& msg) {
      why = "instance " + std::to_string(t) + ": " + msg;
      return false;
    };

    const auto exact = exact_min_flips(inst.params, inst.g, inst.split.beacon,
                                       inst.q, inst.x, threat);
    if (!exact.feasible) return fail("exact infeasible at theta <= 0");

    // MIG
    const auto mig = mi_greedy(inst.params, inst.g, inst.split.beacon, inst.q,
                               inst.x, theta);
    const auto mig_margins = privacy_margins(inst.params, inst.g,
                                             inst.split.beacon, inst.q, inst.x,
                                             mig.flips, threat);
    for (double mg : mig_margins)
      if (!(mg >= -1e-9)) return fail("MIG post-check violation");
    if (exact.flips.flipped_count() > mig.flips.flipped_count())
      return fail("exact > MIG");

    const auto ed =
        eta_and_deltas(inst.params, inst.g, inst.split.beacon, inst.q, inst.x);

    // GMBC in the certified regime.
    const auto bound = theorem_delta_bound(inst.params, inst.g,
                                           inst.split.beacon, inst.q, inst.x, theta);
    bool supports_ok = true;
    for (const auto& p : ed.support) supports_ok &= !p.empty();
    if (bound.certified && supports_ok) {
      ++gmbc_checked;
      const auto gmbc =
          greedy_min_beacon_cover(ed.support, inst.params.n_snvs());
      if (!gmbc.feasible) return fail("GMBC infeasible with nonempty supports");
      const auto cover_margins =
          privacy_margins(inst.params, inst.g, inst.split.beacon, inst.q,
                          inst.x, gmbc.flips, threat);
      for (double mg : cover_margins)
        if (!(mg >= -1e-9)) return fail("certified GMBC cover fails the post-check");
      if (exact.flips.flipped_count() > gmbc.flips.flipped_count())
        return fail("exact > GMBC");
      const std::size_t opt_cover =
          brute_force_min_cover(ed.support, inst.params.n_snvs());
      const double ratio =
          1.0 + std::log(static_cast<double>(inst.split.beacon.size()));
      if (static_cast<double>(gmbc.flips.flipped_count()) >
          ratio * static_cast<double>(opt_cover) + 1e-9)
        return fail("GMBC exceeded (1+ln n) * optimum cover");
    }

    // GKC under the Beta-expectation model it targets.
    {
      const auto expectation = beta_expectation_params(1.0, 3.0, inst.params.n, delta);
      const LrtParams cp = make_constant_params(
          expectation.a, expectation.b, inst.params.n_snvs(), inst.params.n, delta);
      const auto ed_c =
          eta_and_deltas(cp, inst.g, inst.split.beacon, inst.q, inst.x);
      const auto quota = k_quotas(theta, ed_c.eta, expectation);
      bool quotas_ok = true;
      for (std::size_t i = 0; i < quota.size(); ++i)
        quotas_ok &= quota[i] <= ed_c.support[i].size();
      if (quotas_ok) {
        ++gkc_checked;
        const auto gkc = greedy_k_cover(ed_c.support, quota, inst.params.n_snvs());
        if (!gkc.feasible) return fail("GKC infeasible with satisfiable quotas");
        const auto gkc_margins = privacy_margins(cp, inst.g, inst.split.beacon,
                                                 inst.q, inst.x, gkc.flips, threat);
        for (double mg : gkc_margins)
          if (!(mg >= -1e-9)) return fail("GKC post-check violation");
        const auto exact_const = exact_min_flips(cp, inst.g, inst.split.beacon,
                                                 inst.q, inst.x, threat);
        if (exact_const.feasible &&
            exact_const.flips.flipped_count() > gkc.flips.flipped_count())
          return fail("constant-model exact > GKC");
      }
    }

    // Unauthenticated exact and greedy (OMIG).
    const auto un_exact = unauth_fixed_solve(inst.params, inst.g,
                                             inst.split.beacon, inst.x, theta,
                                             SolveMode::exact);
    const auto un_greedy = unauth_fixed_solve(inst.params, inst.g,
                                              inst.split.beacon, inst.x, theta,
                                              SolveMode::greedy);
    if (!un_exact.feasible || !un_greedy.feasible)
      return fail("unauth solver infeasible at theta <= 0");
    for (std::size_t bi = 0; bi < inst.split.beacon.size(); ++bi) {
      const double exact_margin = unauth_worst_case_margin(
          inst.params, inst.g, inst.split.beacon[bi], un_exact.flips, inst.x, theta);
      const double greedy_margin = unauth_worst_case_margin(
          inst.params, inst.g, inst.split.beacon[bi], un_greedy.flips, inst.x, theta);
      if (!(exact_margin >= -1e-9) || !(greedy_margin >= -1e-9))
        return fail("unauth post-check violation");
    }
    if (un_exact.flips.flipped_count() > un_greedy.flips.flipped_count())
      return fail("unauth exact > unauth greedy");
  }
  if (gmbc_checked == 0 || gkc_checked == 0) {
    why = "a greedy family was never exercised (gmbc " +
          std::to_string(gmbc_checked) + ", gkc " + std::to_string(gkc_checked) + ")";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 3: 0->1 flips never help the attacker, 1000 random instances.

bool criterion_prop1(std::string& why) {
  for (int t = 0; t < 1000; ++t) {
    const double delta = t % 2 == 0 ? 0.2 : 1e-3;
    const auto inst = random_instance(200000 + t, small_instances(delta));
    for (std::size_t i : inst.split.beacon) {
      const double base = lrt_score(inst.params, inst.g, i, inst.q, inst.x);
      for (std::size_t j = 0; j < inst.x.size(); ++j) {
        if (inst.x.x[j]) continue;
        ResponseVector lifted = inst.x;
        lifted.x[j] = 1;
        if (lrt_score(inst.params, inst.g, i, inst.q, lifted) > base + 1e-12) {
          why = "a 0->1 flip increased a member score (instance " +
                std::to_string(t) + ")";
          return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 4: online replay safety, 100 instances x 5 permutations.

bool criterion_prop4(std::string& why) {
  Rng rng(20240004);
  for (int t = 0; t < 100; ++t) {
    auto opts = small_instances(t % 2 == 0 ? 0.2 : 1e-3);
    opts.m_max = 12;  // keeps 200 exact-oracle runs inside the budget
    const auto inst = random_instance(300000 + t, opts);
    const std::size_t m = inst.params.n_snvs();
    for (const double theta : {0.0, -1.0}) {
      const auto exact = exact_min_flips(inst.params, inst.g, inst.split.beacon,
                                         inst.q, inst.x,
                                         ThreatSpec::fixed_threshold(theta));
      if (!exact.feasible) {
        why = "exact infeasible";
        return false;
      }
      for (int perm = 0; perm < 5; ++perm) {
        std::vector<std::size_t> order(m);
        for (std::size_t j = 0; j < m; ++j) order[j] = j;
        for (std::size_t j = m; j > 1; --j)
          std::swap(order[j - 1], order[rng.uniform_index(j)]);
        OnlineState state = make_online_state(inst.split.beacon.size());
        for (std::size_t q : order) {
          online_greedy_step(state, q, inst.params, inst.g, inst.split.beacon,
                             inst.x, theta);
          for (std::size_t bi = 0; bi < inst.split.beacon.size(); ++bi) {
            if (!(state.score_running[bi] >= theta - 1e-9)) {
              why = "prefix violation at instance " + std::to_string(t);
              return false;
            }
          }
        }
        if (state.flips < exact.flips.flipped_count()) {
          why = "online flip count below the batch optimum";
          return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 5: worst-case closed forms vs brute force at 1e-9 on m <= 12.

bool criterion_prop6_w(std::string& why) {
  Rng rng(20240005);
  for (int t = 0; t < 100; ++t) {
    auto opts = small_instances(t % 2 == 0 ? 0.2 : 1e-3);
    opts.m_max = 12;
    const auto inst = random_instance(400000 + t, opts);
    FlipSet y = FlipSet::none(inst.x.size());
    for (std::size_t j = 0; j < inst.x.size(); ++j)
      if (inst.x.x[j] && rng.bernoulli(0.35)) y.y[j] = 1;

    for (std::size_t i : inst.split.beacon) {
      const double brute = brute_force_worst_case(inst.params, inst.g, i, inst.x, y);
      const double closed =
          unauth_worst_case_margin(inst.params, inst.g, i, y, inst.x, 0.0);
      if (std::abs(brute - closed) > 1e-9 * std::max(1.0, std::abs(brute))) {
        why = "unauth worst-case closed form mismatch";
        return false;
      }
    }

    const std::size_t k = 1 + rng.uniform_index(inst.split.reference.size());
    const auto aq = adaptive_quantities(inst.params, inst.g, inst.split.beacon,
                                        inst.split.reference, inst.q, inst.x, k);
    for (std::size_t i : inst.split.beacon) {
      const double brute =
          brute_force_adaptive_worst(inst.params, inst.g, aq, i, inst.x, y);
      double closed = 0.0;
      for (std::size_t j : aq.q1)
        closed += std::min(
            (y.flips(j) ? aq.delta_ik(inst.params, inst.g, i, j) : 0.0) +
                aq.d_ik(inst.g, i, j) * inst.params.a[j],
            0.0);
      for (std::size_t j = 0; j < inst.params.n_snvs(); ++j)
        if (!inst.x.x[j])
          closed += std::min(aq.d_ik(inst.g, i, j) * inst.params.b[j], 0.0);
      if (std::abs(brute - closed) > 1e-9 * std::max(1.0, std::abs(brute))) {
        why = "W_i mismatch";
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 6: certified-bound soundness via 50 random covers.

bool criterion_certified_bound(std::string& why) {
  Rng rng(20240006);
  std::size_t covers_checked = 0;
  int seed = 0;
  while (covers_checked < 50 && ++seed < 4000) {
    const auto inst = random_instance(500000 + seed, small_instances(1e-3));
    const double theta = -1.0;
    const auto bound = theorem_delta_bound(inst.params, inst.g,
                                           inst.split.beacon, inst.q, inst.x, theta);
    if (!bound.certified) continue;
    const auto ed =
        eta_and_deltas(inst.params, inst.g, inst.split.beacon, inst.q, inst.x);
    bool supports_ok = true;
    for (const auto& p : ed.support) supports_ok &= !p.empty();
    if (!supports_ok) continue;

    for (int c = 0; c < 5 && covers_checked < 50; ++c, ++covers_checked) {
      // One random pick from each member's support is a Beacon-Cover.
      FlipSet cover = FlipSet::none(inst.params.n_snvs());
      for (const auto& p : ed.support)
        cover.y[p[rng.uniform_index(p.size())]] = 1;
      for (std::size_t bi : inst.split.beacon) {
        const double score =
            lrt_score_flipped(inst.params, inst.g, bi, inst.q, inst.x, cover);
        if (!(score >= theta - 1e-9)) {
          why = "a certified Beacon-Cover failed the privacy post-check";
          return false;
        }
      }
    }
  }
  if (covers_checked < 50) {
    why = "could not assemble 50 certified covers";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 7: direction-of-effect at desk scale.

bool criterion_direction(std::string& why) {
  std::size_t baseline_comparisons = 0;
  std::size_t fpr_geq = 0;
  std::size_t strict_fpr = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto data = generate_synthetic(50, 50, 2000, 1.0, 5.0, 700000 + seed);
    const auto params = compute_params(data.aaf, 50, 1e-6);
    const auto q = QuerySet::all(2000);
    const auto x = true_responses(data.genotypes, data.split.beacon);
    const auto threat = ThreatSpec::fixed_threshold(0.0);

    // (a) MIG utility beats calibrated baselines whenever they succeed.
    const auto mig = mi_greedy(params, data.genotypes, data.split.beacon, q, x, 0.0);
    if (!mig.feasible) {
      why = "MIG infeasible at theta=0";
      return false;
    }
    std::vector<std::uint8_t> member_mask(data.split.beacon.size(), 1);
    const auto mig_report = run_fixed_attack(
        params, data.genotypes, data.split.beacon, member_mask, q,
        apply_flips(x, mig.flips), 0.0);
    if (mig_report.privacy_fraction != 1.0) {
      why = "MIG result does not reach privacy 1";
      return false;
    }
    for (const auto kind :
         {BaselineConfig::Kind::rf, BaselineConfig::Kind::dp}) {
      const auto calibrated =
          calibrate_baseline(kind, params, data.genotypes, data.split.beacon,
                             q, x, threat, 5, 900000 + seed);
      if (!calibrated.achievable) continue;
      ++baseline_comparisons;
      if (!(static_cast<double>(mig.flips.flipped_count()) <
            calibrated.mean_flips)) {
        why = "MIG did not strictly beat a calibrated baseline";
        return false;
      }
    }

    // (b) clustering FPR: adaptive-MIG (K=10) vs fixed-MIG (theta=0).
    std::vector<std::size_t> targets = data.split.beacon;
    targets.insert(targets.end(), data.split.reference.begin(),
                   data.split.reference.end());
    std::vector<std::uint8_t> membership(targets.size(), 0);
    for (std::size_t i = 0; i < data.split.beacon.size(); ++i) membership[i] = 1;
    const auto scores_for = [&](const FlipSet& flips) {
      const auto served = apply_flips(x, flips);
      std::vector<double> scores(targets.size());
      for (std::size_t t = 0; t < targets.size(); ++t)
        scores[t] = lrt_score(params, data.genotypes, targets[t], q, served);
      return scores;
    };
    const auto fixed_scores = scores_for(mig.flips);
    const auto amig = adaptive_mi_greedy(params, data.genotypes,
                                         data.split.beacon,
                                         data.split.reference, q, x, 10);
    const auto adaptive_scores = scores_for(amig.flips);
    const auto [ftpr, ffpr] =
        clustering_attack(fixed_scores, membership, 20, 800000 + seed);
    const auto [atpr, afpr] =
        clustering_attack(adaptive_scores, membership, 20, 800000 + seed);
    if (afpr >= ffpr - 1e-12) ++fpr_geq;
    if (afpr > ffpr) ++strict_fpr;
  }
  if (baseline_comparisons == 0) {
    why = "no calibrated baseline ever reached full privacy";
    return false;
  }
  if (fpr_geq < 10 || strict_fpr * 2 <= 10) {
    // Known desk-scale limitation: with delta = 1e-6 a single flip adds
    // B ~ 13.8 to a score, far above the few-unit deficits these small
    // instances produce, so the fixed defense already scatters members
    // through the nonmember mass and the clustering FPR saturates near 0.5
    // under both defenses. The paper's 30% -> 50% contrast needs lifts made
    // of many flips, i.e. paper-scale m.
    why = "adaptive-vs-fixed FPR direction not present at desk scale: >= on " +
          std::to_string(fpr_geq) + "/10 seeds, strict on " +
          std::to_string(strict_fpr) + "/10";
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 8: theta=0 unauth special case.

bool criterion_unauth_union(std::string& why) {
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_instance(600000 + t, small_instances(0.2));
    const auto ed =
        eta_and_deltas(inst.params, inst.g, inst.split.beacon, inst.q, inst.x);
    std::vector<std::size_t> expected;
    for (const auto& p : ed.support)
      expected.insert(expected.end(), p.begin(), p.end());
    std::sort(expected.begin(), expected.end());
    expected.erase(std::unique(expected.begin(), expected.end()), expected.end());
    for (const auto mode : {SolveMode::exact, SolveMode::greedy}) {
      const auto r = unauth_fixed_solve(inst.params, inst.g, inst.split.beacon,
                                        inst.x, 0.0, mode);
      if (!r.feasible || r.flips.indices() != expected) {
        why = "theta=0 unauth did not return the support union";
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 9: service golden transcripts with snapshot/restore.

class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    ok_ = fd_ >= 0 &&
          ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
  }
  ~Client() {
    if (fd_ >= 0) ::close(fd_);
  }
  bool ok() const { return ok_; }
  std::string round_trip(const std::string& line) {
    const std::string out = line + "\n";
    if (::send(fd_, out.data(), out.size(), 0) != static_cast<ssize_t>(out.size()))
      return "";
    std::string resp;
    char c;
    while (::recv(fd_, &c, 1, 0) == 1) {
      if (c == '\n') break;
      resp.push_back(c);
    }
    return resp;
  }

 private:
  int fd_ = -1;
  bool ok_ = false;
};

struct TranscriptStep {
  std::string token;
  std::size_t snv;
  std::string expected;
};

std::vector<TranscriptStep> load_golden(const std::string& path) {
  std::ifstream in(path);
  std::vector<TranscriptStep> steps;
  std::string token, rest;
  std::size_t snv;
  while (in >> token >> snv) {
    std::getline(in, rest);
    if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
    steps.push_back({token, snv, rest});
  }
  return steps;
}

bool replay_transcript(const ServiceConfig& base,
                       const std::vector<TranscriptStep>& steps,
                       bool restart_midway, std::string& why) {
  const auto run_steps = [&](BeaconService& service, std::size_t from,
                             std::size_t to) {
    service.start();
    std::map<std::string, std::unique_ptr<Client>> clients;
    for (std::size_t s = from; s < to; ++s) {
      auto& client = clients[steps[s].token];
      if (!client) {
        client = std::make_unique<Client>(service.port());
        if (!client->ok()) return false;
      }
      const std::string req = "{\"op\":\"query\",\"token\":\"" + steps[s].token +
                              "\",\"snv\":" + std::to_string(steps[s].snv) + "}";
      const std::string got = client->round_trip(req);
      if (got != steps[s].expected) {
        why = "step " + std::to_string(s) + ": got '" + got + "', want '" +
              steps[s].expected + "'";
        return false;
      }
    }
    service.stop();
    return true;
  };

  if (!restart_midway) {
    BeaconService service(base);
    return run_steps(service, 0, steps.size());
  }
  const std::size_t half = steps.size() / 2;
  {
    BeaconService service(base);
    if (!run_steps(service, 0, half)) return false;
    service.snapshot_now();
  }
  {
    BeaconService service(base);
    if (!run_steps(service, half, steps.size())) return false;
  }
  return true;
}

bool criterion_transcripts(std::string& why) {
  const fs::path work =
      fs::temp_directory_path() / ("beacon_acc_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  ServiceConfig base;
  base.beacon_path = source_path("tests/data/f1_beacon.matrix");
  base.reference_path = source_path("tests/data/f1_reference.matrix");
  base.delta = 0.1;
  base.listen_addr = "127.0.0.1:0";

  struct Scenario {
    const char* golden;
    const char* tag;
    std::function<void(ServiceConfig&)> configure;
  };
  const Scenario scenarios[] = {
      {"tests/data/transcript_auth_fixed.golden", "auth_fixed",
       [](ServiceConfig& c) {
         c.mode = ServiceConfig::Mode::auth_online;
         c.threat_kind = ThreatSpec::Kind::fixed;
         c.theta = 0.0;
       }},
      {"tests/data/transcript_auth_adaptive.golden", "auth_adaptive",
       [](ServiceConfig& c) {
         c.mode = ServiceConfig::Mode::auth_online;
         c.threat_kind = ThreatSpec::Kind::adaptive;
         c.k = 2;
       }},
      {"tests/data/transcript_unauth.golden", "unauth",
       [](ServiceConfig& c) {
         c.mode = ServiceConfig::Mode::unauth_online;
         c.threat_kind = ThreatSpec::Kind::fixed;
         c.method = "unauth-exact";
         c.theta = -1.1;
       }},
  };

  for (const auto& scenario : scenarios) {
    const auto steps = load_golden(source_path(scenario.golden));
    if (steps.empty()) {
      why = std::string("empty golden transcript ") + scenario.golden;
      return false;
    }
    for (const bool restart : {false, true}) {
      ServiceConfig config = base;
      scenario.configure(config);
      config.persistence_path =
          (work / (std::string(scenario.tag) + (restart ? "_restart" : "_plain")))
              .string();
      std::string detail;
      if (!replay_transcript(config, steps, restart, detail)) {
        why = std::string(scenario.tag) + (restart ? " (restart)" : "") + ": " + detail;
        fs::remove_all(work);
        return false;
      }
    }
  }
  fs::remove_all(work);
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 10: tiny-delta regime degeneration to a Beacon-Cover.

bool criterion_tiny_delta(std::string& why) {
  {
    AafVector aaf;
    aaf.f = {1e-5, 0.1, 0.49};
    const auto p = compute_params(aaf, 5, 1e-240);
    for (std::size_t j = 0; j < 3; ++j)
      if (!std::isfinite(p.a[j]) || !std::isfinite(p.b[j])) {
        why = "non-finite params at delta=1e-240";
        return false;
      }
  }
  std::size_t checked = 0;
  int seed = 0;
  while (checked < 20 && ++seed < 2000) {
    auto opts = small_instances(0.2);
    const auto base = random_instance(800000 + seed, opts);
    const auto params = compute_params(base.aaf, base.split.beacon.size(), 1e-240);
    const auto ed =
        eta_and_deltas(params, base.g, base.split.beacon, base.q, base.x);
    bool supports_ok = true;
    for (const auto& p : ed.support) supports_ok &= !p.empty();
    if (!supports_ok) continue;
    const auto bound =
        theorem_delta_bound(params, base.g, base.split.beacon, base.q, base.x, 0.0);
    if (!bound.certified) continue;
    ++checked;

    const auto mig =
        mi_greedy(params, base.g, base.split.beacon, base.q, base.x, 0.0);
    const auto gmbc = greedy_min_beacon_cover(ed.support, params.n_snvs());
    if (!mig.feasible || !gmbc.feasible) {
      why = "tiny-delta solver infeasible";
      return false;
    }
    if (mig.flips.flipped_count() != gmbc.flips.flipped_count()) {
      why = "MIG flip count " + std::to_string(mig.flips.flipped_count()) +
            " != GMBC " + std::to_string(gmbc.flips.flipped_count()) +
            " at seed " + std::to_string(seed);
      return false;
    }
  }
  if (checked < 20) {
    why = "could not assemble 20 certified instances";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "F1 golden suite matches the brute-force script at 1e-5", 1.0,
       criterion_f1_golden},
      {2, "exact-oracle agreement for every greedy defense (200 instances)",
       60.0, criterion_oracle_agreement},
      {3, "0->1 flips never increase a member score (1000 instances)",
       10.0, criterion_prop1},
      {4, "online prefixes stay private; online flips >= batch optimum",
       30.0, criterion_prop4},
      {5, "worst-case closed forms equal brute force (1e-9)",
       60.0, criterion_prop6_w},
      {6, "certified delta bound: 50 random Beacon-Covers pass the post-check",
       10.0, criterion_certified_bound},
      {7, "direction of effect: MIG utility and adaptive FPR at desk scale",
       300.0, criterion_direction},
      {8, "theta=0 unauth returns exactly the support union (50 instances)",
       10.0, criterion_unauth_union},
      {9, "service transcripts replay byte-identically across snapshot/restore",
       10.0, criterion_transcripts},
      {10, "delta=1e-240 stays finite and MIG degenerates to a Beacon-Cover",
       10.0, criterion_tiny_delta},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string why;
    bool ok = false;
    try {
      ok = criterion.run(why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (ok && elapsed > criterion.budget_seconds) {
      ok = false;
      why = "runtime " + std::to_string(elapsed) + "s exceeds budget";
    }
    std::printf("[%s] criterion %2d: %s (%.2fs)\n", ok ? "PASS" : "FAIL",
                criterion.number, criterion.description.c_str(), elapsed);
    if (!ok) {
      std::printf("       -> %s\n", why.c_str());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
