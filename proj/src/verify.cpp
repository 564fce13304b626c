#include "beacon/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "beacon/rng.hpp"

namespace beacon {

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& opts) {
  Rng pick(mix_seed(seed, 0x5eed));
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::size_t n_beacon =
        opts.n_beacon_min +
        pick.uniform_index(opts.n_beacon_max - opts.n_beacon_min + 1);
    const std::size_t m = opts.m_min + pick.uniform_index(opts.m_max - opts.m_min + 1);
    SyntheticData data =
        generate_synthetic(n_beacon, opts.n_reference, m, opts.beta_a,
                           opts.beta_b, mix_seed(seed, attempt + 1));
    RandomInstance inst;
    inst.x = true_responses(data.genotypes, data.split.beacon);
    bool any_one = false;
    for (std::uint8_t b : inst.x.x) any_one |= b != 0;
    if (!any_one) continue;  // degenerate: no positive responses at all
    inst.g = std::move(data.genotypes);
    inst.aaf = std::move(data.aaf);
    inst.split = std::move(data.split);
    inst.params = compute_params(inst.aaf, inst.split.beacon.size(), opts.delta);
    inst.q = QuerySet::all(m);
    return inst;
  }
}

double brute_force_worst_case(const LrtParams& params, const GenotypeMatrix& g,
                              std::size_t individual, const ResponseVector& x,
                              const FlipSet& y) {
  const std::size_t m = params.n_snvs();
  if (m > 20) throw SizeError("brute_force_worst_case limited to m <= 20");
  const ResponseVector served = apply_flips(x, y);
  double best = 0.0;  // empty subset scores 0
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    double score = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask & (1u << j)) || !g.get(individual, j)) continue;
      score += served.x[j] ? params.a[j] : params.b[j];
    }
    best = std::min(best, score);
  }
  return best;
}

double brute_force_adaptive_worst(const LrtParams& params,
                                  const GenotypeMatrix& g,
                                  const AdaptiveQuantities& aq,
                                  std::size_t individual,
                                  const ResponseVector& x, const FlipSet& y) {
  const std::size_t m = params.n_snvs();
  if (m > 20) throw SizeError("brute_force_adaptive_worst limited to m <= 20");
  std::vector<std::size_t> s1, s0;
  for (std::size_t j = 0; j < m; ++j) (x.x[j] ? s1 : s0).push_back(j);

  double best1 = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << s1.size()); ++mask) {
    double acc = 0.0;
    for (std::size_t b = 0; b < s1.size(); ++b) {
      if (!(mask & (1u << b))) continue;
      const std::size_t j = s1[b];
      acc += (y.flips(j) ? aq.delta_ik(params, g, individual, j) : 0.0) +
             aq.d_ik(g, individual, j) * params.a[j];
    }
    best1 = std::min(best1, acc);
  }
  double best0 = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << s0.size()); ++mask) {
    double acc = 0.0;
    for (std::size_t b = 0; b < s0.size(); ++b) {
      if (!(mask & (1u << b))) continue;
      const std::size_t j = s0[b];
      acc += aq.d_ik(g, individual, j) * params.b[j];
    }
    best0 = std::min(best0, acc);
  }
  return best1 + best0;
}

std::size_t brute_force_min_cover(
    const std::vector<std::vector<std::size_t>>& support, std::size_t m) {
  if (m > 20) throw SizeError("brute_force_min_cover limited to m <= 20");
  std::vector<std::uint32_t> masks(support.size(), 0);
  for (std::size_t i = 0; i < support.size(); ++i)
    for (std::size_t j : support[i]) masks[i] |= 1u << j;
  std::size_t best = m + 1;
  for (std::uint32_t pick = 0; pick < (1u << m); ++pick) {
    bool covers = true;
    for (std::uint32_t im : masks)
      if ((im & pick) == 0) {
        covers = false;
        break;
      }
    if (covers)
      best = std::min(best, static_cast<std::size_t>(__builtin_popcount(pick)));
  }
  return best;
}

namespace {

struct Suite {
  std::ostream& log;
  bool all_ok = true;

  void report(const char* name, bool ok, const std::string& detail = "") {
    log << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) log << " (" << detail << ")";
    log << "\n";
    all_ok = all_ok && ok;
  }
};

FlipSet random_flips(Rng& rng, const ResponseVector& x, double p) {
  FlipSet y = FlipSet::none(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x.x[j] && rng.bernoulli(p)) y.y[j] = 1;
  return y;
}

bool prop1_never_increases(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t), opts);
    for (std::size_t bi : inst.split.beacon) {
      const double base = lrt_score(inst.params, inst.g, bi, inst.q, inst.x);
      for (std::size_t j = 0; j < inst.x.size(); ++j) {
        if (inst.x.x[j]) continue;
        ResponseVector lifted = inst.x;
        lifted.x[j] = 1;  // a 0->1 flip
        const double modified = lrt_score(inst.params, inst.g, bi, inst.q, lifted);
        if (modified > base + 1e-12) return false;
      }
    }
  }
  return true;
}

bool decomposition_matches(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  Rng rng(mix_seed(seed, 77));
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t + 100000), opts);
    const FlipSet y = random_flips(rng, inst.x, 0.4);
    const ResponseVector served = apply_flips(inst.x, y);
    for (std::size_t bi : inst.split.beacon) {
      const double via_decomp =
          lrt_score_flipped(inst.params, inst.g, bi, inst.q, inst.x, y);
      const double direct = lrt_score(inst.params, inst.g, bi, inst.q, served);
      const double scale = std::max(1.0, std::abs(direct));
      if (std::abs(via_decomp - direct) > 1e-12 * scale) return false;
    }
    for (std::size_t j = 0; j < inst.params.n_snvs(); ++j)
      if (!(inst.params.a[j] < 0.0 && inst.params.b[j] > 0.0)) return false;
  }
  return true;
}

bool online_replay_holds(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  opts.m_max = 12;  // keeps the exact batch oracle cheap
  Rng rng(mix_seed(seed, 99));
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t + 200000), opts);
    const std::size_t m = inst.params.n_snvs();
    for (double theta : {0.0, -1.0}) {
      std::vector<std::size_t> order(m);
      for (std::size_t j = 0; j < m; ++j) order[j] = j;
      for (std::size_t j = m; j > 1; --j)
        std::swap(order[j - 1], order[rng.uniform_index(j)]);

      OnlineState state = make_online_state(inst.split.beacon.size());
      std::vector<std::uint8_t> first_responses;
      for (std::size_t q : order) {
        const auto step = online_greedy_step(state, q, inst.params, inst.g,
                                             inst.split.beacon, inst.x, theta);
        first_responses.push_back(step.response);
        // From-scratch prefix check for every member.
        for (std::size_t bi : inst.split.beacon) {
          double score = 0.0;
          for (std::size_t j : state.history)
            if (inst.g.get(bi, j))
              score += state.commitments.at(j).response ? inst.params.a[j]
                                                        : inst.params.b[j];
          if (score < theta - 1e-9) return false;
        }
      }
      if (max_running_drift(state, inst.params, inst.g, inst.split.beacon, {},
                            inst.x) > 1e-10)
        return false;

      // Committed queries replay identically.
      OnlineState replay = make_online_state(inst.split.beacon.size());
      for (std::size_t pass = 0; pass < 2; ++pass)
        for (std::size_t idx = 0; idx < order.size(); ++idx) {
          const auto step = online_greedy_step(replay, order[idx], inst.params,
                                               inst.g, inst.split.beacon,
                                               inst.x, theta);
          if (step.response != first_responses[idx]) return false;
        }

      // Online never beats the exact batch optimum.
      const auto exact =
          exact_min_flips(inst.params, inst.g, inst.split.beacon, inst.q,
                          inst.x, ThreatSpec::fixed_threshold(theta));
      if (exact.feasible &&
          state.flips < exact.flips.flipped_count())
        return false;
    }
  }
  return true;
}

bool prop6_closed_form(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  opts.m_max = 12;
  Rng rng(mix_seed(seed, 55));
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t + 300000), opts);
    const FlipSet y = random_flips(rng, inst.x, 0.3);
    for (std::size_t bi : inst.split.beacon) {
      const double brute = brute_force_worst_case(inst.params, inst.g, bi,
                                                  inst.x, y);
      const double closed =
          unauth_worst_case_margin(inst.params, inst.g, bi, y, inst.x, 0.0);
      if (std::abs(brute - closed) > 1e-9 * std::max(1.0, std::abs(brute)))
        return false;
    }
  }
  return true;
}

bool w_closed_form(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  opts.m_max = 12;
  Rng rng(mix_seed(seed, 66));
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t + 400000), opts);
    const std::size_t k = 1 + rng.uniform_index(inst.split.reference.size());
    const auto aq =
        adaptive_quantities(inst.params, inst.g, inst.split.beacon,
                            inst.split.reference, inst.q, inst.x, k);
    const FlipSet y = random_flips(rng, inst.x, 0.3);
    for (std::size_t bi : inst.split.beacon) {
      const double brute =
          brute_force_adaptive_worst(inst.params, inst.g, aq, bi, inst.x, y);
      double closed = 0.0;
      for (std::size_t j : aq.q1)
        closed += std::min((y.flips(j) ? aq.delta_ik(inst.params, inst.g, bi, j)
                                       : 0.0) +
                               aq.d_ik(inst.g, bi, j) * inst.params.a[j],
                           0.0);
      for (std::size_t j = 0; j < inst.params.n_snvs(); ++j)
        if (!inst.x.x[j])
          closed += std::min(aq.d_ik(inst.g, bi, j) * inst.params.b[j], 0.0);
      if (std::abs(brute - closed) > 1e-9 * std::max(1.0, std::abs(brute)))
        return false;
    }
  }
  return true;
}

bool greedy_never_beats_exact(std::uint64_t seed, std::size_t count) {
  InstanceOptions opts;
  opts.m_max = 12;
  Rng rng(mix_seed(seed, 44));
  for (std::size_t t = 0; t < count; ++t) {
    const auto inst = random_instance(mix_seed(seed, t + 500000), opts);
    const double theta = -3.0 * rng.uniform();
    const auto threat = ThreatSpec::fixed_threshold(theta);
    const auto exact = exact_min_flips(inst.params, inst.g, inst.split.beacon,
                                       inst.q, inst.x, threat);
    const auto mig = mi_greedy(inst.params, inst.g, inst.split.beacon, inst.q,
                               inst.x, theta);
    if (!exact.feasible || !mig.feasible) return false;  // theta <= 0: solvable
    if (exact.flips.flipped_count() > mig.flips.flipped_count()) return false;

    const auto unauth_exact =
        unauth_fixed_solve(inst.params, inst.g, inst.split.beacon, inst.x,
                           theta, SolveMode::exact);
    const auto unauth_greedy =
        unauth_fixed_solve(inst.params, inst.g, inst.split.beacon, inst.x,
                           theta, SolveMode::greedy);
    if (!unauth_exact.feasible || !unauth_greedy.feasible) return false;
    if (unauth_exact.flips.flipped_count() > unauth_greedy.flips.flipped_count())
      return false;
  }
  return true;
}

}  // namespace

bool run_verification(std::uint64_t seed, std::ostream& log) {
  Suite suite{log};
  suite.report("response monotonicity: 0->1 flips never increase any member score",
               prop1_never_increases(seed, 1000));
  suite.report("decomposition: flip form equals rescored responses (1e-12)",
               decomposition_matches(seed, 1000));
  suite.report("online greedy keeps every prefix private",
               online_replay_holds(seed, 100));
  suite.report("unauth worst-case closed form equals brute force",
               prop6_closed_form(seed, 100));
  suite.report("unauth adaptive W: closed form equals brute force",
               w_closed_form(seed, 100));
  suite.report("oracle: exact optimum <= greedy flip counts",
               greedy_never_beats_exact(seed, 40));
  return suite.all_ok;
}

}  // namespace beacon
