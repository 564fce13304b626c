#include "beacon/defense_online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace beacon {

namespace {

constexpr double kMarginSlack = 1e-8;

double honest_contribution(const LrtParams& params, const GenotypeMatrix& g,
                           std::size_t individual, std::size_t q,
                           std::uint8_t x_q) {
  if (!g.get(individual, q)) return 0.0;
  return x_q ? params.a[q] : params.b[q];
}

double served_contribution(const LrtParams& params, const GenotypeMatrix& g,
                           std::size_t individual, std::size_t q,
                           std::uint8_t served) {
  if (!g.get(individual, q)) return 0.0;
  return served ? params.a[q] : params.b[q];
}

void check_query(const LrtParams& params, std::size_t q) {
  if (q >= params.n_snvs())
    throw IndexError("query index " + std::to_string(q) + " out of range");
}

// Mean of the k lowest values; ties toward the lower index.
double bottom_k_mean(const std::vector<double>& scores, std::size_t k,
                     std::vector<std::size_t>* picked = nullptr) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double sum = 0.0;
  for (std::size_t r = 0; r < k; ++r) sum += scores[order[r]];
  if (picked) picked->assign(order.begin(), order.begin() + k);
  return sum / static_cast<double>(k);
}

}  // namespace

OnlineState make_online_state(std::size_t beacon_count,
                              std::size_t reference_count) {
  OnlineState s;
  s.eta_running.assign(beacon_count, 0.0);
  s.score_running.assign(beacon_count, 0.0);
  s.ref_eta_running.assign(reference_count, 0.0);
  s.ref_score_running.assign(reference_count, 0.0);
  return s;
}

StepResult online_greedy_step(OnlineState& state, std::size_t q,
                              const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon,
                              const ResponseVector& x, double theta) {
  if (theta > 0.0)
    throw ConfigError(
        "online greedy requires theta <= 0: privacy is impossible before any "
        "queries otherwise");
  check_query(params, q);

  if (auto it = state.commitments.find(q); it != state.commitments.end())
    return StepResult{it->second.response, false, true};

  const std::uint8_t x_q = x.x[q];
  bool violates = false;
  if (x_q) {
    for (std::size_t bi = 0; bi < beacon.size() && !violates; ++bi) {
      const double hypothetical =
          state.score_running[bi] +
          honest_contribution(params, g, beacon[bi], q, x_q);
      violates = hypothetical < theta;
    }
  }

  const std::uint8_t served = violates ? 0 : x_q;
  state.history.push_back(q);
  state.commitments[q] = OnlineState::Commitment{served, violates};
  if (violates) ++state.flips;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    state.eta_running[bi] += honest_contribution(params, g, beacon[bi], q, x_q);
    state.score_running[bi] +=
        served_contribution(params, g, beacon[bi], q, served);
  }
  return StepResult{served, violates, false};
}

StepResult online_greedy_adaptive_step(OnlineState& state, std::size_t q,
                                       const LrtParams& params,
                                       const GenotypeMatrix& g,
                                       std::span<const std::size_t> beacon,
                                       std::span<const std::size_t> reference,
                                       const ResponseVector& x, std::size_t k) {
  if (k < 1 || k > reference.size())
    throw ParameterError("K must satisfy 1 <= K <= |reference|");
  check_query(params, q);

  if (auto it = state.commitments.find(q); it != state.commitments.end())
    return StepResult{it->second.response, false, true};

  const std::uint8_t x_q = x.x[q];

  // Hypothetical honest serve: member and reference scores after answering q
  // truthfully, with the bottom-K reselected on that state.
  bool violates = false;
  if (x_q) {
    std::vector<double> ref_scores(reference.size());
    for (std::size_t r = 0; r < reference.size(); ++r)
      ref_scores[r] = state.ref_score_running[r] +
                      honest_contribution(params, g, reference[r], q, x_q);
    const double threshold = bottom_k_mean(ref_scores, k);
    for (std::size_t bi = 0; bi < beacon.size() && !violates; ++bi) {
      const double hypothetical =
          state.score_running[bi] +
          honest_contribution(params, g, beacon[bi], q, x_q);
      violates = hypothetical < threshold;
    }
  }

  const std::uint8_t served = violates ? 0 : x_q;
  state.history.push_back(q);
  state.commitments[q] = OnlineState::Commitment{served, violates};
  if (violates) ++state.flips;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    state.eta_running[bi] += honest_contribution(params, g, beacon[bi], q, x_q);
    state.score_running[bi] +=
        served_contribution(params, g, beacon[bi], q, served);
  }
  for (std::size_t r = 0; r < reference.size(); ++r) {
    state.ref_eta_running[r] +=
        honest_contribution(params, g, reference[r], q, x_q);
    state.ref_score_running[r] +=
        served_contribution(params, g, reference[r], q, served);
  }
  // eta^(K)(Q_t): mean honest eta over the bottom-K by committed score.
  std::vector<std::size_t> bottom;
  bottom_k_mean(state.ref_score_running, k, &bottom);
  double eta_sum = 0.0;
  for (std::size_t r : bottom) eta_sum += state.ref_eta_running[r];
  state.eta_k_running = eta_sum / static_cast<double>(k);

  return StepResult{served, violates, false};
}

void apply_committed(OnlineState& state, std::size_t q, std::uint8_t response,
                     bool flipped, const LrtParams& params,
                     const GenotypeMatrix& g,
                     std::span<const std::size_t> beacon,
                     std::span<const std::size_t> reference,
                     const ResponseVector& x) {
  check_query(params, q);
  if (state.commitments.count(q))
    throw ContractError("apply_committed on an SNV this session already holds");
  state.history.push_back(q);
  state.commitments[q] = OnlineState::Commitment{response, flipped};
  if (flipped) ++state.flips;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    state.eta_running[bi] +=
        honest_contribution(params, g, beacon[bi], q, x.x[q]);
    state.score_running[bi] +=
        served_contribution(params, g, beacon[bi], q, response);
  }
  for (std::size_t r = 0; r < reference.size(); ++r) {
    state.ref_eta_running[r] +=
        honest_contribution(params, g, reference[r], q, x.x[q]);
    state.ref_score_running[r] +=
        served_contribution(params, g, reference[r], q, response);
  }
}

double max_running_drift(const OnlineState& state, const LrtParams& params,
                         const GenotypeMatrix& g,
                         std::span<const std::size_t> beacon,
                         std::span<const std::size_t> reference,
                         const ResponseVector& x) {
  double worst = 0.0;
  const auto check = [&](double incremental, double scratch) {
    const double denom = std::max(1.0, std::abs(scratch));
    worst = std::max(worst, std::abs(incremental - scratch) / denom);
  };
  const auto scratch_pair = [&](std::size_t ind) {
    double eta = 0.0, score = 0.0;
    for (std::size_t j : state.history) {
      eta += honest_contribution(params, g, ind, j, x.x[j]);
      score += served_contribution(params, g, ind, j,
                                   state.commitments.at(j).response);
    }
    return std::pair<double, double>{eta, score};
  };
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    const auto [eta, score] = scratch_pair(beacon[bi]);
    check(state.eta_running[bi], eta);
    check(state.score_running[bi], score);
  }
  for (std::size_t r = 0; r < reference.size(); ++r) {
    const auto [eta, score] = scratch_pair(reference[r]);
    check(state.ref_eta_running[r], eta);
    check(state.ref_score_running[r], score);
  }
  return worst;
}

double unauth_worst_case_margin(const LrtParams& params,
                                const GenotypeMatrix& g, std::size_t individual,
                                const FlipSet& flips, const ResponseVector& x,
                                double theta) {
  double sum = 0.0;
  for (std::size_t j = 0; j < params.n_snvs(); ++j) {
    if (!x.x[j] || !g.get(individual, j) || flips.flips(j)) continue;
    sum += params.a[j];
  }
  return sum - theta;
}

namespace {

std::vector<double> unauth_margins(const LrtParams& params,
                                   const GenotypeMatrix& g,
                                   std::span<const std::size_t> beacon,
                                   const FlipSet& flips,
                                   const ResponseVector& x, double theta) {
  std::vector<double> margins(beacon.size());
  for (std::size_t bi = 0; bi < beacon.size(); ++bi)
    margins[bi] = unauth_worst_case_margin(params, g, beacon[bi], flips, x, theta);
  return margins;
}

std::optional<std::size_t> first_violation_index(const std::vector<double>& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!(m[i] >= -kMarginSlack)) return i;
  return std::nullopt;
}

}  // namespace

DefenseResult unauth_fixed_solve(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> beacon,
                                 const ResponseVector& x, double theta,
                                 SolveMode mode, const BatchOptions& opts) {
  const std::size_t m = params.n_snvs();
  const QuerySet all = QuerySet::all(m);
  const auto ed = eta_and_deltas(params, g, beacon, all, x);

  DefenseResult result;
  result.flips = FlipSet::none(m);

  if (theta > 0.0) {
    result.feasible = false;
    result.note = "theta > 0 is infeasible: the empty query set already violates";
    result.margins = unauth_margins(params, g, beacon, result.flips, x, theta);
    result.witness = 0;
    return result;
  }

  // Union of supports, ascending; the only queries worth flipping.
  std::vector<std::size_t> pool;
  for (const auto& p : ed.support) pool.insert(pool.end(), p.begin(), p.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  if (theta == 0.0) {
    // Unique feasible solution: every supported query must be masked.
    result.flips = FlipSet::from_indices(m, pool);
    result.iterations = 1;
    result.margins = unauth_margins(params, g, beacon, result.flips, x, theta);
    result.feasible = true;
    return result;
  }

  if (opts.max_aaf) {
    std::vector<std::size_t> filtered;
    for (std::size_t j : pool) {
      const double f = 1.0 - std::exp(params.log_dn[j] / (2.0 * static_cast<double>(params.n)));
      if (f <= *opts.max_aaf) filtered.push_back(j);
    }
    pool = std::move(filtered);
  }

  if (mode == SolveMode::exact) {
    if (pool.size() > opts.max_exact_columns)
      throw SizeError("exact solver limited to " +
                      std::to_string(opts.max_exact_columns) +
                      " flippable columns (got " + std::to_string(pool.size()) +
                      "); use the greedy solver instead");
    const std::size_t c = pool.size();
    std::size_t examined = 0;
    for (std::size_t size = 0; size <= c; ++size) {
      std::vector<std::size_t> picks(size);
      for (std::size_t i = 0; i < size; ++i) picks[i] = i;
      for (;;) {
        ++examined;
        std::vector<std::size_t> snvs(size);
        for (std::size_t i = 0; i < size; ++i) snvs[i] = pool[picks[i]];
        const FlipSet trial = FlipSet::from_indices(m, snvs);
        bool ok = true;
        for (std::size_t bi = 0; bi < beacon.size() && ok; ++bi)
          ok = unauth_worst_case_margin(params, g, beacon[bi], trial, x, theta) >= 0.0;
        if (ok) {
          result.flips = trial;
          result.iterations = examined;
          result.margins = unauth_margins(params, g, beacon, trial, x, theta);
          result.feasible = true;
          return result;
        }
        std::size_t i = size;
        while (i > 0 && picks[i - 1] == c - size + i - 1) --i;
        if (i == 0) break;
        ++picks[i - 1];
        for (std::size_t k2 = i; k2 < size; ++k2) picks[k2] = picks[k2 - 1] + 1;
      }
    }
    result.feasible = false;
    result.note = "no subset of the candidate pool satisfies all members";
    result.margins = unauth_margins(params, g, beacon, result.flips, x, theta);
    result.witness = first_violation_index(result.margins);
    return result;
  }

  // Greedy: MI scheme with |A_j| as the per-query weight.
  std::vector<char> available(m, 0);
  for (std::size_t j : pool) available[j] = 1;

  std::vector<double> worst(beacon.size());  // sum over P_i \ F of A_j
  std::vector<char> covered(beacon.size(), 0);
  std::size_t uncovered = 0;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    double s = 0.0;
    for (std::size_t j : ed.support[bi]) s += params.a[j];
    worst[bi] = s;
    covered[bi] = s >= theta;
    if (!covered[bi]) ++uncovered;
  }

  while (uncovered > 0) {
    std::size_t best_j = m;
    double best_score = 0.0;
    for (std::size_t j : pool) {
      if (!available[j]) continue;
      std::size_t affected = 0;
      for (std::size_t bi = 0; bi < beacon.size(); ++bi)
        if (!covered[bi] && g.get(beacon[bi], j)) ++affected;
      if (affected == 0) continue;
      const double score = std::abs(params.a[j]) * static_cast<double>(affected) /
                           static_cast<double>(uncovered);
      if (score > best_score) {
        best_score = score;
        best_j = j;
      }
    }
    if (best_j == m) {
      result.feasible = false;
      for (std::size_t bi = 0; bi < beacon.size(); ++bi)
        if (!covered[bi]) {
          result.witness = bi;
          break;
        }
      result.note = "no remaining flippable query helps the uncovered members";
      result.margins = unauth_margins(params, g, beacon, result.flips, x, theta);
      return result;
    }
    result.flips.y[best_j] = 1;
    available[best_j] = 0;
    ++result.iterations;
    for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
      if (covered[bi] || !g.get(beacon[bi], best_j)) continue;
      worst[bi] -= params.a[best_j];  // masking removes a negative term
      if (worst[bi] >= theta) {
        covered[bi] = 1;
        --uncovered;
      }
    }
  }

  result.margins = unauth_margins(params, g, beacon, result.flips, x, theta);
  result.feasible = true;
  for (double mg : result.margins)
    if (!(mg >= -kMarginSlack)) result.feasible = false;
  return result;
}

DefenseResult unauth_adaptive_solve(const LrtParams& params,
                                    const GenotypeMatrix& g,
                                    std::span<const std::size_t> beacon,
                                    std::span<const std::size_t> reference,
                                    const ResponseVector& x, std::size_t k,
                                    const BatchOptions& opts) {
  const std::size_t m = params.n_snvs();
  const QuerySet all = QuerySet::all(m);
  const auto aq = adaptive_quantities(params, g, beacon, reference, all, x, k);

  DefenseResult result;
  result.flips = FlipSet::none(m);

  // k_i from the S0 side; constant in y.
  std::vector<double> needed(beacon.size(), 0.0);
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (x.x[j]) continue;
      acc += std::min(aq.d_ik(g, beacon[bi], j) * params.b[j], 0.0);
    }
    needed[bi] = -acc;
  }

  const auto w_term = [&](std::size_t individual, std::size_t j, bool flipped) {
    const double dk = aq.d_ik(g, individual, j);
    const double base = dk * params.a[j];
    return std::min((flipped ? aq.delta_ik(params, g, individual, j) : 0.0) + base,
                    0.0);
  };
  const auto w_of = [&](std::size_t individual, const FlipSet& y) {
    double acc = 0.0;
    for (std::size_t j : aq.q1) acc += w_term(individual, j, y.flips(j));
    return acc;
  };

  auto pool = eligible_flips(aq, params, g, beacon);
  if (opts.max_aaf) {
    std::vector<std::size_t> filtered;
    for (std::size_t j : pool) {
      const double f = 1.0 - std::exp(params.log_dn[j] / (2.0 * static_cast<double>(params.n)));
      if (f <= *opts.max_aaf) filtered.push_back(j);
    }
    pool = std::move(filtered);
  }
  std::vector<char> available(m, 0);
  for (std::size_t j : pool) available[j] = 1;
  std::size_t remaining = pool.size();

  std::vector<double> w(beacon.size());
  std::vector<char> covered(beacon.size(), 0);
  std::size_t uncovered = 0;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    w[bi] = w_of(beacon[bi], result.flips);
    covered[bi] = w[bi] >= needed[bi];
    if (!covered[bi]) ++uncovered;
  }

  while (uncovered > 0 && remaining > 0) {
    std::size_t best_j = m;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j : pool) {
      if (!available[j]) continue;
      double total = 0.0;
      for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
        if (covered[bi]) continue;
        const std::size_t ind = beacon[bi];
        const double dk_a = aq.d_ik(g, ind, j) * params.a[j];
        const double delta_ik = aq.delta_ik(params, g, ind, j);
        total += (delta_ik + dk_a >= 0.0) ? std::abs(dk_a) : delta_ik;
      }
      const double score = total / static_cast<double>(uncovered);
      if (score > best_score) {
        best_score = score;
        best_j = j;
      }
    }
    result.flips.y[best_j] = 1;
    available[best_j] = 0;
    --remaining;
    ++result.iterations;
    for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
      if (covered[bi]) continue;
      const std::size_t ind = beacon[bi];
      w[bi] += w_term(ind, best_j, true) - w_term(ind, best_j, false);
      if (w[bi] >= needed[bi]) {
        covered[bi] = 1;
        --uncovered;
      }
    }
  }

  result.margins.resize(beacon.size());
  for (std::size_t bi = 0; bi < beacon.size(); ++bi)
    result.margins[bi] = w_of(beacon[bi], result.flips) - needed[bi];
  result.feasible = true;
  std::size_t worst_bi = 0;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    if (!(result.margins[bi] >= -kMarginSlack)) result.feasible = false;
    if (result.margins[bi] < result.margins[worst_bi]) worst_bi = bi;
  }
  if (!result.feasible) {
    result.witness = worst_bi;
    result.note = "eligible flips cannot lift the worst-case margin of member " +
                  std::to_string(worst_bi);
  }
  return result;
}

}  // namespace beacon
