#include "beacon/defense_batch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace beacon {

namespace {

// Post-check feasibility slack: absorbs summation-order roundoff without
// letting any real violation through (violations in this problem are O(|A_j|)
// at minimum).
constexpr double kMarginSlack = 1e-8;

bool margins_ok(const std::vector<double>& margins) {
  for (double m : margins)
    if (!(m >= -kMarginSlack)) return false;
  return true;
}

std::optional<std::size_t> first_violation(const std::vector<double>& margins) {
  for (std::size_t i = 0; i < margins.size(); ++i)
    if (!(margins[i] >= -kMarginSlack)) return i;
  return std::nullopt;
}

// Recovers f_j from the stored log D_n; only valid for true per-SNV params.
double aaf_of(const LrtParams& params, std::size_t j) {
  const double log_dn = params.log_dn[j];
  if (std::isnan(log_dn))
    throw ParameterError("max_aaf restriction requires per-SNV params");
  return 1.0 - std::exp(log_dn / (2.0 * static_cast<double>(params.n)));
}

std::vector<std::size_t> apply_aaf_filter(std::vector<std::size_t> candidates,
                                          const LrtParams& params,
                                          const BatchOptions& opts) {
  if (!opts.max_aaf) return candidates;
  std::vector<std::size_t> out;
  for (std::size_t j : candidates)
    if (aaf_of(params, j) <= *opts.max_aaf) out.push_back(j);
  return out;
}

std::vector<std::size_t> q1_of(const QuerySet& q, const ResponseVector& x) {
  std::vector<std::size_t> out;
  for (std::size_t j : q.members())
    if (x.x[j]) out.push_back(j);
  std::sort(out.begin(), out.end());
  return out;
}

void finalize(DefenseResult& r, const LrtParams& params,
              const GenotypeMatrix& g, std::span<const std::size_t> beacon,
              const QuerySet& q, const ResponseVector& x,
              const ThreatSpec& threat) {
  r.margins = privacy_margins(params, g, beacon, q, x, r.flips, threat);
  r.feasible = margins_ok(r.margins);
  if (!r.feasible && !r.witness) r.witness = first_violation(r.margins);
}

}  // namespace

std::vector<double> privacy_margins(const LrtParams& params,
                                    const GenotypeMatrix& g,
                                    std::span<const std::size_t> beacon,
                                    const QuerySet& q, const ResponseVector& x,
                                    const FlipSet& y, const ThreatSpec& threat) {
  std::vector<double> margins(beacon.size());
  if (threat.kind == ThreatSpec::Kind::fixed) {
    for (std::size_t bi = 0; bi < beacon.size(); ++bi)
      margins[bi] =
          lrt_score_flipped(params, g, beacon[bi], q, x, y) - threat.theta;
    return margins;
  }
  const auto aq =
      adaptive_quantities(params, g, beacon, threat.reference, q, x, threat.k);
  const auto ed = eta_and_deltas(params, g, beacon, q, x);
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    double lhs = ed.eta[bi];
    for (std::size_t j : aq.q1)
      if (y.flips(j)) lhs += aq.delta_ik(params, g, beacon[bi], j);
    margins[bi] = lhs - aq.eta_k;
  }
  return margins;
}

DefenseResult exact_min_flips(const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon,
                              const QuerySet& q, const ResponseVector& x,
                              const ThreatSpec& threat,
                              const BatchOptions& opts) {
  const std::size_t m = params.n_snvs();
  const auto ed = eta_and_deltas(params, g, beacon, q, x);

  std::vector<std::size_t> candidates;
  std::vector<double> base(beacon.size());  // condition value at y = 0
  double threshold = 0.0;
  // per-candidate, per-member coefficient of y_j in the condition
  std::vector<std::vector<double>> coeff;

  if (threat.kind == ThreatSpec::Kind::fixed) {
    candidates = apply_aaf_filter(q1_of(q, x), params, opts);
    threshold = threat.theta;
    base = ed.eta;
    coeff.resize(candidates.size(), std::vector<double>(beacon.size()));
    for (std::size_t c = 0; c < candidates.size(); ++c)
      for (std::size_t bi = 0; bi < beacon.size(); ++bi)
        coeff[c][bi] =
            g.get(beacon[bi], candidates[c]) ? params.gain[candidates[c]] : 0.0;
  } else {
    const auto aq = adaptive_quantities(params, g, beacon, threat.reference, q,
                                        x, threat.k);
    candidates =
        apply_aaf_filter(eligible_flips(aq, params, g, beacon), params, opts);
    threshold = aq.eta_k;
    base = ed.eta;
    coeff.resize(candidates.size(), std::vector<double>(beacon.size()));
    for (std::size_t c = 0; c < candidates.size(); ++c)
      for (std::size_t bi = 0; bi < beacon.size(); ++bi)
        coeff[c][bi] = aq.delta_ik(params, g, beacon[bi], candidates[c]);
  }

  if (candidates.size() > opts.max_exact_columns)
    throw SizeError("exact solver limited to " +
                    std::to_string(opts.max_exact_columns) +
                    " flippable columns (got " +
                    std::to_string(candidates.size()) +
                    "); use a greedy solver instead");

  DefenseResult result;
  result.flips = FlipSet::none(m);

  const std::size_t c = candidates.size();
  std::vector<double> cond(beacon.size());
  const auto subset_feasible = [&](const std::vector<std::size_t>& picks) {
    for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
      double v = base[bi];
      for (std::size_t p : picks) v += coeff[p][bi];
      if (!(v >= threshold)) return false;
    }
    return true;
  };

  // All candidate coefficients are >= 0 (fixed: gains; adaptive: eligibility),
  // so flipping everything is the best this pool can do.
  {
    std::vector<std::size_t> all(c);
    for (std::size_t i = 0; i < c; ++i) all[i] = i;
    if (!subset_feasible(all)) {
      for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
        double v = base[bi];
        for (std::size_t p : all) v += coeff[p][bi];
        cond[bi] = v - threshold;
      }
      result.feasible = false;
      result.witness = first_violation(cond);
      result.note = "no subset of the candidate pool satisfies all members";
      result.margins = privacy_margins(params, g, beacon, q, x, result.flips, threat);
      return result;
    }
  }

  std::size_t examined = 0;
  for (std::size_t size = 0; size <= c; ++size) {
    // lexicographic combinations of the candidate positions
    std::vector<std::size_t> picks(size);
    for (std::size_t i = 0; i < size; ++i) picks[i] = i;
    for (;;) {
      ++examined;
      if (subset_feasible(picks)) {
        std::vector<std::size_t> flip_snvs(size);
        for (std::size_t i = 0; i < size; ++i) flip_snvs[i] = candidates[picks[i]];
        result.flips = FlipSet::from_indices(m, flip_snvs);
        result.iterations = examined;
        finalize(result, params, g, beacon, q, x, threat);
        return result;
      }
      // advance to the next combination
      std::size_t i = size;
      while (i > 0 && picks[i - 1] == c - size + i - 1) --i;
      if (i == 0) break;
      ++picks[i - 1];
      for (std::size_t k2 = i; k2 < size; ++k2) picks[k2] = picks[k2 - 1] + 1;
    }
  }
  // unreachable: the all-candidates subset was feasible
  throw ContractError("exact enumeration missed the full candidate subset");
}

DefenseResult greedy_min_beacon_cover(
    const std::vector<std::vector<std::size_t>>& support, std::size_t m,
    const std::optional<std::vector<std::size_t>>& candidates) {
  DefenseResult result;
  result.flips = FlipSet::none(m);
  result.margins.assign(support.size(), -1.0);

  std::vector<std::size_t> pool;
  if (candidates) {
    pool = *candidates;
  } else {
    for (const auto& p : support) pool.insert(pool.end(), p.begin(), p.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  }

  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i].empty()) {
      result.feasible = false;
      result.witness = i;
      result.note = "individual " + std::to_string(i) + " has an empty support";
      return result;
    }
  }

  std::vector<char> covered(support.size(), 0);
  std::size_t n_uncovered = support.size();
  std::vector<char> in_pool(m, 0);
  for (std::size_t j : pool) in_pool[j] = 1;

  while (n_uncovered > 0) {
    std::size_t best_j = m;
    std::size_t best_count = 0;
    for (std::size_t j : pool) {
      if (!in_pool[j]) continue;
      std::size_t count = 0;
      for (std::size_t i = 0; i < support.size(); ++i) {
        if (covered[i]) continue;
        if (std::binary_search(support[i].begin(), support[i].end(), j)) ++count;
      }
      if (count > best_count) {  // strict: ties keep the lowest j
        best_count = count;
        best_j = j;
      }
    }
    if (best_count == 0) {
      result.feasible = false;
      for (std::size_t i = 0; i < support.size(); ++i)
        if (!covered[i]) {
          result.witness = i;
          break;
        }
      result.note = "candidate pool exhausted before full coverage";
      return result;
    }
    result.flips.y[best_j] = 1;
    in_pool[best_j] = 0;
    ++result.iterations;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (covered[i]) continue;
      if (std::binary_search(support[i].begin(), support[i].end(), best_j)) {
        covered[i] = 1;
        --n_uncovered;
      }
    }
  }

  // Coverage margins: |F cap P_i| - 1 >= 0.
  for (std::size_t i = 0; i < support.size(); ++i) {
    std::size_t hits = 0;
    for (std::size_t j : support[i])
      if (result.flips.flips(j)) ++hits;
    result.margins[i] = static_cast<double>(hits) - 1.0;
  }
  result.feasible = margins_ok(result.margins);
  return result;
}

std::vector<std::size_t> k_quotas(double theta, std::span<const double> eta,
                                  const BetaExpectationParams& expectation) {
  const double gain = expectation.gain();
  if (!(gain > 0.0)) throw ParameterError("expectation gain must be positive");
  std::vector<std::size_t> quota(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double need = (theta - eta[i]) / gain;
    quota[i] = need <= 0.0 ? 0 : static_cast<std::size_t>(std::ceil(need));
  }
  return quota;
}

DefenseResult greedy_k_cover(const std::vector<std::vector<std::size_t>>& support,
                             const std::vector<std::size_t>& quota,
                             std::size_t m) {
  if (quota.size() != support.size())
    throw ParameterError("quota count does not match support count");

  DefenseResult result;
  result.flips = FlipSet::none(m);

  for (std::size_t i = 0; i < support.size(); ++i) {
    if (quota[i] > support[i].size()) {
      result.feasible = false;
      result.witness = i;
      result.note = "quota " + std::to_string(quota[i]) + " exceeds support of individual " +
                    std::to_string(i);
      result.margins.assign(support.size(), 0.0);
      result.margins[i] =
          static_cast<double>(support[i].size()) - static_cast<double>(quota[i]);
      return result;
    }
  }

  std::vector<std::size_t> pool;
  for (const auto& p : support) pool.insert(pool.end(), p.begin(), p.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::vector<std::size_t> hits(support.size(), 0);
  std::vector<char> satisfied(support.size(), 0);
  std::size_t unsatisfied = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    satisfied[i] = hits[i] >= quota[i];
    if (!satisfied[i]) ++unsatisfied;
  }

  std::vector<char> available(m, 0);
  for (std::size_t j : pool) available[j] = 1;

  while (unsatisfied > 0) {
    std::size_t best_j = m;
    std::size_t best_count = 0;
    for (std::size_t j : pool) {
      if (!available[j]) continue;
      std::size_t count = 0;
      for (std::size_t i = 0; i < support.size(); ++i) {
        if (satisfied[i]) continue;
        if (std::binary_search(support[i].begin(), support[i].end(), j)) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best_j = j;
      }
    }
    if (best_count == 0) {
      result.feasible = false;
      for (std::size_t i = 0; i < support.size(); ++i)
        if (!satisfied[i]) {
          result.witness = i;
          break;
        }
      result.note = "flippable queries exhausted before quotas met";
      result.margins.assign(support.size(), 0.0);
      for (std::size_t i = 0; i < support.size(); ++i)
        result.margins[i] =
            static_cast<double>(hits[i]) - static_cast<double>(quota[i]);
      return result;
    }
    result.flips.y[best_j] = 1;
    available[best_j] = 0;
    ++result.iterations;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (satisfied[i]) continue;
      if (std::binary_search(support[i].begin(), support[i].end(), best_j)) {
        ++hits[i];
        if (hits[i] >= quota[i]) {
          satisfied[i] = 1;
          --unsatisfied;
        }
      }
    }
  }

  result.margins.resize(support.size());
  for (std::size_t i = 0; i < support.size(); ++i)
    result.margins[i] =
        static_cast<double>(hits[i]) - static_cast<double>(quota[i]);
  result.feasible = margins_ok(result.margins);
  return result;
}

DefenseResult mi_greedy(const LrtParams& params, const GenotypeMatrix& g,
                        std::span<const std::size_t> beacon, const QuerySet& q,
                        const ResponseVector& x, double theta,
                        const BatchOptions& opts) {
  const std::size_t m = params.n_snvs();
  const auto ed = eta_and_deltas(params, g, beacon, q, x);
  const ThreatSpec threat = ThreatSpec::fixed_threshold(theta);

  DefenseResult result;
  result.flips = FlipSet::none(m);

  auto pool = apply_aaf_filter(q1_of(q, x), params, opts);
  std::vector<char> available(m, 0);
  for (std::size_t j : pool) available[j] = 1;

  std::vector<double> added(beacon.size(), 0.0);
  std::vector<char> covered(beacon.size(), 0);
  std::size_t uncovered = 0;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    covered[bi] = ed.eta[bi] >= theta;
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
      const double score = params.gain[j] * static_cast<double>(affected) /
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
      result.margins = privacy_margins(params, g, beacon, q, x, result.flips, threat);
      return result;
    }
    result.flips.y[best_j] = 1;
    available[best_j] = 0;
    ++result.iterations;
    for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
      if (covered[bi] || !g.get(beacon[bi], best_j)) continue;
      added[bi] += params.gain[best_j];
      if (ed.eta[bi] + added[bi] >= theta) {
        covered[bi] = 1;
        --uncovered;
      }
    }
  }

  finalize(result, params, g, beacon, q, x, threat);
  return result;
}

DefenseResult adaptive_mi_greedy(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> beacon,
                                 std::span<const std::size_t> reference,
                                 const QuerySet& q, const ResponseVector& x,
                                 std::size_t k, const BatchOptions& opts) {
  const std::size_t m = params.n_snvs();
  const auto aq = adaptive_quantities(params, g, beacon, reference, q, x, k);
  const auto ed = eta_and_deltas(params, g, beacon, q, x);

  ThreatSpec threat;
  threat.kind = ThreatSpec::Kind::adaptive;
  threat.k = k;
  threat.reference.assign(reference.begin(), reference.end());

  DefenseResult result;
  result.flips = FlipSet::none(m);

  auto pool = apply_aaf_filter(eligible_flips(aq, params, g, beacon), params, opts);
  std::vector<char> available(m, 0);
  for (std::size_t j : pool) available[j] = 1;

  std::vector<double> added(beacon.size(), 0.0);
  std::vector<char> covered(beacon.size(), 0);
  std::size_t uncovered = 0;
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    covered[bi] = ed.eta[bi] >= aq.eta_k;
    if (!covered[bi]) ++uncovered;
  }

  std::size_t remaining = pool.size();
  while (uncovered > 0 && remaining > 0) {
    std::size_t best_j = m;
    double best_score = -1.0;
    for (std::size_t j : pool) {
      if (!available[j]) continue;
      double total = 0.0;
      for (std::size_t bi = 0; bi < beacon.size(); ++bi)
        if (!covered[bi]) total += aq.delta_ik(params, g, beacon[bi], j);
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
      added[bi] += aq.delta_ik(params, g, beacon[bi], best_j);
      if (ed.eta[bi] + added[bi] >= aq.eta_k) {
        covered[bi] = 1;
        --uncovered;
      }
    }
  }

  if (uncovered > 0) {
    result.feasible = false;
    for (std::size_t bi = 0; bi < beacon.size(); ++bi)
      if (!covered[bi]) {
        result.witness = bi;
        break;
      }
    result.note = "eligible flips exhausted with uncovered members remaining";
    result.margins = privacy_margins(params, g, beacon, q, x, result.flips, threat);
    return result;
  }

  finalize(result, params, g, beacon, q, x, threat);
  return result;
}

}  // namespace beacon
