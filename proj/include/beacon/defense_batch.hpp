#ifndef BEACON_DEFENSE_BATCH_HPP
#define BEACON_DEFENSE_BATCH_HPP

#include <optional>
#include <string>

#include "beacon/threat.hpp"

namespace beacon {

// Outcome of any defense solver. Infeasibility is a normal result, not an
// exception: feasible=false plus the first individual that cannot be
// protected. Margins are always recomputed through lrt_core after the solver
// finishes; they are never taken from the solver's internal bookkeeping.
struct DefenseResult {
  FlipSet flips;
  std::vector<double> margins;  // per beacon member, condition value - threshold
  bool feasible = false;
  std::size_t iterations = 0;
  std::optional<std::size_t> witness;  // position in the beacon list
  std::string note;
};

struct BatchOptions {
  std::size_t max_exact_columns = 24;
  // Only SNVs with f_j <= max_aaf may be flipped (rarity restriction).
  std::optional<double> max_aaf;
};

// Independent post-check: condition value minus threshold per beacon member.
// fixed: L_i(Q,x,y) - theta; adaptive: (sum Delta_ij^(K) y_j + eta_i) - eta^(K)
// with bottom-K frozen from the unflipped responses.
std::vector<double> privacy_margins(const LrtParams& params,
                                    const GenotypeMatrix& g,
                                    std::span<const std::size_t> beacon,
                                    const QuerySet& q, const ResponseVector& x,
                                    const FlipSet& y, const ThreatSpec& threat);

// Exhaustive minimum-cardinality search over subsets of Q1 (fixed) or of the
// eligible set (adaptive), staged by cardinality with subsets in lexicographic
// order, so the returned optimum is deterministic. Throws SizeError when the
// candidate pool exceeds opts.max_exact_columns.
DefenseResult exact_min_flips(const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon,
                              const QuerySet& q, const ResponseVector& x,
                              const ThreatSpec& threat,
                              const BatchOptions& opts = {});

// Classic greedy set cover over R_j = {i : j in P_i}; each pick maximizes the
// newly covered count, ties toward the lowest SNV index. Margins are coverage
// counts |F cap P_i|, not LRT margins; the certified delta bound supplies the privacy link.
DefenseResult greedy_min_beacon_cover(
    const std::vector<std::vector<std::size_t>>& support, std::size_t m,
    const std::optional<std::vector<std::size_t>>& candidates = std::nullopt);

// Per-individual quotas for the Beta-expectation model:
// k_i = max(0, ceil((theta - eta_i) / (B - A))).
std::vector<std::size_t> k_quotas(double theta, std::span<const double> eta,
                                  const BetaExpectationParams& expectation);

// Greedy k-cover: a member is satisfied once |F cap P_i| >= k_i. Margins are
// |F cap P_i| - k_i.
DefenseResult greedy_k_cover(const std::vector<std::vector<std::size_t>>& support,
                             const std::vector<std::size_t>& quota,
                             std::size_t m);

// Marginal-impact greedy for fixed thresholds: flip the j maximizing
// gain_j * |T_j| / |uncovered| until every member satisfies L_i >= theta.
DefenseResult mi_greedy(const LrtParams& params, const GenotypeMatrix& g,
                        std::span<const std::size_t> beacon, const QuerySet& q,
                        const ResponseVector& x, double theta,
                        const BatchOptions& opts = {});

// MI greedy against the adaptive threshold: candidates restricted to the
// eligible set, per-pick score is the mean of Delta_ij^(K) over uncovered
// members, coverage is the rewritten adaptive condition. May exhaust the
// eligible set and report infeasible.
DefenseResult adaptive_mi_greedy(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> beacon,
                                 std::span<const std::size_t> reference,
                                 const QuerySet& q, const ResponseVector& x,
                                 std::size_t k, const BatchOptions& opts = {});

}  // namespace beacon

#endif  // BEACON_DEFENSE_BATCH_HPP
