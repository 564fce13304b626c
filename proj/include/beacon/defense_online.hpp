#ifndef BEACON_DEFENSE_ONLINE_HPP
#define BEACON_DEFENSE_ONLINE_HPP

#include <unordered_map>

#include "beacon/defense_batch.hpp"

namespace beacon {

// Per-session state for the online defenses. Responses are commitments: once
// an SNV has been answered, every later answer must match. Running eta/score
// vectors are updated in O(beacon) per query and must always equal their
// from-scratch counterparts.
struct OnlineState {
  struct Commitment {
    std::uint8_t response = 0;
    bool flipped = false;
  };

  std::vector<std::size_t> history;  // non-repeating query order
  std::unordered_map<std::size_t, Commitment> commitments;

  std::vector<double> eta_running;    // per member: eta_i(Q_t), honest part
  std::vector<double> score_running;  // per member: L_i(Q_t, x, y)

  // Adaptive bookkeeping (empty in fixed mode).
  std::vector<double> ref_eta_running;
  std::vector<double> ref_score_running;
  double eta_k_running = 0.0;

  std::size_t flips = 0;
};

OnlineState make_online_state(std::size_t beacon_count,
                              std::size_t reference_count = 0);

struct StepResult {
  std::uint8_t response = 0;
  bool flipped = false;   // whether THIS step introduced a flip
  bool replayed = false;  // answered from an existing commitment
};

// Fixed-threshold Online Greedy: flip the incoming query iff answering
// honestly would put some member below theta. Requires theta <= 0 (above 0
// privacy is violated before any query is made). After every step all
// members satisfy L_i(Q_t) >= theta.
StepResult online_greedy_step(OnlineState& state, std::size_t q,
                              const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon,
                              const ResponseVector& x, double theta);

// Adaptive variant: the bottom-K reference set and its mean are recomputed
// from the committed responses at every step, and the query is flipped iff
// some member's post-flip score would fall below that mean under the honest
// answer. Best effort only; no privacy guarantee exists in this setting.
StepResult online_greedy_adaptive_step(OnlineState& state, std::size_t q,
                                       const LrtParams& params,
                                       const GenotypeMatrix& g,
                                       std::span<const std::size_t> beacon,
                                       std::span<const std::size_t> reference,
                                       const ResponseVector& x, std::size_t k);

// Injects an externally decided commitment (another session already answered
// this SNV). Appends to history and updates the running sums without making
// any flip decision.
void apply_committed(OnlineState& state, std::size_t q, std::uint8_t response,
                     bool flipped, const LrtParams& params,
                     const GenotypeMatrix& g,
                     std::span<const std::size_t> beacon,
                     std::span<const std::size_t> reference,
                     const ResponseVector& x);

// Largest |incremental - from-scratch| / max(1, |from-scratch|) over the eta
// and score vectors; test hook for the incremental-update invariant.
double max_running_drift(const OnlineState& state, const LrtParams& params,
                         const GenotypeMatrix& g,
                         std::span<const std::size_t> beacon,
                         std::span<const std::size_t> reference,
                         const ResponseVector& x);

// Unauthenticated worst case in closed form: the min over query subsets of
// L_i - theta equals
// sum_{j in P_i(S) \ F} A_j - theta.
double unauth_worst_case_margin(const LrtParams& params,
                                const GenotypeMatrix& g, std::size_t individual,
                                const FlipSet& flips, const ResponseVector& x,
                                double theta);

enum class SolveMode { exact, greedy };

// Unauthenticated fixed-threshold defense over Q = S, decided entirely
// up-front. theta = 0 admits exactly one solution, the union of all member
// supports; theta > 0 is infeasible. Greedy mode is the MI scheme with
// per-query weight |A_j|.
DefenseResult unauth_fixed_solve(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> beacon,
                                 const ResponseVector& x, double theta,
                                 SolveMode mode, const BatchOptions& opts = {});

// Unauthenticated adaptive defense. Per-member worst case
//   W_i(y) = sum_{j in S1} min(Delta_ij^(K) y_j + d_ij^(K) A_j, 0)
// must reach k_i = -sum_{j in S0} min(d_ij^(K) B_j, 0). Greedy over eligible
// queries ranked by mean marginal impact; may be infeasible, in which case
// the worst-margin member is reported.
DefenseResult unauth_adaptive_solve(const LrtParams& params,
                                    const GenotypeMatrix& g,
                                    std::span<const std::size_t> beacon,
                                    std::span<const std::size_t> reference,
                                    const ResponseVector& x, std::size_t k,
                                    const BatchOptions& opts = {});

}  // namespace beacon

#endif  // BEACON_DEFENSE_ONLINE_HPP
