#ifndef BEACON_ATTACK_HPP
#define BEACON_ATTACK_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "beacon/lrt.hpp"

namespace beacon {

// Outcome of one attack run over a target population. The claim rule is
// strict (L_i < theta), so boundary scores are never claimed; defenses use
// >= on the same boundary.
struct AttackReport {
  std::vector<double> scores;          // per target
  std::vector<std::uint8_t> claims;    // per target
  double tpr = 0.0;                    // claimed members / members
  double fpr = 0.0;                    // claimed non-members / non-members
  double privacy_fraction = 1.0;       // 1 - tpr
  double threshold_used = 0.0;
  std::size_t flips_used = 0;
};

// Fixed-threshold LRT attack. targets must contain every beacon member
// (worst case); membership says which targets are members.
AttackReport run_fixed_attack(const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> targets,
                              std::span<const std::uint8_t> membership,
                              const QuerySet& q, const ResponseVector& x_served,
                              double theta, std::size_t flips_used = 0);

// Adaptive attack: the threshold is recomputed from the post-defense scores
// of the reference population (fresh bottom-K selection).
AttackReport run_adaptive_attack(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> targets,
                                 std::span<const std::uint8_t> membership,
                                 std::span<const std::size_t> reference,
                                 const QuerySet& q,
                                 const ResponseVector& x_served, std::size_t k,
                                 std::size_t flips_used = 0);

// Two-cluster 1-D Lloyd's over LRT scores; the lower-mean cluster is claimed
// as the beacon. Run 0 starts centroids at min/max; further runs use seeded
// uniform initializations in the score range. Returns mean (tpr, fpr) over
// runs. Throws DegenerateError when all scores are identical.
std::pair<double, double> clustering_attack(std::span<const double> scores,
                                            std::span<const std::uint8_t> membership,
                                            std::size_t runs, std::uint64_t seed);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), threshold-swept
  double auc = 0.0;                               // trapezoidal; attack success
};

// Threshold sweep over the distinct scores plus both infinities. Points are
// nondecreasing in both coordinates and anchored at (0,0) and (1,1).
RocCurve roc_curve(std::span<const double> scores,
                   std::span<const std::uint8_t> membership);

// Flat JSON object.
std::string attack_report_json(const AttackReport& report);
// Header + "fpr,tpr" rows, 17 significant digits.
void write_roc_csv(const RocCurve& roc, std::ostream& out);

}  // namespace beacon

#endif  // BEACON_ATTACK_HPP
