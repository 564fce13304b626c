#ifndef BEACON_THREAT_HPP
#define BEACON_THREAT_HPP

#include <span>
#include <vector>

#include "beacon/lrt.hpp"

namespace beacon {

// Which attacker the defense targets: a fixed LRT threshold theta, or an
// adaptive threshold derived from the K lowest reference-population scores.
struct ThreatSpec {
  enum class Kind { fixed, adaptive };

  Kind kind = Kind::fixed;
  double theta = 0.0;                   // fixed only
  std::size_t k = 0;                    // adaptive only
  std::vector<std::size_t> reference;   // adaptive only

  static ThreatSpec fixed_threshold(double theta) {
    ThreatSpec t;
    t.kind = Kind::fixed;
    t.theta = theta;
    return t;
  }

  static ThreatSpec adaptive(std::size_t k, std::vector<std::size_t> reference);
};

// theta(Q): mean post-flip LRT of the K lowest-scoring reference individuals.
// Selection ties break toward the lower individual index.
double adaptive_threshold(const LrtParams& params, const GenotypeMatrix& g,
                          std::span<const std::size_t> reference,
                          const QuerySet& q, const ResponseVector& x,
                          const FlipSet& y, std::size_t k);

// Everything the adaptive privacy condition
//   sum_{j in Q1} (Delta_ij - Delta_j^(K)) y_j + eta_i >= eta^(K)
// needs, with the bottom-K reference set frozen from the unflipped scores.
// Per-(i,j) terms are derived on demand from delta_k/d_mean rather than
// stored as an n x m matrix.
struct AdaptiveQuantities {
  std::vector<std::size_t> bottom_k;  // reference individuals, ascending
  std::vector<double> delta_k;        // per SNV: sum_{k in bottom} Delta_kj / K
  std::vector<double> d_mean;         // per SNV: sum_{k in bottom} d_kj / K
  double eta_k = 0.0;                 // mean eta over bottom_k
  std::vector<std::size_t> q1;        // queried SNVs with x = 1, ascending

  // Delta_ij^(K) = d_ij gain_j - Delta_j^(K)
  double delta_ik(const LrtParams& params, const GenotypeMatrix& g,
                  std::size_t individual, std::size_t j) const {
    return (g.get(individual, j) ? params.gain[j] : 0.0) - delta_k[j];
  }
  // d_ij^(K) = d_ij - mean d over bottom_k
  double d_ik(const GenotypeMatrix& g, std::size_t individual,
              std::size_t j) const {
    return (g.get(individual, j) ? 1.0 : 0.0) - d_mean[j];
  }
};

// Builds AdaptiveQuantities with bottom-K selected once on the unflipped
// responses. Runs a floating-point cross-check that the rewritten condition
// matches L_i - theta(Q) under a held-fixed bottom-K; throws ContractError on
// disagreement.
AdaptiveQuantities adaptive_quantities(const LrtParams& params,
                                       const GenotypeMatrix& g,
                                       std::span<const std::size_t> beacon,
                                       std::span<const std::size_t> reference,
                                       const QuerySet& q,
                                       const ResponseVector& x, std::size_t k);

// {j in Q1 : Delta_ij^(K) >= 0 for every beacon member i}. Flipping inside
// this set can never shrink an already-satisfied member's margin.
std::vector<std::size_t> eligible_flips(const AdaptiveQuantities& aq,
                                        const LrtParams& params,
                                        const GenotypeMatrix& g,
                                        std::span<const std::size_t> beacon);

}  // namespace beacon

#endif  // BEACON_THREAT_HPP
