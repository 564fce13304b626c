#ifndef BEACON_VERIFY_HPP
#define BEACON_VERIFY_HPP

#include <iosfwd>

#include "beacon/defense_registry.hpp"

namespace beacon {

// Seeded random problem instance used by the property suites.
struct InstanceOptions {
  std::size_t n_beacon_min = 2, n_beacon_max = 8;
  std::size_t m_min = 4, m_max = 16;
  std::size_t n_reference = 6;
  double delta = 0.2;
  double beta_a = 1.0, beta_b = 3.0;
};

struct RandomInstance {
  GenotypeMatrix g;
  AafVector aaf;
  PopulationSplit split;
  LrtParams params;
  QuerySet q;  // all of S
  ResponseVector x;
};

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& opts);

// Exhaustive min over all query subsets of L_i(Q', x, y); 2^m evaluations.
double brute_force_worst_case(const LrtParams& params, const GenotypeMatrix& g,
                              std::size_t individual, const ResponseVector& x,
                              const FlipSet& y);

// Exhaustive min of the adaptive worst-case expression over independent
// subsets of S1 and S0.
double brute_force_adaptive_worst(const LrtParams& params,
                                  const GenotypeMatrix& g,
                                  const AdaptiveQuantities& aq,
                                  std::size_t individual,
                                  const ResponseVector& x, const FlipSet& y);

// Exhaustive minimum Beacon-Cover size (hitting set over the supports).
std::size_t brute_force_min_cover(
    const std::vector<std::vector<std::size_t>>& support, std::size_t m);

// Runs every invariant/property suite; prints one line per suite to log.
// Returns true when everything holds.
bool run_verification(std::uint64_t seed, std::ostream& log);

}  // namespace beacon

#endif  // BEACON_VERIFY_HPP
