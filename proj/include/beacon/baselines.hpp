#ifndef BEACON_BASELINES_HPP
#define BEACON_BASELINES_HPP

#include "beacon/threat.hpp"

namespace beacon {

struct BaselineConfig {
  enum class Kind { rf, dp };
  Kind kind = Kind::rf;
  double p = 0.0;        // rf: flip probability for unique-carrier SNVs
  double epsilon = 1.0;  // dp: privacy budget
  std::uint64_t seed = 0;
};

// Raisaro-style random flipping: every SNV carried by exactly one beacon
// member (and answered 1) is flipped independently with probability p.
FlipSet rf_defend(const GenotypeMatrix& g, std::span<const std::size_t> beacon,
                  const ResponseVector& x, double p, std::uint64_t seed);

// Randomized response restricted to 1->0: each 1-response flips with
// probability q = 1 / (1 + e^epsilon).
FlipSet dp_defend(const ResponseVector& x, double epsilon, std::uint64_t seed);

struct CalibrationResult {
  BaselineConfig config;
  bool achievable = false;  // some grid point protected everyone in all trials
  double mean_flips = 0.0;  // over the winning point's trials
};

// Grid searches the baseline parameter (p ascending from 0; epsilon along the
// fixed descending grid) and returns the highest-utility point whose every
// seeded trial reaches privacy_fraction = 1 under the given threat.
CalibrationResult calibrate_baseline(BaselineConfig::Kind kind,
                                     const LrtParams& params,
                                     const GenotypeMatrix& g,
                                     std::span<const std::size_t> beacon,
                                     const QuerySet& q, const ResponseVector& x,
                                     const ThreatSpec& threat,
                                     std::size_t budget, std::uint64_t seed);

}  // namespace beacon

#endif  // BEACON_BASELINES_HPP
