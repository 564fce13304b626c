#include "beacon/baselines.hpp"

#include <cmath>

#include "beacon/attack.hpp"
#include "beacon/rng.hpp"

namespace beacon {

FlipSet rf_defend(const GenotypeMatrix& g, std::span<const std::size_t> beacon,
                  const ResponseVector& x, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("p must lie in [0,1]");
  const std::size_t m = g.n_snvs();
  if (x.size() != m) throw ParameterError("response length does not match matrix");

  Rng rng(seed);
  FlipSet fs = FlipSet::none(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!x.x[j]) continue;
    std::size_t carriers = 0;
    for (std::size_t i : beacon)
      if (g.get(i, j) && ++carriers > 1) break;
    if (carriers != 1) continue;
    if (rng.bernoulli(p)) fs.y[j] = 1;
  }
  return fs;
}

FlipSet dp_defend(const ResponseVector& x, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  const double q = 1.0 / (1.0 + std::exp(epsilon));
  Rng rng(seed);
  FlipSet fs = FlipSet::none(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!x.x[j]) continue;
    if (rng.bernoulli(q)) fs.y[j] = 1;
  }
  return fs;
}

namespace {

// True iff every trial at this parameter protects every beacon member.
bool all_trials_private(BaselineConfig::Kind kind, double param,
                        const LrtParams& params, const GenotypeMatrix& g,
                        std::span<const std::size_t> beacon, const QuerySet& q,
                        const ResponseVector& x, const ThreatSpec& threat,
                        std::size_t budget, std::uint64_t seed,
                        double* mean_flips) {
  std::vector<std::uint8_t> member_of(beacon.size(), 1);
  double flips_total = 0.0;
  for (std::size_t trial = 0; trial < budget; ++trial) {
    const std::uint64_t trial_seed = mix_seed(seed, trial);
    const FlipSet fs = kind == BaselineConfig::Kind::rf
                           ? rf_defend(g, beacon, x, param, trial_seed)
                           : dp_defend(x, param, trial_seed);
    flips_total += static_cast<double>(fs.flipped_count());
    const ResponseVector served = apply_flips(x, fs);
    AttackReport report;
    if (threat.kind == ThreatSpec::Kind::fixed) {
      report = run_fixed_attack(params, g, beacon, member_of, q, served,
                                threat.theta, fs.flipped_count());
    } else {
      report = run_adaptive_attack(params, g, beacon, member_of,
                                   threat.reference, q, served, threat.k,
                                   fs.flipped_count());
    }
    if (report.privacy_fraction < 1.0) return false;
  }
  *mean_flips = flips_total / static_cast<double>(budget);
  return true;
}

}  // namespace

CalibrationResult calibrate_baseline(BaselineConfig::Kind kind,
                                     const LrtParams& params,
                                     const GenotypeMatrix& g,
                                     std::span<const std::size_t> beacon,
                                     const QuerySet& q, const ResponseVector& x,
                                     const ThreatSpec& threat,
                                     std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw ParameterError("budget must be >= 1");

  // Highest-utility-first orders: fewest expected flips first.
  static const double kPGrid[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                  0.6, 0.7, 0.8, 0.9, 1.0};
  static const double kEpsGrid[] = {5.0, 2.0, 1.0, 0.5, 0.1, 0.05, 0.01};

  CalibrationResult result;
  result.config.kind = kind;
  result.config.seed = seed;

  const auto grid = kind == BaselineConfig::Kind::rf
                        ? std::span<const double>(kPGrid)
                        : std::span<const double>(kEpsGrid);
  for (double param : grid) {
    double mean_flips = 0.0;
    if (all_trials_private(kind, param, params, g, beacon, q, x, threat, budget,
                           seed, &mean_flips)) {
      result.achievable = true;
      result.mean_flips = mean_flips;
      if (kind == BaselineConfig::Kind::rf)
        result.config.p = param;
      else
        result.config.epsilon = param;
      return result;
    }
  }
  return result;  // achievable = false: grid exhausted
}

}  // namespace beacon
