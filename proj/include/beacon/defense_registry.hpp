#ifndef BEACON_DEFENSE_REGISTRY_HPP
#define BEACON_DEFENSE_REGISTRY_HPP

#include <string>

#include "beacon/baselines.hpp"
#include "beacon/defense_online.hpp"

namespace beacon {

// Method-by-name dispatch shared by the CLI and the service.
//   mig | gmbc | gkc | exact | adaptive-mig | unauth-exact | unauth-greedy
//   | rf | dp
struct DefenseRequest {
  std::string method = "mig";
  ThreatSpec threat;
  double beta_a = 1.0;  // gkc expectation model
  double beta_b = 5.0;
  double rf_p = 0.5;
  double dp_epsilon = 1.0;
  std::uint64_t seed = 0;
  BatchOptions options;
};

DefenseResult run_named_defense(const DefenseRequest& request,
                                const LrtParams& params,
                                const GenotypeMatrix& g,
                                std::span<const std::size_t> beacon,
                                const QuerySet& q, const ResponseVector& x);

const std::vector<std::string>& defense_method_names();

}  // namespace beacon

#endif  // BEACON_DEFENSE_REGISTRY_HPP
