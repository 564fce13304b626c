#include "beacon/defense_registry.hpp"

namespace beacon {

namespace {

DefenseResult baseline_result(FlipSet flips, const LrtParams& params,
                              const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon,
                              const QuerySet& q, const ResponseVector& x,
                              const ThreatSpec& threat) {
  DefenseResult r;
  r.flips = std::move(flips);
  r.margins = privacy_margins(params, g, beacon, q, x, r.flips, threat);
  r.feasible = true;
  for (std::size_t bi = 0; bi < r.margins.size(); ++bi) {
    if (r.margins[bi] < 0.0) {
      r.feasible = false;
      if (!r.witness) r.witness = bi;
    }
  }
  return r;
}

}  // namespace

DefenseResult run_named_defense(const DefenseRequest& request,
                                const LrtParams& params,
                                const GenotypeMatrix& g,
                                std::span<const std::size_t> beacon,
                                const QuerySet& q, const ResponseVector& x) {
  const std::string& method = request.method;
  const ThreatSpec& threat = request.threat;
  const std::size_t m = params.n_snvs();

  const auto require_fixed = [&] {
    if (threat.kind != ThreatSpec::Kind::fixed)
      throw ConfigError("method '" + method + "' requires a fixed threshold");
  };
  const auto require_adaptive = [&] {
    if (threat.kind != ThreatSpec::Kind::adaptive)
      throw ConfigError("method '" + method + "' requires an adaptive threat");
  };

  if (method == "exact")
    return exact_min_flips(params, g, beacon, q, x, threat, request.options);

  if (method == "mig") {
    require_fixed();
    return mi_greedy(params, g, beacon, q, x, threat.theta, request.options);
  }

  if (method == "gmbc") {
    require_fixed();
    const auto ed = eta_and_deltas(params, g, beacon, q, x);
    return greedy_min_beacon_cover(ed.support, m);
  }

  if (method == "gkc") {
    require_fixed();
    const auto expectation = beta_expectation_params(
        request.beta_a, request.beta_b, params.n, params.delta);
    const LrtParams cp =
        make_constant_params(expectation.a, expectation.b, m, params.n, params.delta);
    const auto ed = eta_and_deltas(cp, g, beacon, q, x);
    const auto quota = k_quotas(threat.theta, ed.eta, expectation);
    DefenseResult r = greedy_k_cover(ed.support, quota, m);
    // Margins under the expectation model the quotas came from.
    r.margins = privacy_margins(cp, g, beacon, q, x, r.flips,
                                ThreatSpec::fixed_threshold(threat.theta));
    return r;
  }

  if (method == "adaptive-mig") {
    require_adaptive();
    return adaptive_mi_greedy(params, g, beacon, threat.reference, q, x,
                              threat.k, request.options);
  }

  if (method == "unauth-exact" || method == "unauth-greedy") {
    require_fixed();
    return unauth_fixed_solve(params, g, beacon, x, threat.theta,
                              method == "unauth-exact" ? SolveMode::exact
                                                       : SolveMode::greedy,
                              request.options);
  }

  if (method == "unauth-adaptive") {
    require_adaptive();
    return unauth_adaptive_solve(params, g, beacon, threat.reference, x,
                                 threat.k, request.options);
  }

  if (method == "rf")
    return baseline_result(rf_defend(g, beacon, x, request.rf_p, request.seed),
                           params, g, beacon, q, x, threat);

  if (method == "dp")
    return baseline_result(dp_defend(x, request.dp_epsilon, request.seed),
                           params, g, beacon, q, x, threat);

  throw ConfigError("unknown defense method '" + method + "'");
}

const std::vector<std::string>& defense_method_names() {
  static const std::vector<std::string> names = {
      "mig",          "gmbc",          "gkc",
      "exact",        "adaptive-mig",  "unauth-exact",
      "unauth-greedy", "unauth-adaptive", "rf",
      "dp"};
  return names;
}

}  // namespace beacon
