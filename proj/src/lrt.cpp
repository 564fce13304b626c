#include "beacon/lrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace beacon {

namespace {

// ln(1 - e^z) for z < 0, stable near both ends.
double log1mexp(double z) {
  if (z >= 0.0) return -std::numeric_limits<double>::infinity();
  if (z > -0.6931471805599453)  // -ln 2
    return std::log(-std::expm1(z));
  return std::log1p(-std::exp(z));
}

}  // namespace

QuerySet::QuerySet(std::vector<std::size_t> members)
    : members_(std::move(members)) {
  std::unordered_set<std::size_t> seen;
  for (std::size_t j : members_) {
    if (!seen.insert(j).second)
      throw ParameterError("duplicate query index " + std::to_string(j));
  }
}

QuerySet QuerySet::all(std::size_t m) {
  std::vector<std::size_t> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = j;
  return QuerySet(std::move(v));
}

FlipSet FlipSet::from_indices(std::size_t m,
                              std::span<const std::size_t> flipped) {
  FlipSet fs = FlipSet::none(m);
  for (std::size_t j : flipped) {
    if (j >= m) throw IndexError("flip index " + std::to_string(j) + " out of range");
    fs.y[j] = 1;
  }
  return fs;
}

std::size_t FlipSet::flipped_count() const {
  std::size_t c = 0;
  for (std::uint8_t v : y) c += v;
  return c;
}

std::vector<std::size_t> FlipSet::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (y[j]) out.push_back(j);
  return out;
}

void FlipSet::validate_against(const ResponseVector& x) const {
  if (y.size() != x.size())
    throw ContractError("flip vector length does not match responses");
  for (std::size_t j = 0; j < y.size(); ++j)
    if (y[j] && !x.x[j])
      throw ContractError("flip of a 0-response at SNV " + std::to_string(j));
}

ResponseVector apply_flips(const ResponseVector& x, const FlipSet& y) {
  y.validate_against(x);
  ResponseVector out = x;
  for (std::size_t j = 0; j < out.x.size(); ++j)
    if (y.y[j]) out.x[j] = 0;
  return out;
}

LrtParams compute_params(const AafVector& aaf, std::size_t n, double delta) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (!(delta < 0.25)) throw ParameterError("delta out of range: requires delta < 0.25");
  if (n < 1) throw ParameterError("beacon size n must be >= 1");
  aaf.validate();

  const std::size_t m = aaf.size();
  LrtParams p;
  p.delta = delta;
  p.n = n;
  p.log_dn.resize(m);
  p.log_dn1.resize(m);
  p.a.resize(m);
  p.b.resize(m);
  p.gain.resize(m);

  const double log_delta = std::log(delta);
  for (std::size_t j = 0; j < m; ++j) {
    const double l1mf = std::log1p(-aaf.f[j]);
    p.log_dn[j] = 2.0 * static_cast<double>(n) * l1mf;
    p.log_dn1[j] = 2.0 * static_cast<double>(n - 1) * l1mf;
    // a = ln(1 - D_n) - ln(1 - delta D_{n-1}); both factors via expm1-style
    // primitives so rare alleles (D_n near 1) keep full precision.
    p.a[j] = log1mexp(p.log_dn[j]) - std::log1p(-delta * std::exp(p.log_dn1[j]));
    p.b[j] = p.log_dn[j] - log_delta - p.log_dn1[j];
    p.gain[j] = p.b[j] - p.a[j];
  }
  return p;
}

LrtParams make_constant_params(double a, double b, std::size_t m,
                               std::size_t n, double delta) {
  LrtParams p;
  p.delta = delta;
  p.n = n;
  p.a.assign(m, a);
  p.b.assign(m, b);
  p.gain.assign(m, b - a);
  // log_dn terms are only meaningful for true per-SNV AAFs.
  p.log_dn.assign(m, std::numeric_limits<double>::quiet_NaN());
  p.log_dn1.assign(m, std::numeric_limits<double>::quiet_NaN());
  return p;
}

double lrt_score(const LrtParams& params, const GenotypeMatrix& g,
                 std::size_t individual, const QuerySet& q,
                 const ResponseVector& x) {
  if (x.size() != params.n_snvs())
    throw ParameterError("response length does not match params");
  double score = 0.0;
  for (std::size_t j : q.members()) {
    if (j >= params.n_snvs())
      throw IndexError("query index " + std::to_string(j) + " out of range");
    if (!g.get(individual, j)) continue;
    score += x.x[j] ? params.a[j] : params.b[j];
  }
  return score;
}

double lrt_score_flipped(const LrtParams& params, const GenotypeMatrix& g,
                         std::size_t individual, const QuerySet& q,
                         const ResponseVector& x, const FlipSet& y) {
  y.validate_against(x);
  double score = 0.0;
  for (std::size_t j : q.members()) {
    if (j >= params.n_snvs())
      throw IndexError("query index " + std::to_string(j) + " out of range");
    if (!g.get(individual, j)) continue;
    if (x.x[j])
      score += y.y[j] ? params.gain[j] + params.a[j] : params.a[j];
    else
      score += params.b[j];
  }
  return score;
}

EtaDeltas eta_and_deltas(const LrtParams& params, const GenotypeMatrix& g,
                         std::span<const std::size_t> beacon, const QuerySet& q,
                         const ResponseVector& x) {
  EtaDeltas out;
  out.eta.resize(beacon.size(), 0.0);
  out.support.resize(beacon.size());
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    const std::size_t i = beacon[bi];
    for (std::size_t j : q.members()) {
      if (!g.get(i, j)) continue;
      if (x.x[j]) {
        out.eta[bi] += params.a[j];
        out.support[bi].push_back(j);
      } else {
        out.eta[bi] += params.b[j];
      }
    }
    std::sort(out.support[bi].begin(), out.support[bi].end());
  }
  return out;
}

DeltaBound theorem_delta_bound(const LrtParams& params, const GenotypeMatrix& g,
                               std::span<const std::size_t> beacon,
                               const QuerySet& q, const ResponseVector& x,
                               double theta) {
  double dn_term = std::numeric_limits<double>::infinity();
  bool any_q1 = false;
  for (std::size_t j : q.members()) {
    if (!x.x[j]) continue;
    any_q1 = true;
    // ln(D_n / (1 - D_n))
    dn_term = std::min(dn_term, params.log_dn[j] - log1mexp(params.log_dn[j]));
  }
  if (!any_q1)
    throw ParameterError("theorem_delta_bound requires a nonempty Q1");

  double eta_term = std::numeric_limits<double>::infinity();
  const double log4 = std::log(4.0);
  for (std::size_t i : beacon) {
    double acc = 0.0;
    for (std::size_t j : q.members()) {
      if (!g.get(i, j)) continue;
      if (x.x[j])
        acc += log1mexp(params.log_dn[j]);
      else
        acc += params.log_dn[j] - params.log_dn1[j] + log4;  // ln(Dn/(0.25 Dn-1))
    }
    eta_term = std::min(eta_term, acc);
  }

  DeltaBound out;
  out.dn_term = dn_term;
  out.eta_term = eta_term;
  out.bound = 1.0 / (1.0 + std::exp(theta - eta_term - dn_term));
  out.certified = params.delta <= out.bound;
  return out;
}

BetaExpectationParams beta_expectation_params(double beta_a, double beta_b,
                                              std::size_t n, double delta) {
  if (!(beta_a > 0.0) || !(beta_b > 0.0))
    throw ParameterError("Beta shape parameters must be positive");
  if (!(delta > 0.0 && delta < 0.25))
    throw ParameterError("delta out of range: requires 0 < delta < 0.25");
  if (n < 1) throw ParameterError("beacon size n must be >= 1");

  const auto log_dbar = [&](std::size_t k) {
    // ln E[(1-f)^k] = lnG(a+b) + lnG(b+k) - lnG(b) - lnG(a+b+k)
    return std::lgamma(beta_a + beta_b) + std::lgamma(beta_b + k) -
           std::lgamma(beta_b) - std::lgamma(beta_a + beta_b + k);
  };
  const double ldn = log_dbar(2 * n);
  const double ldn1 = log_dbar(2 * (n - 1));

  BetaExpectationParams out;
  out.a = log1mexp(ldn) - std::log1p(-delta * std::exp(ldn1));
  out.b = ldn - std::log(delta) - ldn1;
  return out;
}

}  // namespace beacon
