#include "beacon/threat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace beacon {

ThreatSpec ThreatSpec::adaptive(std::size_t k,
                                std::vector<std::size_t> reference) {
  if (k < 1) throw ParameterError("adaptive K must be >= 1");
  if (k > reference.size())
    throw ParameterError("adaptive K exceeds reference population size");
  ThreatSpec t;
  t.kind = Kind::adaptive;
  t.k = k;
  t.reference = std::move(reference);
  return t;
}

namespace {

// Indices of the k lowest scores; ties toward the lower position.
std::vector<std::size_t> bottom_k_by_score(const std::vector<double>& scores,
                                           std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

double adaptive_threshold(const LrtParams& params, const GenotypeMatrix& g,
                          std::span<const std::size_t> reference,
                          const QuerySet& q, const ResponseVector& x,
                          const FlipSet& y, std::size_t k) {
  if (k < 1 || k > reference.size())
    throw ParameterError("K must satisfy 1 <= K <= |reference|");
  std::vector<double> scores(reference.size());
  for (std::size_t r = 0; r < reference.size(); ++r)
    scores[r] = lrt_score_flipped(params, g, reference[r], q, x, y);
  const auto bottom = bottom_k_by_score(scores, k);
  double sum = 0.0;
  for (std::size_t r : bottom) sum += scores[r];
  return sum / static_cast<double>(k);
}

AdaptiveQuantities adaptive_quantities(const LrtParams& params,
                                       const GenotypeMatrix& g,
                                       std::span<const std::size_t> beacon,
                                       std::span<const std::size_t> reference,
                                       const QuerySet& q,
                                       const ResponseVector& x, std::size_t k) {
  if (k < 1 || k > reference.size())
    throw ParameterError("K must satisfy 1 <= K <= |reference|");

  const std::size_t m = params.n_snvs();
  std::vector<double> scores(reference.size());
  for (std::size_t r = 0; r < reference.size(); ++r)
    scores[r] = lrt_score(params, g, reference[r], q, x);
  const auto bottom_pos = bottom_k_by_score(scores, k);

  AdaptiveQuantities aq;
  aq.delta_k.assign(m, 0.0);
  aq.d_mean.assign(m, 0.0);
  aq.bottom_k.reserve(k);
  for (std::size_t pos : bottom_pos) aq.bottom_k.push_back(reference[pos]);

  for (std::size_t j : q.members())
    if (x.x[j]) aq.q1.push_back(j);
  std::sort(aq.q1.begin(), aq.q1.end());

  const double inv_k = 1.0 / static_cast<double>(k);
  double eta_sum = 0.0;
  for (std::size_t pos : bottom_pos) {
    const std::size_t ind = reference[pos];
    eta_sum += scores[pos];  // eta_k == unflipped score
    for (std::size_t j : aq.q1)
      if (g.get(ind, j)) {
        aq.delta_k[j] += params.gain[j] * inv_k;
        aq.d_mean[j] += inv_k;
      }
  }
  // d_mean is also needed on Q0 for the unauthenticated worst case.
  for (std::size_t j : q.members()) {
    if (x.x[j]) continue;
    for (std::size_t ind : aq.bottom_k)
      if (g.get(ind, j)) aq.d_mean[j] += inv_k;
  }
  aq.eta_k = eta_sum * inv_k;

  // Cross-check: with bottom-K held fixed and y flipping all of Q1, the
  // rewritten condition value must equal L_i - theta(Q) exactly (up to
  // roundoff).
  const FlipSet y_all = FlipSet::from_indices(m, aq.q1);
  const double theta_all = [&] {
    double sum = 0.0;
    for (std::size_t ind : aq.bottom_k)
      sum += lrt_score_flipped(params, g, ind, q, x, y_all);
    return sum * inv_k;
  }();
  const auto ed = eta_and_deltas(params, g, beacon, q, x);
  for (std::size_t bi = 0; bi < beacon.size(); ++bi) {
    double lhs = ed.eta[bi] - aq.eta_k;
    for (std::size_t j : aq.q1) lhs += aq.delta_ik(params, g, beacon[bi], j);
    const double rhs =
        lrt_score_flipped(params, g, beacon[bi], q, x, y_all) - theta_all;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (std::abs(lhs - rhs) > 1e-9 * scale)
      throw ContractError("adaptive condition does not match L_i - theta(Q)");
  }
  return aq;
}

std::vector<std::size_t> eligible_flips(const AdaptiveQuantities& aq,
                                        const LrtParams& params,
                                        const GenotypeMatrix& g,
                                        std::span<const std::size_t> beacon) {
  std::vector<std::size_t> out;
  for (std::size_t j : aq.q1) {
    bool ok = true;
    for (std::size_t i : beacon) {
      if (aq.delta_ik(params, g, i, j) < 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(j);
  }
  return out;
}

}  // namespace beacon
