#include "beacon/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "beacon/rng.hpp"

namespace beacon {

namespace {

AttackReport build_report(std::vector<double> scores,
                          std::span<const std::uint8_t> membership,
                          double theta, std::size_t flips_used) {
  AttackReport r;
  r.scores = std::move(scores);
  r.threshold_used = theta;
  r.flips_used = flips_used;
  r.claims.resize(r.scores.size());
  std::size_t members = 0, nonmembers = 0, claimed_members = 0,
              claimed_nonmembers = 0;
  for (std::size_t t = 0; t < r.scores.size(); ++t) {
    const bool claim = r.scores[t] < theta;
    r.claims[t] = claim;
    if (membership[t]) {
      ++members;
      claimed_members += claim;
    } else {
      ++nonmembers;
      claimed_nonmembers += claim;
    }
  }
  r.tpr = members == 0 ? 0.0
                       : static_cast<double>(claimed_members) /
                             static_cast<double>(members);
  r.fpr = nonmembers == 0 ? 0.0
                          : static_cast<double>(claimed_nonmembers) /
                                static_cast<double>(nonmembers);
  r.privacy_fraction = 1.0 - r.tpr;
  return r;
}

}  // namespace

AttackReport run_fixed_attack(const LrtParams& params, const GenotypeMatrix& g,
                              std::span<const std::size_t> targets,
                              std::span<const std::uint8_t> membership,
                              const QuerySet& q, const ResponseVector& x_served,
                              double theta, std::size_t flips_used) {
  if (membership.size() != targets.size())
    throw ParameterError("membership length does not match targets");
  std::vector<double> scores(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    scores[t] = lrt_score(params, g, targets[t], q, x_served);
  return build_report(std::move(scores), membership, theta, flips_used);
}

AttackReport run_adaptive_attack(const LrtParams& params,
                                 const GenotypeMatrix& g,
                                 std::span<const std::size_t> targets,
                                 std::span<const std::uint8_t> membership,
                                 std::span<const std::size_t> reference,
                                 const QuerySet& q,
                                 const ResponseVector& x_served, std::size_t k,
                                 std::size_t flips_used) {
  if (membership.size() != targets.size())
    throw ParameterError("membership length does not match targets");
  if (k < 1 || k > reference.size())
    throw ParameterError("K must satisfy 1 <= K <= |reference|");

  // The attacker sees only served responses; scoring them with lrt_score is
  // exactly the post-flip statistic.
  std::vector<double> ref_scores(reference.size());
  for (std::size_t r = 0; r < reference.size(); ++r)
    ref_scores[r] = lrt_score(params, g, reference[r], q, x_served);
  std::vector<std::size_t> order(reference.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ref_scores[a] < ref_scores[b];
  });
  double sum = 0.0;
  for (std::size_t r = 0; r < k; ++r) sum += ref_scores[order[r]];
  const double theta = sum / static_cast<double>(k);

  std::vector<double> scores(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    scores[t] = lrt_score(params, g, targets[t], q, x_served);
  return build_report(std::move(scores), membership, theta, flips_used);
}

std::pair<double, double> clustering_attack(std::span<const double> scores,
                                            std::span<const std::uint8_t> membership,
                                            std::size_t runs, std::uint64_t seed) {
  if (membership.size() != scores.size())
    throw ParameterError("membership length does not match scores");
  if (runs < 1) throw ParameterError("runs must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  if (scores.size() < 2 || *lo_it == *hi_it)
    throw DegenerateError("clustering requires at least 2 distinct scores");
  const double lo = *lo_it, hi = *hi_it;

  const auto lloyd = [&](double c0, double c1) {
    if (c0 > c1) std::swap(c0, c1);
    std::vector<std::uint8_t> assign(scores.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        // Equidistant points go to the lower cluster.
        const std::uint8_t a =
            std::abs(scores[i] - c1) < std::abs(scores[i] - c0) ? 1 : 0;
        if (a != assign[i]) {
          assign[i] = a;
          changed = true;
        }
      }
      double sum0 = 0.0, sum1 = 0.0;
      std::size_t n0 = 0, n1 = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        if (assign[i]) {
          sum1 += scores[i];
          ++n1;
        } else {
          sum0 += scores[i];
          ++n0;
        }
      }
      if (n0) c0 = sum0 / static_cast<double>(n0);
      if (n1) c1 = sum1 / static_cast<double>(n1);
      if (!changed) break;
    }
    // Lower-mean cluster = claimed beacon members.
    const std::uint8_t claimed_cluster = c0 <= c1 ? 0 : 1;
    std::size_t members = 0, nonmembers = 0, cm = 0, cn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool claim = assign[i] == claimed_cluster;
      if (membership[i]) {
        ++members;
        cm += claim;
      } else {
        ++nonmembers;
        cn += claim;
      }
    }
    const double tpr =
        members ? static_cast<double>(cm) / static_cast<double>(members) : 0.0;
    const double fpr = nonmembers ? static_cast<double>(cn) /
                                        static_cast<double>(nonmembers)
                                  : 0.0;
    return std::pair<double, double>{tpr, fpr};
  };

  double tpr_sum = 0.0, fpr_sum = 0.0;
  Rng rng(seed);
  for (std::size_t run = 0; run < runs; ++run) {
    double c0, c1;
    if (run == 0) {
      c0 = lo;
      c1 = hi;
    } else {
      do {
        c0 = lo + (hi - lo) * rng.uniform();
        c1 = lo + (hi - lo) * rng.uniform();
      } while (c0 == c1);
    }
    const auto [tpr, fpr] = lloyd(c0, c1);
    tpr_sum += tpr;
    fpr_sum += fpr;
  }
  return {tpr_sum / static_cast<double>(runs), fpr_sum / static_cast<double>(runs)};
}

RocCurve roc_curve(std::span<const double> scores,
                   std::span<const std::uint8_t> membership) {
  if (scores.empty()) throw ParameterError("roc_curve requires scores");
  if (membership.size() != scores.size())
    throw ParameterError("membership length does not match scores");

  std::set<double> distinct(scores.begin(), scores.end());
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::size_t members = 0, nonmembers = 0;
  for (std::uint8_t mm : membership) (mm ? members : nonmembers) += 1;

  RocCurve roc;
  for (double th : thresholds) {
    std::size_t cm = 0, cn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] < th) (membership[i] ? cm : cn) += 1;
    }
    const double tpr =
        members ? static_cast<double>(cm) / static_cast<double>(members) : 0.0;
    const double fpr = nonmembers ? static_cast<double>(cn) /
                                        static_cast<double>(nonmembers)
                                  : 0.0;
    roc.points.emplace_back(fpr, tpr);
  }
  for (std::size_t p = 1; p < roc.points.size(); ++p) {
    const auto& [f0, t0] = roc.points[p - 1];
    const auto& [f1, t1] = roc.points[p];
    roc.auc += (f1 - f0) * 0.5 * (t0 + t1);
  }
  return roc;
}

std::string attack_report_json(const AttackReport& report) {
  char buf[64];
  std::string out = "{";
  const auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "\"%s\":%.17g,", key, v);
    out += buf;
  };
  num("tpr", report.tpr);
  num("fpr", report.fpr);
  num("privacy_fraction", report.privacy_fraction);
  num("threshold_used", report.threshold_used);
  std::snprintf(buf, sizeof buf, "\"flips_used\":%zu,", report.flips_used);
  out += buf;
  std::snprintf(buf, sizeof buf, "\"targets\":%zu,", report.scores.size());
  out += buf;
  std::size_t claimed = 0;
  for (std::uint8_t c : report.claims) claimed += c;
  std::snprintf(buf, sizeof buf, "\"claims\":%zu}", claimed);
  out += buf;
  return out;
}

void write_roc_csv(const RocCurve& roc, std::ostream& out) {
  out << "fpr,tpr\n";
  char buf[80];
  for (const auto& [fpr, tpr] : roc.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", fpr, tpr);
    out << buf;
  }
}

}  // namespace beacon
