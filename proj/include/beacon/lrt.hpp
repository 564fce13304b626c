#ifndef BEACON_LRT_HPP
#define BEACON_LRT_HPP

#include <span>
#include <vector>

#include "beacon/dataset.hpp"

namespace beacon {

// Per-SNV LRT decomposition, natural-log domain throughout. D terms are kept
// as logs because (1-f)^(2n) underflows double precision for realistic n
// (n=400, f=0.3 gives ~1e-124).
//
//   log_dn[j]  = ln D_n^j   = 2n ln(1-f_j)
//   log_dn1[j] = ln D_{n-1}^j
//   a[j] = ln((1 - D_n^j) / (1 - delta D_{n-1}^j))   (< 0 when delta < (1-f)^2)
//   b[j] = ln(D_n^j / (delta D_{n-1}^j))             (> 0)
//   gain[j] = b[j] - a[j]                            (score gain of a 1->0 flip)
struct LrtParams {
  double delta = 0.0;
  std::size_t n = 0;
  std::vector<double> log_dn;
  std::vector<double> log_dn1;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> gain;

  std::size_t n_snvs() const { return a.size(); }
};

// Ordered, duplicate-free set of SNV indices.
class QuerySet {
 public:
  QuerySet() = default;
  // Throws ParameterError on duplicates.
  explicit QuerySet(std::vector<std::size_t> members);

  static QuerySet all(std::size_t m);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  std::vector<std::size_t> members_;
};

// Per-SNV flip indicator. Flips are 1->0 only; enforced wherever a FlipSet
// meets a ResponseVector.
struct FlipSet {
  std::vector<std::uint8_t> y;

  static FlipSet none(std::size_t m) { return FlipSet{std::vector<std::uint8_t>(m, 0)}; }
  static FlipSet from_indices(std::size_t m, std::span<const std::size_t> flipped);

  std::size_t flipped_count() const;
  std::vector<std::size_t> indices() const;
  bool flips(std::size_t j) const { return j < y.size() && y[j] != 0; }

  // Throws ContractError if any y_j = 1 lands on x_j = 0.
  void validate_against(const ResponseVector& x) const;
};

// Applies y to x (1->0 only).
ResponseVector apply_flips(const ResponseVector& x, const FlipSet& y);

// Builds LrtParams from AAFs. Requires 0 < delta < 0.25; with f < 0.5 that
// implies delta < (1-f)^2, which keeps every a[j] negative and b[j] positive.
LrtParams compute_params(const AafVector& aaf, std::size_t n, double delta);

// Constant-per-SNV params used for the Beta-expectation model; every column
// shares the same A and B.
LrtParams make_constant_params(double a, double b, std::size_t m,
                               std::size_t n, double delta);

// Eq. (1): L_i = sum_{j in Q} d_ij (x_j a_j + (1-x_j) b_j).
double lrt_score(const LrtParams& params, const GenotypeMatrix& g,
                 std::size_t individual, const QuerySet& q,
                 const ResponseVector& x);

// Decomposed form: sum_{j in Q1} gain_j d_ij y_j + eta_i(Q). Identical to
// lrt_score on the post-flip responses.
double lrt_score_flipped(const LrtParams& params, const GenotypeMatrix& g,
                         std::size_t individual, const QuerySet& q,
                         const ResponseVector& x, const FlipSet& y);

// eta_i(Q) plus the flip-relevant support P_i = {j in Q1 | d_ij = 1}.
struct EtaDeltas {
  std::vector<double> eta;                        // per beacon individual
  std::vector<std::vector<std::size_t>> support;  // P_i, ascending
};

EtaDeltas eta_and_deltas(const LrtParams& params, const GenotypeMatrix& g,
                         std::span<const std::size_t> beacon, const QuerySet& q,
                         const ResponseVector& x);

// Sufficient-delta bound: privacy of every member follows from any
// Beacon-Cover whenever delta <= bound.
struct DeltaBound {
  double bound = 0.0;
  bool certified = false;
  double dn_term = 0.0;   // min_{j in Q1} ln(D_n^j / (1 - D_n^j))
  double eta_term = 0.0;  // the delta-free eta lower bound, minimized over i
};

DeltaBound theorem_delta_bound(const LrtParams& params, const GenotypeMatrix& g,
                               std::span<const std::size_t> beacon,
                               const QuerySet& q, const ResponseVector& x,
                               double theta);

// A and B with D_n, D_{n-1} replaced by their expectations under
// f ~ Beta(beta_a, beta_b):  E[(1-f)^k] = B(a, b+k) / B(a, b).
struct BetaExpectationParams {
  double a = 0.0;
  double b = 0.0;
  double gain() const { return b - a; }
};

BetaExpectationParams beta_expectation_params(double beta_a, double beta_b,
                                              std::size_t n, double delta);

}  // namespace beacon

#endif  // BEACON_LRT_HPP
