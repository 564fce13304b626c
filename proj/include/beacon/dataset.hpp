#ifndef BEACON_DATASET_HPP
#define BEACON_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beacon/common.hpp"

namespace beacon {

// Binary genotype matrix: d_ij = 1 iff individual i carries the minor allele
// at SNV j. Rows are packed 64 SNVs per word so per-individual scans touch
// m/64 words. Immutable once built; safe to share across threads.
class GenotypeMatrix {
 public:
  GenotypeMatrix() = default;
  GenotypeMatrix(std::size_t n_individuals, std::size_t n_snvs);

  static GenotypeMatrix from_rows(const std::vector<std::vector<std::uint8_t>>& rows,
                                  std::vector<std::string> ids = {});

  std::size_t n_individuals() const { return n_individuals_; }
  std::size_t n_snvs() const { return n_snvs_; }

  bool get(std::size_t individual, std::size_t snv) const {
    check_index(individual, snv);
    const std::uint64_t word = words_[individual * stride_ + snv / 64];
    return (word >> (snv % 64)) & 1u;
  }

  void set(std::size_t individual, std::size_t snv, bool value);

  std::span<const std::uint64_t> row_words(std::size_t individual) const;

  const std::string& id(std::size_t individual) const;
  void set_id(std::size_t individual, std::string id);

 private:
  void check_index(std::size_t individual, std::size_t snv) const;

  std::size_t n_individuals_ = 0;
  std::size_t n_snvs_ = 0;
  std::size_t stride_ = 0;  // words per row
  std::vector<std::uint64_t> words_;
  std::vector<std::string> ids_;
};

// Per-SNV alternate (minor) allele frequency, each in the open interval
// (0, 0.5).
struct AafVector {
  std::vector<double> f;

  std::size_t size() const { return f.size(); }
  // Throws ParameterError if any entry leaves (0, 0.5).
  void validate() const;
};

// Per-SNV binary Beacon response.
struct ResponseVector {
  std::vector<std::uint8_t> x;

  std::size_t size() const { return x.size(); }
};

// Disjoint index sets: who is in the Beacon and who forms the attacker's
// reference population.
struct PopulationSplit {
  std::vector<std::size_t> beacon;
  std::vector<std::size_t> reference;

  // Throws ParameterError on overlap.
  void validate(std::size_t n_individuals) const;
};

struct SyntheticData {
  GenotypeMatrix genotypes;
  AafVector aaf;
  PopulationSplit split;
};

// Lower bound applied when rejection-sampling AAFs; f = 0 would push
// A_j to -infinity.
inline constexpr double kMinAaf = 1e-6;

// Draws f_j ~ Beta(beta_a, beta_b) restricted to (1e-6, 0.5) and genotypes
// d_ij ~ Bernoulli(1 - (1 - f_j)^2), the probability that a diploid
// individual carries at least one minor allele. Beacon rows come first,
// reference rows after. Bit-identical for identical seeds.
SyntheticData generate_synthetic(std::size_t n_beacon, std::size_t n_reference,
                                 std::size_t m, double beta_a, double beta_b,
                                 std::uint64_t seed);

// x_j = OR over i in beacon of d_ij.
ResponseVector true_responses(const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon);

// Line-oriented text format:
//   beacon-matrix v1 n=<int> m=<int>
//   aaf <m space-separated decimals>
//   <id> <m contiguous 0/1 chars>        (n such lines)
void save_matrix(const GenotypeMatrix& g, const AafVector& aaf,
                 const std::filesystem::path& path);
std::pair<GenotypeMatrix, AafVector> load_matrix(const std::filesystem::path& path);

}  // namespace beacon

#endif  // BEACON_DATASET_HPP
