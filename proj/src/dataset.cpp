#include "beacon/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "beacon/rng.hpp"

namespace beacon {

GenotypeMatrix::GenotypeMatrix(std::size_t n_individuals, std::size_t n_snvs)
    : n_individuals_(n_individuals),
      n_snvs_(n_snvs),
      stride_((n_snvs + 63) / 64),
      words_(n_individuals * stride_, 0),
      ids_(n_individuals) {
  for (std::size_t i = 0; i < n_individuals_; ++i)
    ids_[i] = "ind" + std::to_string(i);
}

GenotypeMatrix GenotypeMatrix::from_rows(
    const std::vector<std::vector<std::uint8_t>>& rows,
    std::vector<std::string> ids) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows[0].size();
  GenotypeMatrix g(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != m)
      throw ParameterError("genotype rows have inconsistent lengths");
    for (std::size_t j = 0; j < m; ++j) {
      if (rows[i][j] > 1)
        throw ParameterError("genotype entries must be 0 or 1");
      g.set(i, j, rows[i][j] != 0);
    }
  }
  if (!ids.empty()) {
    if (ids.size() != n) throw ParameterError("id count does not match rows");
    g.ids_ = std::move(ids);
  }
  return g;
}

void GenotypeMatrix::set(std::size_t individual, std::size_t snv, bool value) {
  check_index(individual, snv);
  std::uint64_t& word = words_[individual * stride_ + snv / 64];
  const std::uint64_t bit = std::uint64_t{1} << (snv % 64);
  if (value)
    word |= bit;
  else
    word &= ~bit;
}

std::span<const std::uint64_t> GenotypeMatrix::row_words(
    std::size_t individual) const {
  if (individual >= n_individuals_)
    throw IndexError("individual index " + std::to_string(individual) +
                     " out of range");
  return {words_.data() + individual * stride_, stride_};
}

const std::string& GenotypeMatrix::id(std::size_t individual) const {
  if (individual >= n_individuals_)
    throw IndexError("individual index " + std::to_string(individual) +
                     " out of range");
  return ids_[individual];
}

void GenotypeMatrix::set_id(std::size_t individual, std::string id) {
  if (individual >= n_individuals_)
    throw IndexError("individual index " + std::to_string(individual) +
                     " out of range");
  ids_[individual] = std::move(id);
}

void GenotypeMatrix::check_index(std::size_t individual, std::size_t snv) const {
  if (individual >= n_individuals_)
    throw IndexError("individual index " + std::to_string(individual) +
                     " out of range");
  if (snv >= n_snvs_)
    throw IndexError("SNV index " + std::to_string(snv) + " out of range");
}

void AafVector::validate() const {
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (!(f[j] > 0.0 && f[j] < 0.5))
      throw ParameterError("AAF out of (0,0.5) at SNV " + std::to_string(j));
  }
}

void PopulationSplit::validate(std::size_t n_individuals) const {
  std::unordered_set<std::size_t> seen;
  for (std::size_t i : beacon) {
    if (i >= n_individuals) throw IndexError("beacon index out of range");
    seen.insert(i);
  }
  for (std::size_t i : reference) {
    if (i >= n_individuals) throw IndexError("reference index out of range");
    if (seen.count(i))
      throw ParameterError("beacon and reference overlap at individual " +
                           std::to_string(i));
  }
}

SyntheticData generate_synthetic(std::size_t n_beacon, std::size_t n_reference,
                                 std::size_t m, double beta_a, double beta_b,
                                 std::uint64_t seed) {
  if (n_beacon < 1) throw ParameterError("n_beacon must be >= 1");
  if (m < 1) throw ParameterError("m must be >= 1");
  if (!(beta_a > 0.0) || !(beta_b > 0.0))
    throw ParameterError("Beta shape parameters must be positive");

  Rng rng(seed);
  const std::size_t n = n_beacon + n_reference;

  SyntheticData out;
  out.aaf.f.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    double f;
    do {
      f = rng.beta(beta_a, beta_b);
    } while (!(f > kMinAaf && f < 0.5));
    out.aaf.f[j] = f;
  }

  out.genotypes = GenotypeMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double carrier = 1.0 - (1.0 - out.aaf.f[j]) * (1.0 - out.aaf.f[j]);
      if (rng.bernoulli(carrier)) out.genotypes.set(i, j, true);
    }
  }

  out.split.beacon.resize(n_beacon);
  for (std::size_t i = 0; i < n_beacon; ++i) out.split.beacon[i] = i;
  out.split.reference.resize(n_reference);
  for (std::size_t i = 0; i < n_reference; ++i)
    out.split.reference[i] = n_beacon + i;
  return out;
}

ResponseVector true_responses(const GenotypeMatrix& g,
                              std::span<const std::size_t> beacon) {
  const std::size_t m = g.n_snvs();
  std::vector<std::uint64_t> acc((m + 63) / 64, 0);
  for (std::size_t i : beacon) {
    const auto row = g.row_words(i);
    for (std::size_t w = 0; w < row.size(); ++w) acc[w] |= row[w];
  }
  ResponseVector x;
  x.x.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    x.x[j] = static_cast<std::uint8_t>((acc[j / 64] >> (j % 64)) & 1u);
  return x;
}

void save_matrix(const GenotypeMatrix& g, const AafVector& aaf,
                 const std::filesystem::path& path) {
  if (aaf.size() != g.n_snvs())
    throw ParameterError("AAF length does not match matrix width");
  aaf.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "beacon-matrix v1 n=" << g.n_individuals() << " m=" << g.n_snvs()
      << "\n";
  out << "aaf";
  char buf[32];
  for (double f : aaf.f) {
    std::snprintf(buf, sizeof buf, " %.17g", f);
    out << buf;
  }
  out << "\n";
  for (std::size_t i = 0; i < g.n_individuals(); ++i) {
    out << g.id(i) << ' ';
    for (std::size_t j = 0; j < g.n_snvs(); ++j) out << (g.get(i, j) ? '1' : '0');
    out << "\n";
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

namespace {

[[noreturn]] void format_fail(const std::filesystem::path& path,
                              std::size_t line, const std::string& what) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::pair<GenotypeMatrix, AafVector> load_matrix(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());

  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) format_fail(path, lineno, "missing header");
  std::size_t n = 0, m = 0;
  {
    std::istringstream hs(line);
    std::string magic, version, nf, mf;
    hs >> magic >> version >> nf >> mf;
    if (magic != "beacon-matrix" || version != "v1")
      format_fail(path, lineno, "bad magic; expected 'beacon-matrix v1'");
    if (nf.rfind("n=", 0) != 0 || mf.rfind("m=", 0) != 0)
      format_fail(path, lineno, "header fields must be n=<int> m=<int>");
    try {
      n = std::stoull(nf.substr(2));
      m = std::stoull(mf.substr(2));
    } catch (const std::exception&) {
      format_fail(path, lineno, "unparseable n/m header field");
    }
  }

  ++lineno;
  if (!std::getline(in, line))
    throw FormatError(path.string() + ": truncated at byte offset " +
                      std::to_string(in.gcount()) + " (missing aaf line)");
  AafVector aaf;
  {
    std::istringstream as(line);
    std::string tag;
    as >> tag;
    if (tag != "aaf") format_fail(path, lineno, "expected 'aaf' line");
    aaf.f.reserve(m);
    double v;
    while (as >> v) aaf.f.push_back(v);
    if (aaf.f.size() != m)
      format_fail(path, lineno,
                  "aaf field count " + std::to_string(aaf.f.size()) +
                      " does not match m=" + std::to_string(m));
    for (std::size_t j = 0; j < m; ++j)
      if (!(aaf.f[j] > 0.0 && aaf.f[j] < 0.5))
        format_fail(path, lineno,
                    "AAF out of (0,0.5) at field " + std::to_string(j + 1));
  }

  GenotypeMatrix g(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    ++lineno;
    const auto offset_before = in.tellg();
    if (!std::getline(in, line))
      throw FormatError(path.string() + ": truncated at byte offset " +
                        std::to_string(static_cast<long long>(offset_before)) +
                        " (expected " + std::to_string(n) + " genotype rows, got " +
                        std::to_string(i) + ")");
    std::istringstream rs(line);
    std::string id, bits;
    rs >> id >> bits;
    if (id.empty() || bits.empty())
      format_fail(path, lineno, "expected '<id> <bits>' row");
    if (bits.size() != m)
      format_fail(path, lineno,
                  "row has " + std::to_string(bits.size()) +
                      " genotype chars, expected m=" + std::to_string(m));
    g.set_id(i, id);
    for (std::size_t j = 0; j < m; ++j) {
      if (bits[j] == '1')
        g.set(i, j, true);
      else if (bits[j] != '0')
        format_fail(path, lineno,
                    std::string("genotype char '") + bits[j] +
                        "' is not 0/1 at column " + std::to_string(j + 1));
    }
  }
  return {std::move(g), std::move(aaf)};
}

}  // namespace beacon
