// info.hpp -- finite-distribution information measures.
//
// All entropies are in bits; 0 log2 0 terms are dropped, never floored.
// Sums are accumulated with compensated (Neumaier) summation.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qerase/errors.hpp"

namespace qerase {

// Exact SI (2019) value, joules per kelvin.
inline constexpr double kBoltzmann = 1.380649e-23;

inline constexpr double kProbabilityTol = 1e-12;

// Neumaier variant of Kahan summation: tracks a running compensation so
// that re-summing the same terms in any order agrees to ~1e-13.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Finite probability distribution over labelled points. Labels identify
// domain elements (state indices, cluster ids); probs is aligned with them.
struct Distribution {
  std::vector<std::uint64_t> labels;
  std::vector<double> probs;

  double prob_of(std::uint64_t label) const;  // 0 when absent
};

// Validates non-negativity and unit mass (within tol).
void validate_distribution(const Distribution& d, double tol = kProbabilityTol);

// -sum p log2 p over nonzero entries. Throws ValidationError on negative
// probabilities; does not require normalization (callers validate).
double shannon_entropy(std::span<const double> probs);
double shannon_entropy(const Distribution& d);

// Binary entropy h(p) = -p log2 p - (1-p) log2 (1-p).
double binary_entropy(double p);

// Joint probability table over a small set of named variables. Cells are
// stored sparsely; marginals are materialized densely for entropy sums so
// that summation order is deterministic.
class JointDistribution {
 public:
  JointDistribution(std::vector<std::string> variables,
                    std::vector<std::size_t> cardinalities);

  // Accumulates mass onto one cell; assignment[i] indexes variables()[i].
  void add_mass(std::span<const std::size_t> assignment, double p);

  void validate(double tol = kProbabilityTol) const;  // total mass 1, p >= 0

  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<std::size_t>& cardinalities() const { return card_; }
  double total_mass() const;
  std::size_t num_cells() const { return cells_.size(); }

  // Marginal entropy H(vars), bits. Unknown names throw SchemaError.
  double entropy(std::span<const std::string> vars) const;

 private:
  friend double conditional_entropy(const JointDistribution&,
                                    std::span<const std::string>,
                                    std::span<const std::string>);

  std::vector<std::size_t> indices_of(std::span<const std::string> vars) const;
  std::vector<double> marginal(const std::vector<std::size_t>& var_idx) const;

  std::vector<std::string> vars_;
  std::vector<std::size_t> card_;
  std::vector<std::uint64_t> strides_;
  std::unordered_map<std::uint64_t, double> cells_;
};

// H(target | given) = H(target u given) - H(given).
double conditional_entropy(const JointDistribution& j,
                           std::span<const std::string> target,
                           std::span<const std::string> given);

// I(a : b) = H(a) + H(b) - H(a u b).
double mutual_information(const JointDistribution& j,
                          std::span<const std::string> a,
                          std::span<const std::string> b);

// Minimum dissipated heat in joules for erasing `erased_bits` bits at
// temperature T: bits * k_B * T * ln 2.
double landauer_heat_bound(double erased_bits, double temperature_kelvin);

struct ErasureReport {
  int n = 0;
  double erased_bits = 0.0;
  // Set when the report was produced by the dual-route CLI path.
  bool has_decomposed = false;
  double erased_bits_decomposed = 0.0;
  double temperature_kelvin = 0.0;
  double heat_bound_joules = 0.0;
  // T = 0 makes the bound vacuous; the third law forbids reaching it.
  bool third_law_caveat = false;
};

ErasureReport make_erasure_report(int n, double erased_bits,
                                  double temperature_kelvin);

}  // namespace qerase
