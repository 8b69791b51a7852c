#include "qerase/info.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace qerase {

double Distribution::prob_of(std::uint64_t label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return probs[i];
  }
  return 0.0;
}

void validate_distribution(const Distribution& d, double tol) {
  if (d.labels.size() != d.probs.size()) {
    throw ValidationError("distribution labels/probs size mismatch");
  }
  CompensatedSum total;
  for (double p : d.probs) {
    if (p < 0.0) {
      throw ValidationError("negative probability " + std::to_string(p));
    }
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > tol) {
    throw ValidationError("distribution mass " + std::to_string(total.value()) +
                          " deviates from 1 beyond tolerance");
  }
}

double shannon_entropy(std::span<const double> probs) {
  CompensatedSum h;
  for (double p : probs) {
    if (p < 0.0) {
      throw ValidationError("negative probability " + std::to_string(p) +
                            " in entropy argument");
    }
    if (p > 0.0) h.add(-p * std::log2(p));
  }
  return h.value();
}

double shannon_entropy(const Distribution& d) {
  return shannon_entropy(std::span<const double>(d.probs));
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

JointDistribution::JointDistribution(std::vector<std::string> variables,
                                     std::vector<std::size_t> cardinalities)
    : vars_(std::move(variables)), card_(std::move(cardinalities)) {
  if (vars_.empty() || vars_.size() != card_.size()) {
    throw SchemaError("joint distribution needs matching variable/cardinality lists");
  }
  std::set<std::string> seen(vars_.begin(), vars_.end());
  if (seen.size() != vars_.size()) {
    throw SchemaError("duplicate variable name in joint distribution");
  }
  strides_.resize(card_.size());
  std::uint64_t stride = 1;
  for (std::size_t i = 0; i < card_.size(); ++i) {
    if (card_[i] == 0) throw SchemaError("zero cardinality variable");
    strides_[i] = stride;
    stride *= card_[i];
  }
}

void JointDistribution::add_mass(std::span<const std::size_t> assignment,
                                 double p) {
  if (assignment.size() != card_.size()) {
    throw SchemaError("assignment arity mismatch");
  }
  if (p < 0.0) throw ValidationError("negative probability mass");
  if (p == 0.0) return;
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= card_[i]) {
      throw SchemaError("assignment out of range for variable " + vars_[i]);
    }
    key += assignment[i] * strides_[i];
  }
  cells_[key] += p;
}

double JointDistribution::total_mass() const {
  CompensatedSum total;
  // Sorted order keeps the sum independent of hash-map iteration.
  std::vector<std::uint64_t> keys;
  keys.reserve(cells_.size());
  for (const auto& kv : cells_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t k : keys) total.add(cells_.at(k));
  return total.value();
}

void JointDistribution::validate(double tol) const {
  for (const auto& kv : cells_) {
    if (kv.second < 0.0) throw ValidationError("negative joint probability");
  }
  if (std::abs(total_mass() - 1.0) > tol) {
    throw ValidationError("joint mass deviates from 1 beyond tolerance");
  }
}

std::vector<std::size_t> JointDistribution::indices_of(
    std::span<const std::string> vars) const {
  std::vector<std::size_t> idx;
  idx.reserve(vars.size());
  for (const auto& name : vars) {
    const auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) {
      throw SchemaError("unknown variable '" + name + "' in joint query");
    }
    const auto i = static_cast<std::size_t>(it - vars_.begin());
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  return idx;
}

std::vector<double> JointDistribution::marginal(
    const std::vector<std::size_t>& var_idx) const {
  std::uint64_t size = 1;
  for (std::size_t i : var_idx) size *= card_[i];
  if (size > (std::uint64_t{1} << 26)) {
    throw SizeError("marginal table too large to materialize");
  }
  std::vector<double> table(size, 0.0);
  for (const auto& [key, p] : cells_) {
    std::uint64_t out = 0;
    std::uint64_t stride = 1;
    for (std::size_t i : var_idx) {
      const std::uint64_t value = (key / strides_[i]) % card_[i];
      out += value * stride;
      stride *= card_[i];
    }
    table[out] += p;
  }
  return table;
}

double JointDistribution::entropy(std::span<const std::string> vars) const {
  const auto table = marginal(indices_of(vars));
  return shannon_entropy(std::span<const double>(table));
}

double conditional_entropy(const JointDistribution& j,
                           std::span<const std::string> target,
                           std::span<const std::string> given) {
  auto both = j.indices_of(target);
  for (std::size_t i : j.indices_of(given)) {
    if (std::find(both.begin(), both.end(), i) == both.end()) both.push_back(i);
  }
  const double h_both = shannon_entropy(std::span<const double>(j.marginal(both)));
  if (given.empty()) return h_both;
  const double h_given =
      shannon_entropy(std::span<const double>(j.marginal(j.indices_of(given))));
  return h_both - h_given;
}

double mutual_information(const JointDistribution& j,
                          std::span<const std::string> a,
                          std::span<const std::string> b) {
  std::vector<std::string> joined(a.begin(), a.end());
  for (const auto& name : b) {
    if (std::find(joined.begin(), joined.end(), name) == joined.end()) {
      joined.push_back(name);
    }
  }
  return j.entropy(a) + j.entropy(b) -
         j.entropy(std::span<const std::string>(joined));
}

double landauer_heat_bound(double erased_bits, double temperature_kelvin) {
  if (erased_bits < 0.0) {
    throw ValidationError("erased bits must be non-negative");
  }
  if (temperature_kelvin < 0.0) {
    throw ValidationError("temperature must be non-negative");
  }
  return erased_bits * kBoltzmann * temperature_kelvin * std::numbers::ln2;
}

ErasureReport make_erasure_report(int n, double erased_bits,
                                  double temperature_kelvin) {
  ErasureReport r;
  r.n = n;
  r.erased_bits = erased_bits;
  r.temperature_kelvin = temperature_kelvin;
  r.heat_bound_joules = landauer_heat_bound(erased_bits, temperature_kelvin);
  r.third_law_caveat = temperature_kelvin == 0.0;
  return r;
}

}  // namespace qerase
