// transducer.hpp -- exact predictive machine of a measurement family, plus
// generic machinery for machines supplied from outside (deserialized or
// inferred): stationary distribution, statistical complexity, predecessor
// distributions, output-determinism checks, serialization.
//
// Causal states of the family machine are in one-to-one correspondence with
// the family's pure states, so state ids equal state indices. Kernel rows
// hold only nonzero-probability successors; for levels past
// kAnalyticLevelThreshold rows are generated on demand from the closed-form
// cos^2 weights instead of being materialized.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qerase/info.hpp"
#include "qerase/qubit.hpp"

namespace qerase {

// Levels above this are served by the analytic lazy kernel.
inline constexpr int kAnalyticLevelThreshold = 6;

// Row enumeration / power iteration refuse machines with more than this
// many (state, input) pairs.
inline constexpr std::uint64_t kMaxEnumerableRows = std::uint64_t{1} << 26;

struct KernelEntry {
  std::uint64_t to = 0;
  Outcome y = Outcome::plus;
  double prob = 0.0;
};

using KernelRow = std::vector<KernelEntry>;

class Transducer {
 public:
  // Exact machine of the family: 2^(n+1) states, 2^n inputs. Rows are
  // materialized up to kAnalyticLevelThreshold (or always when
  // force_explicit is set, subject to the row cap).
  static Transducer exact(const MeasurementFamily& family,
                          bool force_explicit = false);

  // Machine with explicitly stored rows, indexed row = state*num_inputs+input.
  // Every row must be non-empty and sum to 1 within row_sum_tol.
  static Transducer from_rows(std::uint64_t num_states, std::uint64_t num_inputs,
                              std::vector<KernelRow> rows,
                              std::optional<int> family_level = std::nullopt,
                              double row_sum_tol = kProbabilityTol);

  std::uint64_t num_states() const { return num_states_; }
  std::uint64_t num_inputs() const { return num_inputs_; }
  std::optional<int> family_level() const { return family_level_; }
  bool analytic() const { return analytic_; }
  // Set only on machines built by exact(); such machines may use the
  // family's exact uniform stationary prior.
  bool family_exact() const { return family_exact_; }

  // Successors of (state, input) with nonzero probability.
  KernelRow row(std::uint64_t state, std::uint64_t input) const;

  // Visits every nonzero kernel entry as fn(state, input, entry), without
  // materializing rows in analytic mode. Workhorse for power iteration and
  // exhaustive checks.
  template <typename Fn>
  void for_each_entry(Fn&& fn) const {
    if (!analytic_) {
      for (std::uint64_t s = 0; s < num_states_; ++s) {
        for (std::uint64_t x = 0; x < num_inputs_; ++x) {
          for (const KernelEntry& e : rows_[s * num_inputs_ + x]) fn(s, x, e);
        }
      }
      return;
    }
    const std::uint64_t m = num_states_;
    const std::uint64_t mask = m - 1;  // m is a power of two
    for (std::uint64_t s = 0; s < m; ++s) {
      for (std::uint64_t k = 0; k < num_inputs_; ++k) {
        const double p_plus = family_weight((k + m - s) & mask);
        if (p_plus > 0.0) fn(s, k, KernelEntry{k, Outcome::plus, p_plus});
        const std::uint64_t to_minus = (k + num_inputs_) & mask;
        const double p_minus = family_weight((to_minus + m - s) & mask);
        if (p_minus > 0.0) fn(s, k, KernelEntry{to_minus, Outcome::minus, p_minus});
      }
    }
  }

 private:
  Transducer() = default;

  // cos^2(pi d / m), table-backed for resident levels.
  double family_weight(std::uint64_t d) const;

  std::uint64_t num_states_ = 0;
  std::uint64_t num_inputs_ = 0;
  std::optional<int> family_level_;
  bool analytic_ = false;
  bool family_exact_ = false;
  std::vector<KernelRow> rows_;   // empty in analytic mode
  std::vector<double> cos2_;      // per-offset weights, analytic mode only
};

Transducer build_exact(const MeasurementFamily& family);

struct StationaryOptions {
  double tolerance = 1e-12;        // total-variation convergence threshold
  std::uint64_t max_iterations = 1'000'000;
  // Optional starting vector (defaults to uniform).
  std::optional<std::vector<double>> start;
};

// Fixed point of the input-averaged transition map under uniform inputs,
// found by power iteration. Throws ConvergenceError past the iteration cap
// and SizeError for machines beyond the enumeration cap.
Distribution stationary_distribution(const Transducer& t,
                                     const StationaryOptions& opts = {});

// Shannon entropy of the stationary distribution, bits.
double statistical_complexity(const Transducer& t);

// P(previous state | input, successor state): Bayes inversion of the kernel
// against the stationary prior. Throws UnreachableTargetError when no state
// reaches the target under the input.
Distribution predecessor_distribution(const Transducer& t, std::uint64_t input,
                                      std::uint64_t target_state);

// True iff, for every (input, successor) pair with nonzero inbound mass,
// exactly one outcome is possible. Family machines satisfy this for all n.
bool output_determinism_check(const Transducer& t);

// --- serialization -------------------------------------------------------
//
// Machine documents are JSON with fields
//   {n, states: [ids], transitions: [{from, input, output, to, prob}]}
// and probabilities printed with 17 significant digits so they round-trip
// exactly.

std::string serialize_machine(const Transducer& t);
Transducer parse_machine(const std::string& text);
void write_machine_file(const Transducer& t, const std::filesystem::path& path);
Transducer read_machine_file(const std::filesystem::path& path);

}  // namespace qerase
