// inference.hpp -- causal-state reconstruction from redacted traces.
//
// Histories are the last L (input, outcome) pairs. Two histories belong to
// the same causal state when their next-step outcome distributions agree
// for every next input; reconstruction merges histories agglomeratively
// under a total-variation threshold. The process is order-1 Markov in its
// causal state, so one-step morphs suffice; tests confirm that L = 2 and
// L = 3 recover the same partition.
//
// Merge order is fixed (descending count, ties by lexicographic history)
// so reconstruction is deterministic given (trace, L, tol, min_count).

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qerase/simulate.hpp"
#include "qerase/transducer.hpp"

namespace qerase {

// Observations required per history per (observed) next input.
inline constexpr std::uint64_t kDefaultMinCount = 50;

inline constexpr double kDefaultMergeTol = 0.05;

// A partition whose pooled morphs lose more than this many bits of
// next-outcome predictability is rejected as non-predictive.
inline constexpr double kPredictiveSufficiencyTolBits = 0.05;

// Last L (input, outcome) pairs of a trace position, oldest first.
using HistoryKey = std::vector<std::pair<std::uint32_t, Outcome>>;

struct MorphCell {
  std::uint64_t plus = 0;
  std::uint64_t minus = 0;

  std::uint64_t total() const { return plus + minus; }
  double p_plus() const {
    return total() ? static_cast<double>(plus) / static_cast<double>(total())
                   : 0.0;
  }
};

struct Morph {
  std::uint64_t count = 0;            // occurrences of the history
  std::vector<MorphCell> per_input;   // next-step outcome counts, by input
};

struct MorphTable {
  int n = 0;
  std::size_t history_length = 1;
  std::uint64_t min_count = kDefaultMinCount;
  // Inputs that occur in the trace at all; the min_count requirement
  // applies to these (synthetic traces may not exercise the full alphabet).
  std::vector<std::uint64_t> observed_inputs;
  std::map<HistoryKey, Morph> qualifying;
  std::map<HistoryKey, Morph> deficient;
};

MorphTable estimate_morphs(const RedactedTrace& tr, std::size_t history_length,
                           std::uint64_t min_count = kDefaultMinCount);

struct PartitionMachine {
  int n = 0;
  std::size_t history_length = 0;
  std::uint64_t min_count = kDefaultMinCount;

  std::map<HistoryKey, std::uint32_t> assignment;
  std::uint32_t num_clusters = 0;
  std::uint64_t num_inputs = 0;

  // Estimated kernel rows indexed cluster * num_inputs + input; rows for
  // inputs absent from the trace stay empty.
  std::vector<KernelRow> rows;

  // Empirical cluster occupancy and the transition count behind the kernel.
  std::vector<double> occupancy;
  std::uint64_t transition_samples = 0;
};

PartitionMachine reconstruct(const RedactedTrace& tr, std::size_t history_length,
                             double tol,
                             std::uint64_t min_count = kDefaultMinCount);

// The unmerged partition: every qualifying history is its own cluster.
PartitionMachine history_machine(const RedactedTrace& tr,
                                 std::size_t history_length,
                                 std::uint64_t min_count = kDefaultMinCount);

// Views an exact machine as a partition (no history assignment); lets the
// comparison tooling run machine-vs-machine.
PartitionMachine partition_view(const Transducer& t);

struct MachineComparison {
  bool state_count_match = false;
  std::uint64_t inferred_states = 0;
  std::uint64_t exact_states = 0;
  // cluster id -> exact state id, greedy by transition overlap.
  std::vector<std::pair<std::uint32_t, std::uint64_t>> matching;
  double max_row_tv = 0.0;
};

// Matches clusters to exact states greedily by outcome-profile overlap and
// reports the worst total-variation distance between matched kernel rows.
// Throws SchemaError on input-alphabet mismatch.
MachineComparison compare_machines(const PartitionMachine& inferred,
                                   const Transducer& exact);

// H(R_next | X, R_prev) + I(R_next : X) on the partition's empirical joint.
// Rejects partitions that fail the predictive-sufficiency precheck.
struct PartitionErasure {
  double transition_entropy = 0.0;  // H(R_next | X, R_prev)
  double input_information = 0.0;   // I(R_next : X)
  double total = 0.0;
};

PartitionErasure erased_info_of_partition_detailed(const PartitionMachine& p,
                                                   const RedactedTrace& tr);
double erased_info_of_partition(const PartitionMachine& p,
                                const RedactedTrace& tr);

// Partition machines serialize in the machine document format with cluster
// ids in place of state indices (rows for unobserved inputs are omitted).
std::string serialize_partition_machine(const PartitionMachine& p);
void write_partition_machine_file(const PartitionMachine& p,
                                  const std::filesystem::path& path);

std::string serialize_comparison(const MachineComparison& c);

}  // namespace qerase
