// simulate.hpp -- Monte Carlo trace generation and empirical estimators.
//
// The simulator draws inputs uniformly, outcomes by the Born weights, and
// applies the collapse map; identical seeds yield bit-identical traces.
// Every empirical estimator excludes the first kBurnInSteps records: the
// initial state is deterministic, and the analytic quantities are defined
// at stationarity.
//
// Inference must work from (input, outcome) pairs alone, so traces carry an
// explicit redacted view without the ground-truth state column.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "qerase/info.hpp"
#include "qerase/qubit.hpp"

namespace qerase {

inline constexpr std::uint64_t kBurnInSteps = 1000;

// Minimum qualifying transitions per estimator cell.
inline constexpr std::uint64_t kMinCellSamples = 100;

struct SimulationConfig {
  MeasurementFamily family;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  StateIndex initial_state{0};
  // Restricts the input alphabet to a single observable; degenerate
  // variant used by tests.
  std::optional<std::uint64_t> forced_input;
};

// Columnar trace: record t holds the input, outcome, and post-measurement
// state of step t.
struct Trace {
  int n = 0;
  std::uint64_t seed = 0;
  std::uint64_t initial_state = 0;

  std::vector<std::uint32_t> inputs;
  std::vector<Outcome> outcomes;
  std::vector<std::uint32_t> states;

  std::uint64_t size() const { return inputs.size(); }
};

// Trace with the ground-truth state column removed; the only view the
// inference pipeline accepts.
struct RedactedTrace {
  int n = 0;
  std::uint64_t seed = 0;

  std::vector<std::uint32_t> inputs;
  std::vector<Outcome> outcomes;

  std::uint64_t size() const { return inputs.size(); }
};

Trace simulate(const SimulationConfig& cfg);

RedactedTrace redact(const Trace& tr);

// Fraction of post-burn-in steps whose post-measurement state differs from
// the previous state.
double flip_fraction(const Trace& tr);

// Post-burn-in occupancy of states / frequency of inputs.
Distribution state_occupancy(const Trace& tr);
Distribution input_frequencies(const Trace& tr);

// Frequencies of the predecessor state over qualifying transitions (input
// == x, post-state == s_target). Throws SampleSizeError below
// kMinCellSamples qualifying transitions.
Distribution empirical_predecessor_distribution(const Trace& tr,
                                                std::uint64_t x,
                                                std::uint64_t s_target);

// Plug-in estimate of H(S_prev | X, S_next) over observed cells, with the
// first-order bias bound and an analytic standard error for bracketing.
struct ErasedEstimate {
  double bits = 0.0;
  double bias_bound = 0.0;  // plug-in estimates are biased low by <= this
  double std_error = 0.0;
};

ErasedEstimate empirical_erased_information_detailed(const Trace& tr);
double empirical_erased_information(const Trace& tr);

// --- trace files -----------------------------------------------------------
//
// Delimited text with a comment header carrying n, seed, and the artifact
// version, then a column header row:
//
//   # qerase-trace format=1 version=0.1.0 n=1 seed=42 steps=10 initial_state=0 redacted=0
//   t,x,y,s
//   0,0,+1,0
//
// Redacted exports omit the s column and set redacted=1.

void write_trace_file(const Trace& tr, const std::filesystem::path& path,
                      bool redacted = false);
Trace read_trace_file(const std::filesystem::path& path);
RedactedTrace read_redacted_trace_file(const std::filesystem::path& path);

}  // namespace qerase
