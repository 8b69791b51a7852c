// erasure.hpp -- information erased per measurement and its heat bound.
//
// Two independent routes compute the erased information:
//   direct:     entropy of the predecessor state given (input, successor),
//   decomposed: transition entropy H(S_next | X, S_prev) plus the
//               state-input mutual information I(S_next : X).
// Both must agree to 1e-12 on every family machine; the CLI asserts this
// on every run.

#pragma once

#include <string>
#include <vector>

#include "qerase/info.hpp"
#include "qerase/transducer.hpp"

namespace qerase {

// Tolerance for agreement between independent evaluation routes.
inline constexpr double kRouteAgreementTol = 1e-12;

// Levels up to this get the exhaustive all-pairs cross-check inside
// erased_information_direct; larger levels get a re-summation check.
inline constexpr int kExhaustiveCrossCheckLevel = 10;

// Bits erased per measurement: H(S_prev | X, Y, S_next). Requires output
// determinism (PreconditionError otherwise). For family machines the value
// is cross-checked against the average over all (input, successor) pairs.
double erased_information_direct(const Transducer& t);

// Same quantity through the decomposition H(S_next|X,S_prev) + I(S_next:X);
// evaluates the intermediate H(S_next|X,S_prev) - H(S_next|X) + H(S_prev|X)
// form as well and requires all routes to agree within 1e-12.
double erased_information_decomposed(const Transducer& t);

// Full one-step joint (S_prev, X, Y, S_next) under uniform inputs and the
// stationary state prior. Materialized densely; refuses oversized machines.
JointDistribution one_step_joint(const Transducer& t);

// H(S_prev | X), H(S_prev), and H(S_next) under uniform inputs at
// stationarity. These coincide for stationary machines driven by inputs
// chosen independently of the state; computed without materializing the
// full joint so the identity can be checked at levels past the dense-joint
// range.
struct StationarityEntropies {
  double h_prev_given_x = 0.0;
  double h_prev = 0.0;
  double h_next = 0.0;
};

StationarityEntropies stationarity_entropy_identities(const Transducer& t);

struct SweepRow {
  int n = 0;
  double erased_bits = 0.0;
  double excess_over_n = 0.0;
  double heat_bound_joules = 0.0;
};

// Erased information for n = 1..n_max with the heat bound at the given
// temperature. Rows are evaluated in parallel and returned ordered by n;
// every row is checked for erased_bits > n and strict growth.
std::vector<SweepRow> erased_scaling_sweep(int n_max, double temperature_kelvin);

// JSON document {n, erased_bits, temperature_K, heat_bound_J,
// third_law_caveat} with numbers at 17 significant digits; reports from the
// dual-route path also carry erased_bits_decomposed.
std::string serialize_erasure_report(const ErasureReport& r);
ErasureReport parse_erasure_report(const std::string& text);

}  // namespace qerase
