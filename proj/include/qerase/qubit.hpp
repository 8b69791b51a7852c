// qubit.hpp -- discretized measurement families on the x-z great circle.
//
// Level n defines 2^n observables and 2^(n+1) pure states:
//
//   observable k:  cos(pi k / 2^n) sigma_z + sin(pi k / 2^n) sigma_x
//   state j:       cos(pi j / 2^(n+1)) |0> + sin(pi j / 2^(n+1)) |1>
//
// The +1 eigenstate of observable k is state j = k; the -1 eigenstate is
// j = k + 2^n (mod 2^(n+1)). States and observables are identified by
// their integer index only; trigonometry is evaluated on demand so state
// equality stays exact.

#pragma once

#include <cstdint>
#include <utility>

#include "qerase/errors.hpp"

namespace qerase {

// Dense enumeration paths scale as 2^(n+1); levels past this cap are
// rejected rather than ground through.
inline constexpr int kMaxLevel = 24;

struct MeasurementFamily {
  explicit MeasurementFamily(int level);

  int n;

  std::uint64_t num_observables() const { return std::uint64_t{1} << n; }
  std::uint64_t num_states() const { return std::uint64_t{1} << (n + 1); }
};

// Index j of the pure state with half-angle pi*j/2^(n+1); j = 0 is |0>.
struct StateIndex {
  std::uint64_t j = 0;
};

// Index k of the observable with Bloch angle pi*k/2^n; k = 0 is sigma_z.
struct Observable {
  std::uint64_t k = 0;
};

enum class Outcome : int { minus = -1, plus = +1 };

constexpr int outcome_value(Outcome y) { return static_cast<int>(y); }
Outcome outcome_from_value(int v);  // accepts +1/-1 only

// cos^2(pi * d / m) for even m, via integer symmetry reduction. Exact 1, 0,
// and 1/2 at the lattice points d = 0, m/2, m/4; complementary pairs
// (d, d + m/2) sum to 1 within one ulp because both reduce to sin/cos of
// the same floating-point angle.
double cos_sq_pi_ratio(std::int64_t d, std::uint64_t m);

// Post-measurement state for observable `obs` and outcome `y`; independent
// of the pre-measurement state.
StateIndex collapse(const MeasurementFamily& family, Observable obs, Outcome y);

// Born weight P(y | state, obs) = cos^2(pi (j - j_eig) / 2^(n+1)) with
// j_eig the index of the outcome's eigenstate.
double outcome_probability(const MeasurementFamily& family, StateIndex state,
                           Observable obs, Outcome y);

// True iff every (observable, outcome) pair collapses onto a state inside
// the family's state set. Enumerates all pairs.
bool closure_check(const MeasurementFamily& family);

// The unique (observable, outcome) pair whose collapse produces `state`.
std::pair<Observable, Outcome> eigenbasis_of(const MeasurementFamily& family,
                                             StateIndex state);

void check_state(const MeasurementFamily& family, StateIndex state);
void check_observable(const MeasurementFamily& family, Observable obs);

}  // namespace qerase
