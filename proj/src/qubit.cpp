#include "qerase/qubit.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qerase {

MeasurementFamily::MeasurementFamily(int level) : n(level) {
  if (level < 1) {
    throw ValidationError("measurement family level must be >= 1, got " +
                          std::to_string(level));
  }
  if (level > kMaxLevel) {
    throw SizeError("measurement family level " + std::to_string(level) +
                    " exceeds the enumeration cap " + std::to_string(kMaxLevel));
  }
}

Outcome outcome_from_value(int v) {
  if (v == +1) return Outcome::plus;
  if (v == -1) return Outcome::minus;
  throw ValidationError("outcome must be +1 or -1, got " + std::to_string(v));
}

double cos_sq_pi_ratio(std::int64_t d, std::uint64_t m) {
  const auto period = static_cast<std::int64_t>(m);
  // cos^2 has period pi, i.e. period m in the index.
  std::int64_t r = d % period;
  if (r < 0) r += period;
  // cos^2(pi - x) = cos^2(x): fold into [0, m/2].
  if (r > period / 2) r = period - r;

  if (r == 0) return 1.0;
  if (2 * r == period) return 0.0;
  if (4 * r == period) return 0.5;

  const double md = static_cast<double>(m);
  if (4 * r < period) {
    const double c = std::cos(std::numbers::pi * static_cast<double>(r) / md);
    return c * c;
  }
  // Near pi/2, evaluate through sin of the complementary angle; the
  // complement of index r is m/2 - r, so pairs (d, d + m/2) hit sin and
  // cos of the identical floating-point argument.
  const double s =
      std::sin(std::numbers::pi * static_cast<double>(period / 2 - r) / md);
  return s * s;
}

void check_state(const MeasurementFamily& family, StateIndex state) {
  if (state.j >= family.num_states()) {
    throw ValidationError("state index " + std::to_string(state.j) +
                          " out of range for level " + std::to_string(family.n) +
                          " (states: " + std::to_string(family.num_states()) + ")");
  }
}

void check_observable(const MeasurementFamily& family, Observable obs) {
  if (obs.k >= family.num_observables()) {
    throw ValidationError("observable index " + std::to_string(obs.k) +
                          " out of range for level " + std::to_string(family.n) +
                          " (observables: " +
                          std::to_string(family.num_observables()) + ")");
  }
}

StateIndex collapse(const MeasurementFamily& family, Observable obs, Outcome y) {
  check_observable(family, obs);
  if (y == Outcome::plus) return StateIndex{obs.k};
  return StateIndex{(obs.k + family.num_observables()) % family.num_states()};
}

double outcome_probability(const MeasurementFamily& family, StateIndex state,
                           Observable obs, Outcome y) {
  check_state(family, state);
  check_observable(family, obs);
  const StateIndex eig = collapse(family, obs, y);
  return cos_sq_pi_ratio(static_cast<std::int64_t>(state.j) -
                             static_cast<std::int64_t>(eig.j),
                         family.num_states());
}

bool closure_check(const MeasurementFamily& family) {
  for (std::uint64_t k = 0; k < family.num_observables(); ++k) {
    for (Outcome y : {Outcome::plus, Outcome::minus}) {
      const StateIndex post = collapse(family, Observable{k}, y);
      if (post.j >= family.num_states()) return false;
    }
  }
  return true;
}

std::pair<Observable, Outcome> eigenbasis_of(const MeasurementFamily& family,
                                             StateIndex state) {
  check_state(family, state);
  const std::uint64_t half = family.num_observables();
  if (state.j < half) return {Observable{state.j}, Outcome::plus};
  return {Observable{state.j - half}, Outcome::minus};
}

}  // namespace qerase
