#include <doctest.h>

#include <cmath>
#include <vector>

#include "qerase/erasure.hpp"

using namespace qerase;

namespace {

// Independent oracle in extended precision: the erased information as the
// entropy of the normalized cos^2 weights, summed term by term in long
// double. Test-only; shares no code with the library path.
long double erased_oracle(int n) {
  const unsigned long long m = 1ull << (n + 1);
  const long double pi = 3.14159265358979323846264338327950288L;
  const long double ln2 = 0.69314718055994530941723212145817657L;
  const long double norm = static_cast<long double>(1ull << n);
  long double h = 0.0L;
  for (unsigned long long j = 0; j < m; ++j) {
    const long double c = std::cos(pi * static_cast<long double>(j) /
                                   static_cast<long double>(m));
    const long double p = c * c / norm;
    if (p > 0.0L) h -= p * (std::log(p) / ln2);
  }
  return h;
}

Transducer coin_machine() {
  std::vector<KernelRow> rows{
      {{0, Outcome::plus, 0.5}, {0, Outcome::minus, 0.5}}};
  return Transducer::from_rows(1, 1, rows, 1);
}

Transducer silent_machine() {
  std::vector<KernelRow> rows{{{0, Outcome::plus, 1.0}}};
  return Transducer::from_rows(1, 1, rows, 1);
}

}  // namespace

TEST_SUITE("erasure") {

TEST_CASE("three halves of a bit for the two-observable family") {
  const Transducer t = build_exact(MeasurementFamily(1));
  CHECK(std::abs(erased_information_direct(t) - 1.5) <= 1e-12);
  CHECK(std::abs(erased_information_decomposed(t) - 1.5) <= 1e-12);
  CHECK(std::abs(static_cast<double>(erased_oracle(1)) - 1.5) <= 1e-15);
}

TEST_CASE("level-2 value against the extended-precision oracle") {
  // Frozen from the oracle; kept to 16 significant digits.
  const double frozen = 2.550438018346428;
  CHECK(std::abs(static_cast<double>(erased_oracle(2)) - frozen) <= 1e-12);

  const Transducer t = build_exact(MeasurementFamily(2));
  CHECK(std::abs(erased_information_direct(t) - frozen) <= 1e-12);
  CHECK(std::abs(erased_information_decomposed(t) - frozen) <= 1e-12);
}

TEST_CASE("direct route matches the oracle for levels 1..10") {
  for (int n = 1; n <= 10; ++n) {
    const Transducer t = build_exact(MeasurementFamily(n));
    const double direct = erased_information_direct(t);
    CHECK(std::abs(direct - static_cast<double>(erased_oracle(n))) <= 1e-11);
    CHECK(direct > static_cast<double>(n));
  }
}

TEST_CASE("decomposition splits into transition entropy and input information") {
  const JointDistribution joint = one_step_joint(build_exact(MeasurementFamily(1)));
  joint.validate();
  const std::vector<std::string> s_prev{"S_prev"}, s_next{"S_next"}, x{"X"};
  const std::vector<std::string> x_sprev{"X", "S_prev"};
  const std::vector<std::string> xy_snext{"X", "Y", "S_next"};
  CHECK(conditional_entropy(joint, s_next, x_sprev) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mutual_information(joint, s_next, x) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // The direct conditional entropy on the same joint.
  CHECK(conditional_entropy(joint, s_prev, xy_snext) ==
        doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("direct and decomposed routes agree for levels 1..10") {
  for (int n = 1; n <= 10; ++n) {
    const Transducer t = build_exact(MeasurementFamily(n));
    const double direct = erased_information_direct(t);
    const double decomposed = erased_information_decomposed(t);
    REQUIRE(std::abs(direct - decomposed) <= 1e-12);
  }
}

TEST_CASE("machines of unknown provenance take the generic route") {
  // A parsed copy of the exact machine loses the family pedigree, so the
  // erased information runs through power iteration and per-pair Bayes
  // inversion; the value must survive the round trip.
  const Transducer t =
      parse_machine(serialize_machine(build_exact(MeasurementFamily(1))));
  CHECK_FALSE(t.family_exact());
  CHECK(std::abs(erased_information_direct(t) - 1.5) <= 1e-9);
  CHECK(std::abs(erased_information_decomposed(t) - 1.5) <= 1e-9);
}

TEST_CASE("single-state machine erases nothing") {
  const Transducer t = silent_machine();
  CHECK(erased_information_direct(t) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(erased_information_decomposed(t) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("non-deterministic outputs are rejected") {
  const Transducer coin = coin_machine();
  CHECK_THROWS_AS(erased_information_direct(coin), PreconditionError);
  CHECK_THROWS_AS(erased_information_decomposed(coin), PreconditionError);
}

TEST_CASE("scaling sweep") {
  const std::vector<SweepRow> rows = erased_scaling_sweep(4, 300.0);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n == 1);
  CHECK(std::abs(rows[0].erased_bits - 1.5) <= 1e-12);
  CHECK(std::abs(rows[1].erased_bits - 2.550438018346428) <= 1e-12);
  double previous = 0.0;
  for (const auto& row : rows) {
    CHECK(row.erased_bits > row.n);
    CHECK(row.erased_bits > previous);
    CHECK(row.excess_over_n > 0.0);
    CHECK(row.excess_over_n < 1.0);
    CHECK(row.heat_bound_joules ==
          doctest::Approx(landauer_heat_bound(row.erased_bits, 300.0))
              .epsilon(1e-15));
    previous = row.erased_bits;
  }

  CHECK_THROWS_AS(erased_scaling_sweep(0, 300.0), ValidationError);
  CHECK_THROWS_AS(erased_scaling_sweep(25, 300.0), SizeError);
}

TEST_CASE("excess over n stays in the observed bracket") {
  // Converges toward ~0.5573 from 0.5; the strict bracket (0, 1) is the
  // contract, the tightened bracket is the observed regression pin.
  for (int n = 1; n <= 12; ++n) {
    const double erased =
        erased_information_direct(build_exact(MeasurementFamily(n)));
    const double excess = erased - n;
    CHECK(excess >= 0.5 - 1e-12);
    CHECK(excess <= 0.5574);
  }
}

TEST_CASE("stationarity entropy identities") {
  for (int n = 1; n <= 6; ++n) {
    const Transducer t = build_exact(MeasurementFamily(n));
    const StationarityEntropies e = stationarity_entropy_identities(t);
    CHECK(std::abs(e.h_prev_given_x - e.h_prev) <= 1e-12);
    CHECK(std::abs(e.h_prev - e.h_next) <= 1e-12);
    CHECK(e.h_prev == doctest::Approx(n + 1.0).epsilon(1e-9));
  }
  // Exhaustive counterpart through the materialized joint.
  for (int n = 1; n <= 4; ++n) {
    const Transducer t = build_exact(MeasurementFamily(n));
    const StationarityEntropies e = stationarity_entropy_identities(t);
    const JointDistribution joint = one_step_joint(t);
    const std::vector<std::string> s_prev{"S_prev"}, s_next{"S_next"}, x{"X"};
    CHECK(std::abs(joint.entropy(s_prev) - e.h_prev) <= 1e-12);
    CHECK(std::abs(joint.entropy(s_next) - e.h_next) <= 1e-12);
    CHECK(std::abs(conditional_entropy(joint, s_prev, x) - e.h_prev_given_x) <=
          1e-12);
  }
}

TEST_CASE("erasure reports round-trip") {
  ErasureReport r = make_erasure_report(2, 2.550438018346428, 300.0);
  r.has_decomposed = true;
  r.erased_bits_decomposed = r.erased_bits;
  const ErasureReport parsed = parse_erasure_report(serialize_erasure_report(r));
  CHECK(parsed.n == r.n);
  CHECK(parsed.erased_bits == r.erased_bits);
  CHECK(parsed.erased_bits_decomposed == r.erased_bits_decomposed);
  CHECK(parsed.temperature_kelvin == r.temperature_kelvin);
  CHECK(parsed.heat_bound_joules == r.heat_bound_joules);
  CHECK(parsed.third_law_caveat == r.third_law_caveat);
}

}  // TEST_SUITE
