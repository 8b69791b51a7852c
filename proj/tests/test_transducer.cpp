#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "qerase/transducer.hpp"

using namespace qerase;

namespace {

KernelRow find_row(const Transducer& t, std::uint64_t s, std::uint64_t x) {
  return t.row(s, x);
}

double row_sum(const KernelRow& row) {
  double sum = 0.0;
  for (const auto& e : row) sum += e.prob;
  return sum;
}

}  // namespace

TEST_SUITE("transducer") {

TEST_CASE("exact machine structure for the two-observable family") {
  const Transducer t = build_exact(MeasurementFamily(1));
  CHECK(t.num_states() == 4);
  CHECK(t.num_inputs() == 2);
  CHECK(t.family_level() == 1);

  // From the conjugate-basis state on input 0: equal split.
  const KernelRow from_plus = find_row(t, 1, 0);
  REQUIRE(from_plus.size() == 2);
  CHECK(from_plus[0].to == 0);
  CHECK(from_plus[0].y == Outcome::plus);
  CHECK(from_plus[0].prob == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(from_plus[1].to == 2);
  CHECK(from_plus[1].y == Outcome::minus);
  CHECK(from_plus[1].prob == doctest::Approx(0.5).epsilon(1e-15));

  // Eigenstate repeats with certainty; the zero-probability branch is absent.
  const KernelRow from_zero = find_row(t, 0, 0);
  REQUIRE(from_zero.size() == 1);
  CHECK(from_zero[0].to == 0);
  CHECK(from_zero[0].y == Outcome::plus);
  CHECK(from_zero[0].prob == 1.0);
}

TEST_CASE("kernel rows agree with the Born weights and collapse map") {
  // The kernel route and the qubit-module route must produce identical
  // numbers, for both explicit and analytic storage.
  for (int n : {1, 2, 7}) {
    const MeasurementFamily f(n);
    const Transducer t = build_exact(f);
    CHECK(t.analytic() == (n > kAnalyticLevelThreshold));
    for (std::uint64_t s = 0; s < t.num_states(); ++s) {
      for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
        const KernelRow row = t.row(s, x);
        REQUIRE(row.size() <= 2);
        REQUIRE(!row.empty());
        for (const auto& e : row) {
          CHECK(e.to == collapse(f, Observable{x}, e.y).j);
          CHECK(e.prob ==
                outcome_probability(f, StateIndex{s}, Observable{x}, e.y));
        }
      }
    }
  }
}

TEST_CASE("kernel rows are normalized") {
  for (int n : {1, 2, 3, 6, 7, 8}) {
    const Transducer t = build_exact(MeasurementFamily(n));
    for (std::uint64_t s = 0; s < t.num_states(); ++s) {
      for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
        REQUIRE(std::abs(row_sum(t.row(s, x)) - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("forced explicit materialization matches the lazy kernel") {
  const Transducer lazy = build_exact(MeasurementFamily(7));
  const Transducer dense = Transducer::exact(MeasurementFamily(7), true);
  CHECK(lazy.analytic());
  CHECK_FALSE(dense.analytic());
  for (std::uint64_t s = 0; s < lazy.num_states(); ++s) {
    for (std::uint64_t x = 0; x < lazy.num_inputs(); ++x) {
      const KernelRow a = lazy.row(s, x);
      const KernelRow b = dense.row(s, x);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].to == b[i].to);
        CHECK(a[i].prob == b[i].prob);
      }
    }
  }
}

TEST_CASE("stationary distribution is uniform for family machines") {
  const Distribution pi1 = stationary_distribution(build_exact(MeasurementFamily(1)));
  REQUIRE(pi1.probs.size() == 4);
  for (double p : pi1.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  const Distribution pi2 = stationary_distribution(build_exact(MeasurementFamily(2)));
  REQUIRE(pi2.probs.size() == 8);
  for (double p : pi2.probs) CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("power iteration converges from a concentrated start") {
  for (int n : {1, 2, 3}) {
    const Transducer t = build_exact(MeasurementFamily(n));
    StationaryOptions opts;
    std::vector<double> delta(t.num_states(), 0.0);
    delta[0] = 1.0;
    opts.start = delta;
    const Distribution pi = stationary_distribution(t, opts);
    const double uniform = 1.0 / static_cast<double>(t.num_states());
    for (double p : pi.probs) CHECK(std::abs(p - uniform) <= 1e-10);
  }
}

TEST_CASE("single-state machine") {
  std::vector<KernelRow> rows{{{0, Outcome::plus, 1.0}}};
  const Transducer t = Transducer::from_rows(1, 1, rows, 1);
  const Distribution pi = stationary_distribution(t);
  REQUIRE(pi.probs.size() == 1);
  CHECK(pi.probs[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(statistical_complexity(t) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("power iteration reports non-convergence on a periodic machine") {
  // Deterministic two-cycle; a concentrated start oscillates forever.
  std::vector<KernelRow> rows{{{1, Outcome::plus, 1.0}},
                              {{0, Outcome::plus, 1.0}}};
  const Transducer t = Transducer::from_rows(2, 1, rows, 1);
  StationaryOptions opts;
  opts.start = std::vector<double>{1.0, 0.0};
  opts.max_iterations = 100;
  CHECK_THROWS_AS(stationary_distribution(t, opts), ConvergenceError);
}

TEST_CASE("statistical complexity of family machines") {
  CHECK(statistical_complexity(build_exact(MeasurementFamily(1))) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(statistical_complexity(build_exact(MeasurementFamily(2))) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("predecessor distribution for the two-observable family") {
  const Transducer t = build_exact(MeasurementFamily(1));
  const Distribution pred = predecessor_distribution(t, 0, 0);
  REQUIRE(pred.probs.size() == 4);
  CHECK(pred.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pred.probs[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pred.probs[2] == 0.0);  // orthogonal predecessor is impossible
  CHECK(pred.probs[3] == doctest::Approx(0.25).epsilon(1e-12));
  validate_distribution(pred);
}

TEST_CASE("predecessor distribution matches the closed form up to level 10") {
  for (int n = 2; n <= 10; ++n) {
    const MeasurementFamily f(n);
    const Transducer t = build_exact(f);
    const std::uint64_t m = f.num_states();
    const Distribution pred = predecessor_distribution(t, 0, 0);
    REQUIRE(pred.probs.size() == m);
    for (std::uint64_t j = 0; j < m; ++j) {
      const double closed =
          cos_sq_pi_ratio(static_cast<std::int64_t>(j), m) /
          static_cast<double>(f.num_observables());
      REQUIRE(std::abs(pred.probs[j] - closed) <= 1e-12);
    }
    validate_distribution(pred);
  }
}

TEST_CASE("predecessor probabilities are pair-independent as a multiset") {
  for (int n : {1, 2, 3, 5}) {
    const MeasurementFamily f(n);
    const Transducer t = build_exact(f);
    std::vector<double> reference =
        predecessor_distribution(t, 0, 0).probs;
    std::sort(reference.begin(), reference.end());
    for (std::uint64_t x = 0; x < f.num_observables(); ++x) {
      for (Outcome y : {Outcome::plus, Outcome::minus}) {
        const std::uint64_t target = collapse(f, Observable{x}, y).j;
        std::vector<double> probs =
            predecessor_distribution(t, x, target).probs;
        std::sort(probs.begin(), probs.end());
        REQUIRE(probs.size() == reference.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
          REQUIRE(std::abs(probs[i] - reference[i]) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("uniform-prior shortcut agrees with the power-iterated route") {
  for (int n : {1, 2, 3}) {
    const Transducer fam = build_exact(MeasurementFamily(n));
    // Same rows, rebuilt without the family pedigree: predecessor queries
    // then run power iteration for the prior.
    std::vector<KernelRow> rows;
    for (std::uint64_t s = 0; s < fam.num_states(); ++s) {
      for (std::uint64_t x = 0; x < fam.num_inputs(); ++x) {
        rows.push_back(fam.row(s, x));
      }
    }
    const Transducer plain = Transducer::from_rows(
        fam.num_states(), fam.num_inputs(), std::move(rows), n);
    CHECK_FALSE(plain.family_exact());
    const Distribution a = predecessor_distribution(fam, 0, 0);
    const Distribution b = predecessor_distribution(plain, 0, 0);
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
      CHECK(std::abs(a.probs[i] - b.probs[i]) <= 1e-9);
    }
  }
}

TEST_CASE("unreachable predecessor target") {
  const Transducer t = build_exact(MeasurementFamily(1));
  // State 1 is not an eigenstate of input 0.
  CHECK_THROWS_AS(predecessor_distribution(t, 0, 1), UnreachableTargetError);
  CHECK_THROWS_AS(predecessor_distribution(t, 2, 0), ValidationError);
  CHECK_THROWS_AS(predecessor_distribution(t, 0, 9), ValidationError);
}

TEST_CASE("family machines are strongly connected under uniform inputs") {
  for (int n : {1, 2, 4, 7}) {
    const Transducer t = build_exact(MeasurementFamily(n));
    std::vector<std::vector<std::uint64_t>> forward(t.num_states());
    std::vector<std::vector<std::uint64_t>> backward(t.num_states());
    for (std::uint64_t s = 0; s < t.num_states(); ++s) {
      for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
        for (const KernelEntry& e : t.row(s, x)) {
          if (e.prob <= 0.0) continue;
          forward[s].push_back(e.to);
          backward[e.to].push_back(s);
        }
      }
    }
    for (const auto& adjacency : {forward, backward}) {
      std::vector<char> seen(t.num_states(), 0);
      std::vector<std::uint64_t> frontier{0};
      seen[0] = 1;
      while (!frontier.empty()) {
        const std::uint64_t s = frontier.back();
        frontier.pop_back();
        for (std::uint64_t next : adjacency[s]) {
          if (!seen[next]) {
            seen[next] = 1;
            frontier.push_back(next);
          }
        }
      }
      for (char c : seen) REQUIRE(c == 1);
    }
  }
}

TEST_CASE("output determinism") {
  CHECK(output_determinism_check(build_exact(MeasurementFamily(1))));
  CHECK(output_determinism_check(build_exact(MeasurementFamily(3))));
  CHECK(output_determinism_check(build_exact(MeasurementFamily(7))));

  // Hand-built machine where both outcomes land in the same state.
  std::vector<KernelRow> rows{
      {{0, Outcome::plus, 0.5}, {0, Outcome::minus, 0.5}}};
  const Transducer coin = Transducer::from_rows(1, 1, rows, 1);
  CHECK_FALSE(output_determinism_check(coin));
}

TEST_CASE("from_rows validation") {
  // Missing row coverage.
  std::vector<KernelRow> holes{{{0, Outcome::plus, 1.0}}, {}};
  CHECK_THROWS_AS(Transducer::from_rows(2, 1, holes, 1), ValidationError);
  // Bad normalization.
  std::vector<KernelRow> lop{{{0, Outcome::plus, 0.7}}};
  CHECK_THROWS_AS(Transducer::from_rows(1, 1, lop, 1), ValidationError);
  // Successor out of range.
  std::vector<KernelRow> oob{{{3, Outcome::plus, 1.0}}};
  CHECK_THROWS_AS(Transducer::from_rows(1, 1, oob, 1), ValidationError);
}

TEST_CASE("machine documents round-trip") {
  for (int n : {1, 2}) {
    const Transducer t = build_exact(MeasurementFamily(n));
    const std::string doc = serialize_machine(t);
    const Transducer parsed = parse_machine(doc);
    CHECK(parsed.num_states() == t.num_states());
    CHECK(parsed.num_inputs() == t.num_inputs());
    CHECK(parsed.family_level() == t.family_level());
    for (std::uint64_t s = 0; s < t.num_states(); ++s) {
      for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
        const KernelRow a = t.row(s, x);
        const KernelRow b = parsed.row(s, x);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
          CHECK(a[i].to == b[i].to);
          CHECK(outcome_value(a[i].y) == outcome_value(b[i].y));
          // 17 significant digits round-trip doubles exactly.
          CHECK(a[i].prob == b[i].prob);
        }
      }
    }
  }
}

TEST_CASE("machine files round-trip") {
  const auto path = std::filesystem::temp_directory_path() /
                    "qerase_test_machine.json";
  const Transducer t = build_exact(MeasurementFamily(1));
  write_machine_file(t, path);
  const Transducer parsed = read_machine_file(path);
  CHECK(parsed.num_states() == 4);
  std::filesystem::remove(path);
}

TEST_CASE("malformed machine documents are rejected") {
  CHECK_THROWS_AS(parse_machine("not json"), SchemaError);
  CHECK_THROWS_AS(parse_machine("{\"n\": 1}"), SchemaError);
  CHECK_THROWS_AS(
      parse_machine("{\"n\": 1, \"states\": [0, 2], \"transitions\": []}"),
      SchemaError);
  CHECK_THROWS_AS(
      parse_machine("{\"n\": 0, \"states\": [0], \"transitions\": []}"),
      SchemaError);
  // Row sums off beyond tolerance.
  CHECK_THROWS_AS(parse_machine(R"({
    "n": 1, "states": [0],
    "transitions": [
      {"from": 0, "input": 0, "output": 1, "to": 0, "prob": 0.5},
      {"from": 0, "input": 1, "output": 1, "to": 0, "prob": 1.0}
    ]})"),
                  SchemaError);
}

}  // TEST_SUITE
