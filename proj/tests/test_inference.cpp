#include <doctest.h>

#include <cmath>
#include <set>

#include "qerase/erasure.hpp"
#include "qerase/inference.hpp"
#include "qerase/rng.hpp"

using namespace qerase;

namespace {

RedactedTrace trace_for(int n, std::uint64_t steps, std::uint64_t seed) {
  return redact(simulate(SimulationConfig{MeasurementFamily(n), steps, seed,
                                          StateIndex{0}, std::nullopt}));
}

// Synthetic single-input fair-coin process dressed as a level-1 trace.
RedactedTrace iid_coin_trace(std::uint64_t steps, std::uint64_t seed) {
  RedactedTrace tr;
  tr.n = 1;
  tr.seed = seed;
  CounterRng rng(seed);
  tr.inputs.assign(steps, 0);
  tr.outcomes.reserve(steps);
  for (std::uint64_t t = 0; t < steps; ++t) {
    tr.outcomes.push_back(rng.next_bernoulli(0.5) ? Outcome::plus
                                                  : Outcome::minus);
  }
  return tr;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("morph table for the two-observable family") {
  const RedactedTrace tr = trace_for(1, 100000, 31);
  const MorphTable morphs = estimate_morphs(tr, 1, 50);
  CHECK(morphs.observed_inputs == std::vector<std::uint64_t>{0, 1});
  REQUIRE(morphs.qualifying.size() == 4);
  CHECK(morphs.deficient.empty());

  // History (input 0, outcome +1) leaves the system in that eigenstate:
  // the next input-0 outcome is +1 with certainty, the next input-1
  // outcome is an even split.
  const HistoryKey key{{0u, Outcome::plus}};
  const Morph& m = morphs.qualifying.at(key);
  CHECK(m.per_input[0].p_plus() == 1.0);
  CHECK(std::abs(m.per_input[1].p_plus() - 0.5) <= 0.02);
}

TEST_CASE("histories below min_count are excluded and reported") {
  const RedactedTrace tr = trace_for(1, 6000, 100);
  const MorphTable morphs = estimate_morphs(tr, 1, 620);
  CHECK(morphs.qualifying.size() == 2);
  CHECK(morphs.deficient.size() == 2);
  // Reconstruction proceeds on the qualifying subset alone.
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 620);
  CHECK(p.num_clusters == 2);
}

TEST_CASE("morph estimation fails cleanly on starved traces") {
  CHECK_THROWS_AS(estimate_morphs(trace_for(1, 500, 1), 1, 50),
                  SampleSizeError);
  CHECK_THROWS_AS(estimate_morphs(trace_for(1, 1050, 1), 1, 50),
                  SampleSizeError);
  CHECK_THROWS_AS(estimate_morphs(trace_for(1, 100000, 1), 1, 0),
                  ValidationError);
  CHECK_THROWS_AS(estimate_morphs(trace_for(1, 100000, 1), 0, 50),
                  ValidationError);
}

TEST_CASE("reconstruction recovers the four causal states") {
  const RedactedTrace tr = trace_for(1, 100000, 37);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  CHECK(p.num_clusters == 4);
  CHECK(p.assignment.size() == 4);
  // Outputs are deterministic per (cluster, input, successor).
  for (const KernelRow& row : p.rows) {
    std::set<std::pair<std::uint64_t, int>> seen;
    for (const KernelEntry& e : row) {
      CHECK(seen.insert({e.to, outcome_value(e.y)}).second);
    }
    std::set<std::uint64_t> successors;
    for (const KernelEntry& e : row) successors.insert(e.to);
    CHECK(successors.size() == row.size());  // one outcome per successor
  }
}

TEST_CASE("longer histories yield the same partition") {
  const RedactedTrace tr = trace_for(1, 200000, 41);
  CHECK(reconstruct(tr, 1, 0.05, 50).num_clusters == 4);
  CHECK(reconstruct(tr, 2, 0.05, 50).num_clusters == 4);
  CHECK(reconstruct(tr, 3, 0.05, 50).num_clusters == 4);
}

TEST_CASE("level-2 reconstruction recovers eight states") {
  const RedactedTrace tr = trace_for(2, 300000, 43);
  const PartitionMachine p = reconstruct(tr, 1, 0.03, 50);
  CHECK(p.num_clusters == 8);
}

TEST_CASE("iid coin collapses to a single cluster") {
  const RedactedTrace tr = iid_coin_trace(100000, 47);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  CHECK(p.num_clusters == 1);
}

TEST_CASE("reconstruction is deterministic") {
  const RedactedTrace tr = trace_for(1, 100000, 53);
  const PartitionMachine a = reconstruct(tr, 2, 0.05, 50);
  const PartitionMachine b = reconstruct(tr, 2, 0.05, 50);
  CHECK(a.assignment == b.assignment);
  CHECK(a.num_clusters == b.num_clusters);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].size() == b.rows[i].size());
    for (std::size_t k = 0; k < a.rows[i].size(); ++k) {
      CHECK(a.rows[i][k].to == b.rows[i][k].to);
      CHECK(a.rows[i][k].prob == b.rows[i][k].prob);
    }
  }
}

TEST_CASE("merging is tolerance-monotone") {
  const RedactedTrace tr = trace_for(1, 100000, 59);
  std::uint32_t previous = 0xFFFFFFFF;
  for (double tol : {0.0, 0.01, 0.05, 0.2, 1.0}) {
    const std::uint32_t clusters = reconstruct(tr, 2, tol, 50).num_clusters;
    CHECK(clusters <= previous);
    previous = clusters;
  }
}

TEST_CASE("zero tolerance keeps sampling-noise splits") {
  const RedactedTrace tr = trace_for(1, 100000, 61);
  const PartitionMachine p = reconstruct(tr, 2, 0.0, 50);
  CHECK(p.num_clusters > 4);

  const MachineComparison cmp =
      compare_machines(p, build_exact(MeasurementFamily(1)));
  CHECK_FALSE(cmp.state_count_match);
}

TEST_CASE("comparison of an inferred machine against the exact one") {
  const RedactedTrace tr = trace_for(1, 100000, 67);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  const MachineComparison cmp =
      compare_machines(p, build_exact(MeasurementFamily(1)));
  CHECK(cmp.state_count_match);
  CHECK(cmp.inferred_states == 4);
  CHECK(cmp.exact_states == 4);
  CHECK(cmp.max_row_tv < 0.05);

  // The matching is a bijection.
  std::set<std::uint32_t> clusters;
  std::set<std::uint64_t> states;
  for (const auto& [c, s] : cmp.matching) {
    clusters.insert(c);
    states.insert(s);
  }
  CHECK(clusters.size() == 4);
  CHECK(states.size() == 4);
}

TEST_CASE("a machine matches itself exactly") {
  const Transducer exact = build_exact(MeasurementFamily(2));
  const MachineComparison cmp = compare_machines(partition_view(exact), exact);
  CHECK(cmp.state_count_match);
  CHECK(cmp.max_row_tv == 0.0);
  for (const auto& [c, s] : cmp.matching) CHECK(c == s);
}

TEST_CASE("alphabet mismatch is a schema error") {
  const RedactedTrace tr = trace_for(1, 100000, 71);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  CHECK_THROWS_AS(compare_machines(p, build_exact(MeasurementFamily(2))),
                  SchemaError);
}

TEST_CASE("history machines never erase less than the exact machine") {
  const RedactedTrace tr = trace_for(1, 200000, 73);
  for (std::size_t length : {1u, 2u, 3u}) {
    const PartitionMachine p = history_machine(tr, length, 50);
    const double erased = erased_info_of_partition(p, tr);
    CHECK(erased >= 1.5 - 0.02);
  }
}

TEST_CASE("partition erasure matches the analytic value on merged machines") {
  const RedactedTrace tr = trace_for(1, 200000, 79);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  CHECK(std::abs(erased_info_of_partition(p, tr) - 1.5) <= 0.02);
}

TEST_CASE("degenerate single-cluster partitions are rejected") {
  const RedactedTrace tr = trace_for(1, 100000, 83);
  const PartitionMachine everything = reconstruct(tr, 1, 1.0, 50);
  REQUIRE(everything.num_clusters == 1);
  CHECK_THROWS_AS(erased_info_of_partition(everything, tr), PreconditionError);
}

TEST_CASE("component-wise optimality of the causal partition") {
  // For a predictive refinement R of the causal states:
  //   H(R_next | X, R_prev) >= H(S_next | X, S_prev) and
  //   I(R_next : X) >= I(S_next : X),
  // checked on the empirical history machines with statistical slack.
  const Transducer exact = build_exact(MeasurementFamily(1));
  const JointDistribution joint = one_step_joint(exact);
  const std::vector<std::string> s_next{"S_next"}, x{"X"};
  const std::vector<std::string> x_sprev{"X", "S_prev"};
  const double h_exact = conditional_entropy(joint, s_next, x_sprev);
  const double i_exact = mutual_information(joint, s_next, x);

  const RedactedTrace tr = trace_for(1, 300000, 89);
  for (std::size_t length : {1u, 2u, 3u}) {
    const PartitionMachine r = history_machine(tr, length, 50);
    const PartitionErasure e = erased_info_of_partition_detailed(r, tr);
    CHECK(e.transition_entropy >= h_exact - 0.02);
    CHECK(e.input_information >= i_exact - 0.02);
    CHECK(e.total == doctest::Approx(e.transition_entropy + e.input_information)
                         .epsilon(1e-15));
  }
}

TEST_CASE("partition machine serialization carries cluster ids") {
  const RedactedTrace tr = trace_for(1, 100000, 97);
  const PartitionMachine p = reconstruct(tr, 1, 0.05, 50);
  const std::string doc = serialize_partition_machine(p);
  const Transducer parsed = parse_machine(doc);
  CHECK(parsed.num_states() == 4);
  CHECK(parsed.num_inputs() == 2);
  CHECK(parsed.family_level() == 1);
}

}  // TEST_SUITE
