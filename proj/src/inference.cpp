#include "qerase/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "qerase/info.hpp"
#include "qerase/version.hpp"

namespace qerase {

namespace {

// Histories are packed into a u64, one (input, outcome) pair per (n+1)-bit
// field with the oldest pair in the most significant position, so numeric
// order equals lexicographic order on HistoryKey.
struct HistoryCodec {
  int n;
  std::size_t length;
  std::uint32_t pair_bits;
  std::uint64_t pair_mask;
  std::uint64_t key_mask;

  HistoryCodec(int level, std::size_t history_length)
      : n(level), length(history_length) {
    pair_bits = static_cast<std::uint32_t>(level + 1);
    if (history_length < 1) {
      throw ValidationError("history length must be >= 1");
    }
    if (pair_bits * history_length > 64) {
      throw SizeError("history of " + std::to_string(history_length) +
                      " pairs at level " + std::to_string(level) +
                      " does not fit the 64-bit key");
    }
    pair_mask = (std::uint64_t{1} << pair_bits) - 1;
    const std::uint32_t total_bits =
        pair_bits * static_cast<std::uint32_t>(history_length);
    key_mask = total_bits == 64 ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << total_bits) - 1;
  }

  std::uint64_t code(std::uint32_t x, Outcome y) const {
    return (static_cast<std::uint64_t>(x) << 1) |
           (y == Outcome::plus ? 1u : 0u);
  }

  std::uint64_t push(std::uint64_t key, std::uint32_t x, Outcome y) const {
    return ((key << pair_bits) | code(x, y)) & key_mask;
  }

  HistoryKey unpack(std::uint64_t key) const {
    HistoryKey h(length);
    for (std::size_t i = 0; i < length; ++i) {
      const std::uint64_t c =
          (key >> (pair_bits * (length - 1 - i))) & pair_mask;
      h[i] = {static_cast<std::uint32_t>(c >> 1),
              (c & 1) ? Outcome::plus : Outcome::minus};
    }
    return h;
  }
};

struct MorphAccum {
  std::uint64_t count = 0;
  std::vector<MorphCell> per_input;
};

// Raw morph counts keyed by packed history, plus the observed input set.
struct RawMorphs {
  HistoryCodec codec;
  std::vector<std::uint64_t> observed_inputs{};
  std::map<std::uint64_t, MorphAccum> table{};
  std::uint64_t num_inputs = 0;
  std::uint64_t first_position = 0;
};

RawMorphs count_morphs(const RedactedTrace& tr, std::size_t history_length) {
  const MeasurementFamily family(tr.n);
  RawMorphs raw{HistoryCodec(tr.n, history_length)};
  raw.num_inputs = family.num_observables();
  raw.first_position = kBurnInSteps + history_length;
  if (tr.size() <= raw.first_position) {
    throw SampleSizeError(
        "trace of " + std::to_string(tr.size()) +
        " steps leaves no positions past burn-in plus history length");
  }

  std::vector<std::uint64_t> input_counts(raw.num_inputs, 0);
  std::unordered_map<std::uint64_t, MorphAccum> counts;
  std::uint64_t key = 0;
  for (std::uint64_t t = 0; t < tr.size(); ++t) {
    const std::uint32_t x = tr.inputs[t];
    if (x >= raw.num_inputs) {
      throw SchemaError("trace input out of range for level " +
                        std::to_string(tr.n));
    }
    if (t >= raw.first_position) {
      ++input_counts[x];
      MorphAccum& acc = counts[key];
      if (acc.per_input.empty()) acc.per_input.resize(raw.num_inputs);
      ++acc.count;
      if (tr.outcomes[t] == Outcome::plus) {
        ++acc.per_input[x].plus;
      } else {
        ++acc.per_input[x].minus;
      }
    }
    key = raw.codec.push(key, x, tr.outcomes[t]);
  }

  for (std::uint64_t x = 0; x < raw.num_inputs; ++x) {
    if (input_counts[x] > 0) raw.observed_inputs.push_back(x);
  }
  raw.table.insert(counts.begin(), counts.end());
  return raw;
}

bool morph_qualifies(const MorphAccum& acc,
                     const std::vector<std::uint64_t>& observed_inputs,
                     std::uint64_t min_count) {
  for (std::uint64_t x : observed_inputs) {
    if (acc.per_input[x].total() < min_count) return false;
  }
  return true;
}

}  // namespace

MorphTable estimate_morphs(const RedactedTrace& tr, std::size_t history_length,
                           std::uint64_t min_count) {
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  RawMorphs raw = count_morphs(tr, history_length);

  MorphTable out;
  out.n = tr.n;
  out.history_length = history_length;
  out.min_count = min_count;
  out.observed_inputs = raw.observed_inputs;
  for (const auto& [key, acc] : raw.table) {
    Morph m;
    m.count = acc.count;
    m.per_input = acc.per_input;
    if (morph_qualifies(acc, raw.observed_inputs, min_count)) {
      out.qualifying.emplace(raw.codec.unpack(key), std::move(m));
    } else {
      out.deficient.emplace(raw.codec.unpack(key), std::move(m));
    }
  }
  if (out.qualifying.empty()) {
    std::string detail;
    std::size_t listed = 0;
    for (const auto& [h, m] : out.deficient) {
      if (listed++ == 8) {
        detail += ", ...";
        break;
      }
      if (!detail.empty()) detail += ", ";
      detail += "[";
      for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) detail += " ";
        detail += "(" + std::to_string(h[i].first) +
                  (h[i].second == Outcome::plus ? ",+1)" : ",-1)");
      }
      detail += "]x" + std::to_string(m.count);
    }
    throw SampleSizeError("no history reaches min_count=" +
                          std::to_string(min_count) +
                          " on every observed input; deficient: " + detail);
  }
  return out;
}

namespace {

struct ClusterAccum {
  std::vector<MorphCell> per_input;

  void absorb(const MorphAccum& m) {
    if (per_input.empty()) per_input.resize(m.per_input.size());
    for (std::size_t x = 0; x < m.per_input.size(); ++x) {
      per_input[x].plus += m.per_input[x].plus;
      per_input[x].minus += m.per_input[x].minus;
    }
  }
};

// Two-outcome total variation between a history's and a cluster's
// next-outcome distribution for one input.
double outcome_tv(const MorphCell& a, const MorphCell& b) {
  return std::abs(a.p_plus() - b.p_plus());
}

PartitionMachine reconstruct_impl(const RedactedTrace& tr,
                                  std::size_t history_length, double tol,
                                  std::uint64_t min_count, bool allow_merge) {
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  if (allow_merge && (tol < 0.0 || tol > 1.0)) {
    throw ValidationError("merge tolerance must lie in [0, 1]");
  }
  RawMorphs raw = count_morphs(tr, history_length);

  // Qualifying histories in merge order: descending count, ties by
  // lexicographic (= numeric packed) history order.
  std::vector<std::pair<std::uint64_t, const MorphAccum*>> ordered;
  for (const auto& [key, acc] : raw.table) {
    if (morph_qualifies(acc, raw.observed_inputs, min_count)) {
      ordered.emplace_back(key, &acc);
    }
  }
  if (ordered.empty()) {
    // estimate_morphs reproduces the counting and throws with detail.
    estimate_morphs(tr, history_length, min_count);
    throw SampleSizeError("no qualifying history");
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) {
                     return a.second->count > b.second->count;
                   });

  std::vector<ClusterAccum> clusters;
  std::unordered_map<std::uint64_t, std::uint32_t> assignment;
  for (const auto& [key, acc] : ordered) {
    std::uint32_t chosen = static_cast<std::uint32_t>(clusters.size());
    if (allow_merge) {
      for (std::uint32_t c = 0; c < clusters.size(); ++c) {
        double worst = 0.0;
        for (std::uint64_t x : raw.observed_inputs) {
          worst = std::max(worst,
                           outcome_tv(acc->per_input[x], clusters[c].per_input[x]));
        }
        if (worst <= tol) {
          chosen = c;
          break;
        }
      }
    }
    if (chosen == clusters.size()) clusters.emplace_back();
    clusters[chosen].absorb(*acc);
    assignment.emplace(key, chosen);
  }

  PartitionMachine p;
  p.n = tr.n;
  p.history_length = history_length;
  p.min_count = min_count;
  p.num_clusters = static_cast<std::uint32_t>(clusters.size());
  p.num_inputs = raw.num_inputs;
  for (const auto& [key, c] : assignment) {
    p.assignment.emplace(raw.codec.unpack(key), c);
  }

  // Kernel and occupancy from trace transitions between assigned positions.
  const std::uint64_t num_rows = p.num_clusters * p.num_inputs;
  std::vector<std::map<std::pair<std::uint32_t, int>, std::uint64_t>> row_counts(
      num_rows);
  std::vector<std::uint64_t> row_totals(num_rows, 0);
  std::vector<std::uint64_t> occupancy_counts(p.num_clusters, 0);

  std::uint64_t key = 0;
  for (std::uint64_t t = 0; t < tr.size(); ++t) {
    const std::uint64_t from_key = key;
    key = raw.codec.push(key, tr.inputs[t], tr.outcomes[t]);
    if (t < raw.first_position) continue;
    const auto from_it = assignment.find(from_key);
    if (from_it == assignment.end()) continue;
    ++occupancy_counts[from_it->second];
    const auto to_it = assignment.find(key);
    if (to_it == assignment.end()) continue;
    const std::uint64_t row = from_it->second * p.num_inputs + tr.inputs[t];
    ++row_counts[row][{to_it->second, outcome_value(tr.outcomes[t])}];
    ++row_totals[row];
  }

  p.rows.resize(num_rows);
  for (std::uint64_t row = 0; row < num_rows; ++row) {
    if (row_totals[row] == 0) continue;
    const double total = static_cast<double>(row_totals[row]);
    for (const auto& [to_y, c] : row_counts[row]) {
      p.rows[row].push_back({to_y.first, outcome_from_value(to_y.second),
                             static_cast<double>(c) / total});
    }
    p.transition_samples += row_totals[row];
  }

  std::uint64_t occupancy_total = 0;
  for (std::uint64_t c : occupancy_counts) occupancy_total += c;
  p.occupancy.resize(p.num_clusters, 0.0);
  for (std::uint32_t c = 0; c < p.num_clusters; ++c) {
    p.occupancy[c] = static_cast<double>(occupancy_counts[c]) /
                     static_cast<double>(occupancy_total);
  }
  return p;
}

}  // namespace

PartitionMachine reconstruct(const RedactedTrace& tr, std::size_t history_length,
                             double tol, std::uint64_t min_count) {
  return reconstruct_impl(tr, history_length, tol, min_count,
                          /*allow_merge=*/true);
}

PartitionMachine history_machine(const RedactedTrace& tr,
                                 std::size_t history_length,
                                 std::uint64_t min_count) {
  return reconstruct_impl(tr, history_length, /*tol=*/0.0, min_count,
                          /*allow_merge=*/false);
}

PartitionMachine partition_view(const Transducer& t) {
  PartitionMachine p;
  p.n = t.family_level().value_or(0);
  if (p.n == 0) {
    throw ValidationError("machine carries no level tag");
  }
  if (t.num_states() * t.num_inputs() > (std::uint64_t{1} << 20)) {
    throw SizeError("machine too large for a partition view");
  }
  p.history_length = 0;
  p.num_clusters = static_cast<std::uint32_t>(t.num_states());
  p.num_inputs = t.num_inputs();
  p.rows.resize(t.num_states() * t.num_inputs());
  for (std::uint64_t s = 0; s < t.num_states(); ++s) {
    for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
      for (const KernelEntry& e : t.row(s, x)) {
        p.rows[s * t.num_inputs() + x].push_back(
            {e.to, e.y, e.prob});
      }
    }
  }
  p.occupancy = stationary_distribution(t).probs;
  return p;
}

namespace {

// P(+1 | state, input) profile of a kernel row.
double row_plus_mass(const KernelRow& row) {
  double plus = 0.0;
  for (const KernelEntry& e : row) {
    if (e.y == Outcome::plus) plus += e.prob;
  }
  return plus;
}

double row_total_variation(const KernelRow& inferred_mapped,
                           const KernelRow& exact_row) {
  // Keys are (successor, outcome); successors of the inferred row have
  // already been mapped into the exact state space (unmatched successors
  // keep a sentinel that cannot collide).
  std::map<std::pair<std::uint64_t, int>, double> diff;
  for (const KernelEntry& e : inferred_mapped) {
    diff[{e.to, outcome_value(e.y)}] += e.prob;
  }
  for (const KernelEntry& e : exact_row) {
    diff[{e.to, outcome_value(e.y)}] -= e.prob;
  }
  double tv = 0.0;
  for (const auto& [k, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

}  // namespace

MachineComparison compare_machines(const PartitionMachine& inferred,
                                   const Transducer& exact) {
  if (inferred.num_inputs != exact.num_inputs()) {
    throw SchemaError("input alphabet mismatch: " +
                      std::to_string(inferred.num_inputs) + " vs " +
                      std::to_string(exact.num_inputs()));
  }
  MachineComparison cmp;
  cmp.inferred_states = inferred.num_clusters;
  cmp.exact_states = exact.num_states();
  cmp.state_count_match = cmp.inferred_states == cmp.exact_states;

  const std::uint64_t num_inputs = exact.num_inputs();

  // Outcome profiles.
  std::vector<std::vector<double>> prof_inferred(inferred.num_clusters);
  for (std::uint32_t c = 0; c < inferred.num_clusters; ++c) {
    prof_inferred[c].resize(num_inputs, 0.0);
    for (std::uint64_t x = 0; x < num_inputs; ++x) {
      prof_inferred[c][x] = row_plus_mass(inferred.rows[c * num_inputs + x]);
    }
  }
  std::vector<std::vector<double>> prof_exact(exact.num_states());
  for (std::uint64_t s = 0; s < exact.num_states(); ++s) {
    prof_exact[s].resize(num_inputs, 0.0);
    for (std::uint64_t x = 0; x < num_inputs; ++x) {
      prof_exact[s][x] = row_plus_mass(exact.row(s, x));
    }
  }

  // Greedy matching on average outcome-profile overlap.
  std::vector<bool> cluster_used(inferred.num_clusters, false);
  std::vector<bool> state_used(exact.num_states(), false);
  const std::uint64_t matches =
      std::min<std::uint64_t>(inferred.num_clusters, exact.num_states());
  for (std::uint64_t round = 0; round < matches; ++round) {
    double best = -1.0;
    std::uint32_t best_c = 0;
    std::uint64_t best_s = 0;
    for (std::uint32_t c = 0; c < inferred.num_clusters; ++c) {
      if (cluster_used[c]) continue;
      for (std::uint64_t s = 0; s < exact.num_states(); ++s) {
        if (state_used[s]) continue;
        double overlap = 0.0;
        for (std::uint64_t x = 0; x < num_inputs; ++x) {
          overlap += 1.0 - std::abs(prof_inferred[c][x] - prof_exact[s][x]);
        }
        overlap /= static_cast<double>(num_inputs);
        if (overlap > best) {
          best = overlap;
          best_c = c;
          best_s = s;
        }
      }
    }
    cluster_used[best_c] = true;
    state_used[best_s] = true;
    cmp.matching.emplace_back(best_c, best_s);
  }
  std::sort(cmp.matching.begin(), cmp.matching.end());

  // Worst row TV over matched clusters, successors mapped through the
  // matching; unmatched successors keep ids beyond the exact state range.
  std::vector<std::uint64_t> cluster_to_state(inferred.num_clusters);
  for (std::uint32_t c = 0; c < inferred.num_clusters; ++c) {
    cluster_to_state[c] = exact.num_states() + c;  // sentinel
  }
  for (const auto& [c, s] : cmp.matching) cluster_to_state[c] = s;

  for (const auto& [c, s] : cmp.matching) {
    for (std::uint64_t x = 0; x < num_inputs; ++x) {
      KernelRow mapped = inferred.rows[c * num_inputs + x];
      for (KernelEntry& e : mapped) e.to = cluster_to_state[e.to];
      cmp.max_row_tv = std::max(
          cmp.max_row_tv, row_total_variation(mapped, exact.row(s, x)));
    }
  }
  return cmp;
}

PartitionErasure erased_info_of_partition_detailed(const PartitionMachine& p,
                                                   const RedactedTrace& tr) {
  if (p.assignment.empty()) {
    throw PreconditionError(
        "partition carries no history assignment; erased information "
        "requires a trace-backed partition");
  }
  RawMorphs raw = count_morphs(tr, p.history_length);

  std::unordered_map<std::uint64_t, std::uint32_t> assignment;
  for (const auto& [h, c] : p.assignment) {
    std::uint64_t key = 0;
    for (const auto& [x, y] : h) key = raw.codec.push(key, x, y);
    assignment.emplace(key, c);
  }

  // Predictive-sufficiency precheck: pooling histories into clusters must
  // not lose next-outcome predictability. Compares H(Y | X, cluster)
  // against H(Y | X, history) over qualifying histories.
  std::vector<std::vector<MorphCell>> cluster_cells(
      p.num_clusters, std::vector<MorphCell>(raw.num_inputs));
  double h_given_history = 0.0;
  std::uint64_t morph_total = 0;
  for (const auto& [key, acc] : raw.table) {
    const auto it = assignment.find(key);
    if (it == assignment.end()) continue;
    for (std::uint64_t x : raw.observed_inputs) {
      const MorphCell& cell = acc.per_input[x];
      if (cell.total() == 0) continue;
      morph_total += cell.total();
      h_given_history +=
          static_cast<double>(cell.total()) * binary_entropy(cell.p_plus());
      cluster_cells[it->second][x].plus += cell.plus;
      cluster_cells[it->second][x].minus += cell.minus;
    }
  }
  if (morph_total == 0) {
    throw SampleSizeError("no assigned history observed in the trace");
  }
  h_given_history /= static_cast<double>(morph_total);
  double h_given_cluster = 0.0;
  for (std::uint32_t c = 0; c < p.num_clusters; ++c) {
    for (std::uint64_t x : raw.observed_inputs) {
      const MorphCell& cell = cluster_cells[c][x];
      if (cell.total() == 0) continue;
      h_given_cluster += static_cast<double>(cell.total()) *
                         binary_entropy(cell.p_plus());
    }
  }
  h_given_cluster /= static_cast<double>(morph_total);
  const double predictability_loss = h_given_cluster - h_given_history;
  if (predictability_loss > kPredictiveSufficiencyTolBits) {
    throw PreconditionError(
        "partition is not predictively sufficient: pooling loses " +
        std::to_string(predictability_loss) + " bits of next-outcome "
        "predictability");
  }

  // Empirical joint over (R_prev, X, R_next).
  JointDistribution joint(
      {"R_prev", "X", "R_next"},
      {p.num_clusters, raw.num_inputs, p.num_clusters});
  std::map<std::array<std::size_t, 3>, std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t key = 0;
  for (std::uint64_t t = 0; t < tr.size(); ++t) {
    const std::uint64_t from_key = key;
    key = raw.codec.push(key, tr.inputs[t], tr.outcomes[t]);
    if (t < raw.first_position) continue;
    const auto from_it = assignment.find(from_key);
    if (from_it == assignment.end()) continue;
    const auto to_it = assignment.find(key);
    if (to_it == assignment.end()) continue;
    ++counts[{static_cast<std::size_t>(from_it->second),
              static_cast<std::size_t>(tr.inputs[t]),
              static_cast<std::size_t>(to_it->second)}];
    ++total;
  }
  if (total == 0) {
    throw SampleSizeError("no transitions between assigned histories");
  }
  for (const auto& [cell, c] : counts) {
    joint.add_mass(cell,
                   static_cast<double>(c) / static_cast<double>(total));
  }

  const std::vector<std::string> r_next{"R_next"};
  const std::vector<std::string> x{"X"};
  const std::vector<std::string> x_rprev{"X", "R_prev"};
  PartitionErasure result;
  result.transition_entropy = conditional_entropy(joint, r_next, x_rprev);
  result.input_information = mutual_information(joint, r_next, x);
  result.total = result.transition_entropy + result.input_information;
  return result;
}

double erased_info_of_partition(const PartitionMachine& p,
                                const RedactedTrace& tr) {
  return erased_info_of_partition_detailed(p, tr).total;
}

// --- serialization ----------------------------------------------------------

namespace {

std::string format_prob17(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace

std::string serialize_partition_machine(const PartitionMachine& p) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"qerase-machine\",\n";
  out << "  \"version\": " << kFormatVersion << ",\n";
  out << "  \"n\": " << p.n << ",\n";
  out << "  \"states\": [";
  for (std::uint32_t c = 0; c < p.num_clusters; ++c) {
    if (c) out << ", ";
    out << c;
  }
  out << "],\n";
  out << "  \"transitions\": [\n";
  bool first = true;
  for (std::uint32_t c = 0; c < p.num_clusters; ++c) {
    for (std::uint64_t x = 0; x < p.num_inputs; ++x) {
      for (const KernelEntry& e : p.rows[c * p.num_inputs + x]) {
        if (!first) out << ",\n";
        first = false;
        out << "    {\"from\": " << c << ", \"input\": " << x
            << ", \"output\": " << outcome_value(e.y) << ", \"to\": " << e.to
            << ", \"prob\": " << format_prob17(e.prob) << "}";
      }
    }
  }
  out << "\n  ]\n}\n";
  return out.str();
}

void write_partition_machine_file(const PartitionMachine& p,
                                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_partition_machine(p);
  if (!out) throw IoError("write failed for " + path.string());
}

std::string serialize_comparison(const MachineComparison& c) {
  std::ostringstream out;
  out << "{\n";
  out << "  \"state_count_match\": " << (c.state_count_match ? "true" : "false")
      << ",\n";
  out << "  \"inferred_states\": " << c.inferred_states << ",\n";
  out << "  \"exact_states\": " << c.exact_states << ",\n";
  out << "  \"max_row_tv\": " << format_prob17(c.max_row_tv) << ",\n";
  out << "  \"matching\": [";
  for (std::size_t i = 0; i < c.matching.size(); ++i) {
    if (i) out << ", ";
    out << "[" << c.matching[i].first << ", " << c.matching[i].second << "]";
  }
  out << "]\n}\n";
  return out.str();
}

}  // namespace qerase
