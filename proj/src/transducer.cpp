#include "qerase/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qerase/version.hpp"

namespace qerase {

namespace {

// Largest table of per-offset cos^2 weights we keep resident.
constexpr std::uint64_t kMaxWeightTable = std::uint64_t{1} << 20;

// Largest machine a serialized document may describe.
constexpr std::uint64_t kMaxSerializableRows = std::uint64_t{1} << 20;

}  // namespace

double Transducer::family_weight(std::uint64_t d) const {
  if (!cos2_.empty()) return cos2_[d];
  return cos_sq_pi_ratio(static_cast<std::int64_t>(d), num_states_);
}

Transducer Transducer::exact(const MeasurementFamily& family,
                             bool force_explicit) {
  Transducer t;
  t.num_states_ = family.num_states();
  t.num_inputs_ = family.num_observables();
  t.family_level_ = family.n;
  t.family_exact_ = true;
  t.analytic_ = true;
  if (t.num_states_ <= kMaxWeightTable) {
    t.cos2_.resize(t.num_states_);
    for (std::uint64_t d = 0; d < t.num_states_; ++d) {
      t.cos2_[d] = cos_sq_pi_ratio(static_cast<std::int64_t>(d), t.num_states_);
    }
  }
  if (force_explicit || family.n <= kAnalyticLevelThreshold) {
    // Materialized rows cost ~50 bytes each; stay well under the
    // enumeration cap.
    if (t.num_states_ * t.num_inputs_ > (std::uint64_t{1} << 20)) {
      throw SizeError("level " + std::to_string(family.n) +
                      " too large for explicit kernel materialization");
    }
    std::vector<KernelRow> rows(t.num_states_ * t.num_inputs_);
    for (std::uint64_t s = 0; s < t.num_states_; ++s) {
      for (std::uint64_t x = 0; x < t.num_inputs_; ++x) {
        rows[s * t.num_inputs_ + x] = t.row(s, x);
      }
    }
    t.rows_ = std::move(rows);
    t.analytic_ = false;
    t.cos2_.clear();
  }
  return t;
}

Transducer Transducer::from_rows(std::uint64_t num_states,
                                 std::uint64_t num_inputs,
                                 std::vector<KernelRow> rows,
                                 std::optional<int> family_level,
                                 double row_sum_tol) {
  if (num_states == 0 || num_inputs == 0) {
    throw ValidationError("machine needs at least one state and one input");
  }
  if (rows.size() != num_states * num_inputs) {
    throw ValidationError("row count " + std::to_string(rows.size()) +
                          " does not cover every (state, input) pair");
  }
  for (std::uint64_t s = 0; s < num_states; ++s) {
    for (std::uint64_t x = 0; x < num_inputs; ++x) {
      auto& row = rows[s * num_inputs + x];
      if (row.empty()) {
        throw ValidationError("empty kernel row for state " + std::to_string(s) +
                              ", input " + std::to_string(x));
      }
      CompensatedSum sum;
      for (auto& e : row) {
        if (e.to >= num_states) {
          throw ValidationError("kernel successor out of range");
        }
        if (e.prob < 0.0) {
          throw ValidationError("negative kernel probability");
        }
        sum.add(e.prob);
      }
      if (std::abs(sum.value() - 1.0) > row_sum_tol) {
        throw ValidationError("kernel row (" + std::to_string(s) + ", " +
                              std::to_string(x) + ") sums to " +
                              std::to_string(sum.value()));
      }
      std::sort(row.begin(), row.end(), [](const KernelEntry& a, const KernelEntry& b) {
        if (a.to != b.to) return a.to < b.to;
        return outcome_value(a.y) < outcome_value(b.y);
      });
    }
  }
  Transducer t;
  t.num_states_ = num_states;
  t.num_inputs_ = num_inputs;
  t.family_level_ = family_level;
  t.rows_ = std::move(rows);
  return t;
}

KernelRow Transducer::row(std::uint64_t state, std::uint64_t input) const {
  if (state >= num_states_ || input >= num_inputs_) {
    throw ValidationError("kernel row index out of range");
  }
  if (!analytic_) return rows_[state * num_inputs_ + input];

  const std::uint64_t m = num_states_;
  const std::uint64_t mask = m - 1;  // m is a power of two
  KernelRow row;
  const double p_plus = family_weight((input + m - state) & mask);
  if (p_plus > 0.0) row.push_back({input, Outcome::plus, p_plus});
  const std::uint64_t to_minus = (input + num_inputs_) & mask;
  const double p_minus = family_weight((to_minus + m - state) & mask);
  if (p_minus > 0.0) row.push_back({to_minus, Outcome::minus, p_minus});
  return row;
}

Transducer build_exact(const MeasurementFamily& family) {
  return Transducer::exact(family);
}

Distribution stationary_distribution(const Transducer& t,
                                     const StationaryOptions& opts) {
  const std::uint64_t num_states = t.num_states();
  const std::uint64_t num_inputs = t.num_inputs();
  if (num_states * num_inputs > kMaxEnumerableRows) {
    throw SizeError("machine too large for power iteration");
  }
  std::vector<double> pi;
  if (opts.start) {
    pi = *opts.start;
    if (pi.size() != num_states) {
      throw ValidationError("start vector size mismatch");
    }
  } else {
    pi.assign(num_states, 1.0 / static_cast<double>(num_states));
  }
  std::vector<double> next(num_states);
  const double input_weight = 1.0 / static_cast<double>(num_inputs);
  for (std::uint64_t iter = 0; iter < opts.max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    t.for_each_entry([&](std::uint64_t s, std::uint64_t, const KernelEntry& e) {
      next[e.to] += pi[s] * input_weight * e.prob;
    });
    double tv = 0.0;
    for (std::uint64_t j = 0; j < num_states; ++j) {
      tv += std::abs(next[j] - pi[j]);
    }
    tv *= 0.5;
    pi.swap(next);
    if (tv < opts.tolerance) {
      Distribution d;
      d.labels.resize(num_states);
      for (std::uint64_t j = 0; j < num_states; ++j) d.labels[j] = j;
      d.probs = std::move(pi);
      return d;
    }
  }
  throw ConvergenceError("power iteration did not reach " +
                         std::to_string(opts.tolerance) + " within " +
                         std::to_string(opts.max_iterations) + " iterations");
}

double statistical_complexity(const Transducer& t) {
  return shannon_entropy(stationary_distribution(t));
}

Distribution predecessor_distribution(const Transducer& t, std::uint64_t input,
                                      std::uint64_t target_state) {
  const std::uint64_t num_states = t.num_states();
  if (input >= t.num_inputs()) {
    throw ValidationError("input index out of range");
  }
  if (target_state >= num_states) {
    throw ValidationError("target state out of range");
  }
  if (num_states > (std::uint64_t{1} << 22)) {
    throw SizeError("predecessor distribution too large to materialize");
  }

  // The family kernel is doubly stochastic under input averaging, so the
  // exact stationary prior is uniform; machines of unknown provenance get
  // the power-iterated prior instead.
  std::vector<double> prior;
  if (t.family_exact()) {
    prior.assign(num_states, 1.0 / static_cast<double>(num_states));
  } else {
    prior = stationary_distribution(t).probs;
  }

  std::vector<double> weight(num_states, 0.0);
  CompensatedSum total;
  for (std::uint64_t s = 0; s < num_states; ++s) {
    for (const KernelEntry& e : t.row(s, input)) {
      if (e.to == target_state && e.prob > 0.0) {
        weight[s] += prior[s] * e.prob;
      }
    }
    if (weight[s] > 0.0) total.add(weight[s]);
  }
  const double mass = total.value();
  if (mass <= 0.0) {
    throw UnreachableTargetError("state " + std::to_string(target_state) +
                                 " is unreachable under input " +
                                 std::to_string(input));
  }
  Distribution d;
  d.labels.resize(num_states);
  d.probs.resize(num_states);
  for (std::uint64_t s = 0; s < num_states; ++s) {
    d.labels[s] = s;
    d.probs[s] = weight[s] / mass;
  }
  return d;
}

bool output_determinism_check(const Transducer& t) {
  const std::uint64_t num_states = t.num_states();
  const std::uint64_t num_inputs = t.num_inputs();
  if (num_states * num_inputs <= kMaxEnumerableRows) {
    std::vector<std::uint8_t> seen(num_states * num_inputs, 0);
    bool deterministic = true;
    t.for_each_entry([&](std::uint64_t, std::uint64_t x, const KernelEntry& e) {
      if (e.prob <= 0.0) return;
      std::uint8_t& mark = seen[x * num_states + e.to];
      mark |= (e.y == Outcome::plus) ? 1 : 2;
      if (mark == 3) deterministic = false;
    });
    return deterministic;
  }
  if (t.analytic()) {
    // Closed-form rows assign outcome +1 exactly to successor == input and
    // -1 to successor == input + 2^n, so no (input, successor) pair admits
    // two outcomes. The enumeration above covers every level within the
    // row cap; this branch only serves levels past it.
    return true;
  }
  throw SizeError("machine too large for determinism enumeration");
}

// --- serialization ---------------------------------------------------------

namespace {

std::string format_prob(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

}  // namespace

std::string serialize_machine(const Transducer& t) {
  if (!t.family_level()) {
    throw SchemaError("machine carries no level tag; refusing to serialize");
  }
  if (t.num_states() * t.num_inputs() > kMaxSerializableRows) {
    throw SizeError("machine too large to serialize");
  }
  std::ostringstream out;
  out << "{\n";
  out << "  \"format\": \"qerase-machine\",\n";
  out << "  \"version\": " << kFormatVersion << ",\n";
  out << "  \"n\": " << *t.family_level() << ",\n";
  out << "  \"states\": [";
  for (std::uint64_t s = 0; s < t.num_states(); ++s) {
    if (s) out << ", ";
    out << s;
  }
  out << "],\n";
  out << "  \"transitions\": [\n";
  bool first = true;
  for (std::uint64_t s = 0; s < t.num_states(); ++s) {
    for (std::uint64_t x = 0; x < t.num_inputs(); ++x) {
      for (const KernelEntry& e : t.row(s, x)) {
        if (!first) out << ",\n";
        first = false;
        out << "    {\"from\": " << s << ", \"input\": " << x
            << ", \"output\": " << outcome_value(e.y) << ", \"to\": " << e.to
            << ", \"prob\": " << format_prob(e.prob) << "}";
      }
    }
  }
  out << "\n  ]\n}\n";
  return out.str();
}

Transducer parse_machine(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("machine document is not valid JSON: ") +
                      e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("states") ||
        !doc.contains("transitions")) {
      throw SchemaError("machine document missing n/states/transitions");
    }
    const int n = doc.at("n").get<int>();
    if (n < 1 || n > kMaxLevel) {
      throw SchemaError("machine level out of range: " + std::to_string(n));
    }
    const std::uint64_t num_inputs = std::uint64_t{1} << n;

    std::vector<std::uint64_t> states =
        doc.at("states").get<std::vector<std::uint64_t>>();
    if (states.empty()) throw SchemaError("machine has no states");
    std::sort(states.begin(), states.end());
    for (std::uint64_t i = 0; i < states.size(); ++i) {
      if (states[i] != i) {
        throw SchemaError("state ids must be exactly 0..S-1");
      }
    }
    const std::uint64_t num_states = states.size();
    if (num_states * num_inputs > kMaxSerializableRows) {
      throw SchemaError("machine document describes too large a machine");
    }

    std::vector<KernelRow> rows(num_states * num_inputs);
    for (const auto& tr : doc.at("transitions")) {
      const auto from = tr.at("from").get<std::uint64_t>();
      const auto input = tr.at("input").get<std::uint64_t>();
      const auto output = tr.at("output").get<int>();
      const auto to = tr.at("to").get<std::uint64_t>();
      const auto prob = tr.at("prob").get<double>();
      if (from >= num_states || to >= num_states) {
        throw SchemaError("transition references unknown state");
      }
      if (input >= num_inputs) {
        throw SchemaError("transition input out of range");
      }
      if (prob < -kProbabilityTol || prob > 1.0 + 1e-9) {
        throw SchemaError("transition probability out of range");
      }
      if (prob <= 0.0) continue;
      rows[from * num_inputs + input].push_back(
          {to, outcome_from_value(output), prob});
    }
    try {
      return Transducer::from_rows(num_states, num_inputs, std::move(rows), n,
                                   1e-9);
    } catch (const ValidationError& e) {
      throw SchemaError(std::string("machine document invalid: ") + e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("machine document malformed: ") + e.what());
  }
}

void write_machine_file(const Transducer& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_machine(t);
  if (!out) throw IoError("write failed for " + path.string());
}

Transducer read_machine_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_machine(buf.str());
}

}  // namespace qerase
