#include "qerase/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qerase/rng.hpp"
#include "qerase/version.hpp"

namespace qerase {

Trace simulate(const SimulationConfig& cfg) {
  if (cfg.steps < 1) {
    throw ValidationError("simulation needs at least one step");
  }
  check_state(cfg.family, cfg.initial_state);
  if (cfg.forced_input) {
    check_observable(cfg.family, Observable{*cfg.forced_input});
  }

  Trace tr;
  tr.n = cfg.family.n;
  tr.seed = cfg.seed;
  tr.initial_state = cfg.initial_state.j;
  tr.inputs.reserve(cfg.steps);
  tr.outcomes.reserve(cfg.steps);
  tr.states.reserve(cfg.steps);

  CounterRng rng(cfg.seed);
  const std::uint64_t num_inputs = cfg.family.num_observables();
  StateIndex state = cfg.initial_state;
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const Observable x{cfg.forced_input ? *cfg.forced_input
                                        : rng.next_below(num_inputs)};
    const double p_plus = outcome_probability(cfg.family, state, x, Outcome::plus);
    const Outcome y = rng.next_bernoulli(p_plus) ? Outcome::plus : Outcome::minus;
    state = collapse(cfg.family, x, y);
    tr.inputs.push_back(static_cast<std::uint32_t>(x.k));
    tr.outcomes.push_back(y);
    tr.states.push_back(static_cast<std::uint32_t>(state.j));
  }
  return tr;
}

RedactedTrace redact(const Trace& tr) {
  RedactedTrace r;
  r.n = tr.n;
  r.seed = tr.seed;
  r.inputs = tr.inputs;
  r.outcomes = tr.outcomes;
  return r;
}

namespace {

// Transitions need an in-trace predecessor; kBurnInSteps >= 1 guarantees
// record t-1 exists for every post-burn-in step t.
static_assert(kBurnInSteps >= 1);

void require_post_burn_in(const Trace& tr) {
  if (tr.size() <= kBurnInSteps) {
    throw SampleSizeError("trace of " + std::to_string(tr.size()) +
                          " steps has no records past the burn-in of " +
                          std::to_string(kBurnInSteps));
  }
}

}  // namespace

double flip_fraction(const Trace& tr) {
  require_post_burn_in(tr);
  const std::uint64_t begin = kBurnInSteps;
  std::uint64_t flips = 0;
  std::uint64_t total = 0;
  for (std::uint64_t t = begin; t < tr.size(); ++t) {
    flips += tr.states[t] != tr.states[t - 1];
    ++total;
  }
  if (total == 0) {
    throw SampleSizeError("no transitions past burn-in");
  }
  return static_cast<double>(flips) / static_cast<double>(total);
}

namespace {

Distribution counts_to_distribution(const std::map<std::uint64_t, std::uint64_t>& counts,
                                    std::uint64_t total) {
  Distribution d;
  d.labels.reserve(counts.size());
  d.probs.reserve(counts.size());
  for (const auto& [label, c] : counts) {
    d.labels.push_back(label);
    d.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  return d;
}

}  // namespace

Distribution state_occupancy(const Trace& tr) {
  require_post_burn_in(tr);
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (std::uint64_t t = kBurnInSteps; t < tr.size(); ++t) {
    ++counts[tr.states[t]];
    ++total;
  }
  return counts_to_distribution(counts, total);
}

Distribution input_frequencies(const Trace& tr) {
  require_post_burn_in(tr);
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (std::uint64_t t = kBurnInSteps; t < tr.size(); ++t) {
    ++counts[tr.inputs[t]];
    ++total;
  }
  return counts_to_distribution(counts, total);
}

Distribution empirical_predecessor_distribution(const Trace& tr,
                                                std::uint64_t x,
                                                std::uint64_t s_target) {
  require_post_burn_in(tr);
  const MeasurementFamily family(tr.n);
  check_observable(family, Observable{x});
  check_state(family, StateIndex{s_target});

  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (std::uint64_t t = kBurnInSteps; t < tr.size(); ++t) {
    if (tr.inputs[t] == x && tr.states[t] == s_target) {
      ++counts[tr.states[t - 1]];
      ++total;
    }
  }
  if (total < kMinCellSamples) {
    throw SampleSizeError("only " + std::to_string(total) +
                          " qualifying transitions for input " +
                          std::to_string(x) + ", target " +
                          std::to_string(s_target) + " (need " +
                          std::to_string(kMinCellSamples) + ")");
  }
  return counts_to_distribution(counts, total);
}

ErasedEstimate empirical_erased_information_detailed(const Trace& tr) {
  require_post_burn_in(tr);

  // Cells are (input, post-state); within each cell the predecessor states
  // are tallied.
  std::map<std::pair<std::uint64_t, std::uint64_t>,
           std::map<std::uint64_t, std::uint64_t>>
      cells;
  std::uint64_t total = 0;
  for (std::uint64_t t = kBurnInSteps; t < tr.size(); ++t) {
    ++cells[{tr.inputs[t], tr.states[t]}][tr.states[t - 1]];
    ++total;
  }

  std::string deficient;
  for (const auto& [cell, preds] : cells) {
    std::uint64_t cell_total = 0;
    for (const auto& [pred, c] : preds) cell_total += c;
    if (cell_total < kMinCellSamples) {
      if (!deficient.empty()) deficient += ", ";
      deficient += "(x=" + std::to_string(cell.first) +
                   ", s=" + std::to_string(cell.second) +
                   ": " + std::to_string(cell_total) + ")";
    }
  }
  if (!deficient.empty()) {
    throw SampleSizeError("cells below " + std::to_string(kMinCellSamples) +
                          " qualifying transitions: " + deficient);
  }

  const double ln2 = std::log(2.0);
  CompensatedSum value;
  CompensatedSum bias;
  double variance = 0.0;
  for (const auto& [cell, preds] : cells) {
    std::uint64_t cell_total = 0;
    for (const auto& [pred, c] : preds) cell_total += c;
    const double cell_n = static_cast<double>(cell_total);
    const double w = cell_n / static_cast<double>(total);

    CompensatedSum h;
    double second_moment = 0.0;
    for (const auto& [pred, c] : preds) {
      const double p = static_cast<double>(c) / cell_n;
      const double lg = std::log2(p);
      h.add(-p * lg);
      second_moment += p * lg * lg;
    }
    const double h_cell = h.value();
    value.add(w * h_cell);
    // Miller-Madow first-order bias of the plug-in entropy.
    bias.add(w * static_cast<double>(preds.size() - 1) / (2.0 * cell_n * ln2));
    // Per-sample variance of -log2 p, propagated through the cell weight.
    variance += w * w * std::max(second_moment - h_cell * h_cell, 0.0) / cell_n;
  }

  ErasedEstimate est;
  est.bits = value.value();
  est.bias_bound = bias.value();
  est.std_error = std::sqrt(variance);
  return est;
}

double empirical_erased_information(const Trace& tr) {
  return empirical_erased_information_detailed(tr).bits;
}

// --- trace files -------------------------------------------------------------

void write_trace_file(const Trace& tr, const std::filesystem::path& path,
                      bool redacted) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out << "# qerase-trace format=" << kFormatVersion << " version=" << kVersion
      << " n=" << tr.n << " seed=" << tr.seed << " steps=" << tr.size()
      << " initial_state=" << tr.initial_state
      << " redacted=" << (redacted ? 1 : 0) << "\n";
  out << (redacted ? "t,x,y\n" : "t,x,y,s\n");

  std::string line;
  line.reserve(64);
  for (std::uint64_t t = 0; t < tr.size(); ++t) {
    line.clear();
    line += std::to_string(t);
    line += ',';
    line += std::to_string(tr.inputs[t]);
    line += ',';
    line += outcome_value(tr.outcomes[t]) > 0 ? "+1" : "-1";
    if (!redacted) {
      line += ',';
      line += std::to_string(tr.states[t]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

struct TraceHeader {
  int n = 0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t initial_state = 0;
  bool redacted = false;
};

TraceHeader parse_trace_header(const std::string& line) {
  if (line.rfind("# qerase-trace", 0) != 0) {
    throw SchemaError("missing trace header line");
  }
  TraceHeader h;
  bool saw_n = false;
  std::istringstream in(line.substr(std::strlen("# qerase-trace")));
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "n") {
        h.n = std::stoi(value);
        saw_n = true;
      } else if (key == "seed") {
        h.seed = std::stoull(value);
      } else if (key == "steps") {
        h.steps = std::stoull(value);
      } else if (key == "initial_state") {
        h.initial_state = std::stoull(value);
      } else if (key == "redacted") {
        h.redacted = value == "1";
      }
    } catch (const std::exception&) {
      throw SchemaError("bad trace header field: " + token);
    }
  }
  if (!saw_n) throw SchemaError("trace header lacks n");
  return h;
}

int parse_outcome_token(const std::string& tok) {
  if (tok == "+1" || tok == "1") return +1;
  if (tok == "-1") return -1;
  throw SchemaError("bad outcome token '" + tok + "'");
}

template <typename Consume>
void read_trace_lines(const std::filesystem::path& path, TraceHeader& header,
                      bool need_states, Consume&& consume) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty trace file");
  header = parse_trace_header(line);
  if (header.n < 1 || header.n > kMaxLevel) {
    throw SchemaError("trace header level out of range: " +
                      std::to_string(header.n));
  }
  const std::uint64_t num_inputs = std::uint64_t{1} << header.n;
  const std::uint64_t num_states = std::uint64_t{1} << (header.n + 1);
  if (need_states && header.redacted) {
    throw SchemaError("trace file " + path.string() +
                      " is redacted; ground-truth states unavailable");
  }
  if (!std::getline(in, line)) throw SchemaError("missing column header");
  const std::string expect = header.redacted ? "t,x,y" : "t,x,y,s";
  if (line != expect) {
    throw SchemaError("unexpected column header '" + line + "'");
  }

  std::uint64_t expected_t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<std::string, 4> field;
    std::size_t nfields = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (nfields >= field.size()) throw SchemaError("too many columns");
        field[nfields++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    const std::size_t want = header.redacted ? 3 : 4;
    if (nfields != want) {
      throw SchemaError("expected " + std::to_string(want) + " columns, got " +
                        std::to_string(nfields));
    }
    try {
      const std::uint64_t t = std::stoull(field[0]);
      if (t != expected_t) throw SchemaError("non-sequential step index");
      ++expected_t;
      const std::uint64_t x = std::stoull(field[1]);
      const int y = parse_outcome_token(field[2]);
      const std::uint64_t s = header.redacted ? 0 : std::stoull(field[3]);
      if (x >= num_inputs || s >= num_states) {
        throw SchemaError("record out of range for level " +
                          std::to_string(header.n) + ": '" + line + "'");
      }
      consume(x, y, s);
    } catch (const SchemaError&) {
      throw;
    } catch (const std::exception&) {
      throw SchemaError("bad trace record '" + line + "'");
    }
  }
  if (expected_t != header.steps) {
    throw SchemaError("trace has " + std::to_string(expected_t) +
                      " records but header declares " +
                      std::to_string(header.steps));
  }
}

}  // namespace

Trace read_trace_file(const std::filesystem::path& path) {
  TraceHeader header;
  Trace tr;
  read_trace_lines(path, header, /*need_states=*/true,
                   [&](std::uint64_t x, int y, std::uint64_t s) {
                     tr.inputs.push_back(static_cast<std::uint32_t>(x));
                     tr.outcomes.push_back(outcome_from_value(y));
                     tr.states.push_back(static_cast<std::uint32_t>(s));
                   });
  tr.n = header.n;
  tr.seed = header.seed;
  tr.initial_state = header.initial_state;
  return tr;
}

RedactedTrace read_redacted_trace_file(const std::filesystem::path& path) {
  TraceHeader header;
  RedactedTrace tr;
  read_trace_lines(path, header, /*need_states=*/false,
                   [&](std::uint64_t x, int y, std::uint64_t) {
                     tr.inputs.push_back(static_cast<std::uint32_t>(x));
                     tr.outcomes.push_back(outcome_from_value(y));
                   });
  tr.n = header.n;
  tr.seed = header.seed;
  return tr;
}

}  // namespace qerase
