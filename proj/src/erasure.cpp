#include "qerase/erasure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>

#include <json.hpp>

namespace qerase {

namespace {

// Entropy of the family predecessor distribution {cos^2(pi d / m) / C},
// d = 0..m-1, C = sum of the weights (analytically 2^n). The weight multiset
// is the same for every (input, successor) pair, so the value needs no pair
// argument; the exhaustive route in erased_information_direct verifies that
// for every level up to kExhaustiveCrossCheckLevel.
//
// Streams the half range d = 0..m/2 with multiplicity two in the interior
// (cos^2 is even around both 0 and m/2).
double family_predecessor_entropy(std::uint64_t m) {
  CompensatedSum weight_sum;
  CompensatedSum weighted_log_sum;  // sum of c * log2(c)
  const std::uint64_t half = m / 2;
  for (std::uint64_t d = 0; d <= half; ++d) {
    const double c = cos_sq_pi_ratio(static_cast<std::int64_t>(d), m);
    if (c <= 0.0) continue;
    const double mult = (d == 0 || d == half) ? 1.0 : 2.0;
    weight_sum.add(mult * c);
    weighted_log_sum.add(mult * c * std::log2(c));
  }
  const double total = weight_sum.value();
  return std::log2(total) - weighted_log_sum.value() / total;
}

// Same entropy through shared sin/cos evaluation: one sincos per offset in
// 0..m/4 serves the four offsets {d, m-d, m/2-d, m/2+d}. Different
// arithmetic organization from family_predecessor_entropy, used as the
// re-summation cross-check at levels past the exhaustive range.
double family_predecessor_entropy_paired(std::uint64_t m) {
  CompensatedSum weight_sum;
  CompensatedSum weighted_log_sum;
  const std::uint64_t quarter = m / 4;
  for (std::uint64_t d = 0; d <= quarter; ++d) {
    double c, s;
    if (d == 0) {
      c = 1.0;
      s = 0.0;
    } else if (d == quarter) {
      c = 0.5;
      s = 0.5;
    } else {
      const double angle =
          std::numbers::pi * static_cast<double>(d) / static_cast<double>(m);
      const double cv = std::cos(angle);
      const double sv = std::sin(angle);
      c = cv * cv;
      s = sv * sv;
    }
    // Offsets d and m-d carry cos^2; m/2-d and m/2+d carry sin^2. At d = 0
    // each group collapses to a single offset; at d = m/4 the two groups
    // coincide, so the sin^2 side is dropped.
    const double mult_c = (d == 0) ? 1.0 : 2.0;
    const double mult_s = (d == 0) ? 1.0 : (d == quarter ? 0.0 : 2.0);
    if (c > 0.0 && mult_c > 0.0) {
      weight_sum.add(mult_c * c);
      weighted_log_sum.add(mult_c * c * std::log2(c));
    }
    if (s > 0.0 && mult_s > 0.0) {
      weight_sum.add(mult_s * s);
      weighted_log_sum.add(mult_s * s * std::log2(s));
    }
  }
  const double total = weight_sum.value();
  return std::log2(total) - weighted_log_sum.value() / total;
}

// Weighted average of predecessor entropies over every (input, successor)
// pair with inbound mass, computed through the machine kernel and Bayes
// inversion. The honest route for machines of any provenance, and the
// exhaustive cross-check for family machines.
//
// Uses H({w_i / W}) = log2(W) - (sum_i w_i log2 w_i) / W per pair so that
// one kernel pass per input suffices.
double erased_information_all_pairs(const Transducer& t) {
  const std::uint64_t num_states = t.num_states();
  const std::uint64_t num_inputs = t.num_inputs();
  if (num_states * num_inputs > kMaxEnumerableRows) {
    throw SizeError("machine too large for the all-pairs erasure route");
  }
  std::vector<double> prior;
  if (t.family_exact()) {
    prior.assign(num_states, 1.0 / static_cast<double>(num_states));
  } else {
    prior = stationary_distribution(t).probs;
  }
  const double input_weight = 1.0 / static_cast<double>(num_inputs);

  CompensatedSum value;
  CompensatedSum mass_total;
  std::vector<CompensatedSum> weight(num_states);
  std::vector<CompensatedSum> weight_log(num_states);
  for (std::uint64_t x = 0; x < num_inputs; ++x) {
    std::fill(weight.begin(), weight.end(), CompensatedSum{});
    std::fill(weight_log.begin(), weight_log.end(), CompensatedSum{});
    for (std::uint64_t s = 0; s < num_states; ++s) {
      if (prior[s] <= 0.0) continue;
      for (const KernelEntry& e : t.row(s, x)) {
        const double w = prior[s] * e.prob;
        if (w <= 0.0) continue;
        weight[e.to].add(w);
        weight_log[e.to].add(w * std::log2(w));
      }
    }
    for (std::uint64_t j = 0; j < num_states; ++j) {
      const double w_total = weight[j].value();
      if (w_total <= 0.0) continue;
      const double h = std::log2(w_total) - weight_log[j].value() / w_total;
      value.add(input_weight * w_total * h);
      mass_total.add(input_weight * w_total);
    }
  }
  return value.value() / mass_total.value();
}

void require_output_determinism(const Transducer& t, const char* op) {
  if (!output_determinism_check(t)) {
    throw PreconditionError(std::string(op) +
                            " requires a machine whose current state "
                            "determines the last outcome");
  }
}

}  // namespace

double erased_information_direct(const Transducer& t) {
  require_output_determinism(t, "erased_information_direct");
  if (!t.family_exact()) {
    return erased_information_all_pairs(t);
  }
  const std::uint64_t m = t.num_states();
  const double representative = family_predecessor_entropy(m);
  const int n = *t.family_level();
  const double check = (n <= kExhaustiveCrossCheckLevel)
                           ? erased_information_all_pairs(t)
                           : family_predecessor_entropy_paired(m);
  if (std::abs(representative - check) > kRouteAgreementTol) {
    throw ConsistencyError(
        "erased information routes disagree: representative " +
        std::to_string(representative) + " vs cross-check " +
        std::to_string(check));
  }
  return representative;
}

JointDistribution one_step_joint(const Transducer& t) {
  const std::uint64_t num_states = t.num_states();
  const std::uint64_t num_inputs = t.num_inputs();
  if (num_states * num_inputs * 2 > (std::uint64_t{1} << 24)) {
    throw SizeError("one-step joint too large to materialize");
  }
  std::vector<double> prior;
  if (t.family_exact()) {
    prior.assign(num_states, 1.0 / static_cast<double>(num_states));
  } else {
    prior = stationary_distribution(t).probs;
  }
  const double input_weight = 1.0 / static_cast<double>(num_inputs);
  JointDistribution joint({"S_prev", "X", "Y", "S_next"},
                          {num_states, num_inputs, 2, num_states});
  t.for_each_entry([&](std::uint64_t s, std::uint64_t x, const KernelEntry& e) {
    const std::size_t y01 = e.y == Outcome::plus ? 1 : 0;
    const std::size_t cell[4] = {static_cast<std::size_t>(s),
                                 static_cast<std::size_t>(x), y01,
                                 static_cast<std::size_t>(e.to)};
    joint.add_mass(cell, prior[s] * input_weight * e.prob);
  });
  return joint;
}

StationarityEntropies stationarity_entropy_identities(const Transducer& t) {
  const std::uint64_t num_states = t.num_states();
  const std::uint64_t num_inputs = t.num_inputs();
  if (num_states * num_inputs > kMaxEnumerableRows) {
    throw SizeError("machine too large for stationarity checks");
  }
  const std::vector<double> prior = stationary_distribution(t).probs;
  const double input_weight = 1.0 / static_cast<double>(num_inputs);

  StationarityEntropies out;
  out.h_prev = shannon_entropy(std::span<const double>(prior));

  // One input-averaged step from the stationary vector.
  std::vector<double> successor(num_states, 0.0);
  t.for_each_entry([&](std::uint64_t s, std::uint64_t, const KernelEntry& e) {
    successor[e.to] += prior[s] * input_weight * e.prob;
  });
  out.h_next = shannon_entropy(std::span<const double>(successor));

  // H(S_prev | X = x): the joint cell mass is prior * input_weight, so the
  // per-input conditional renormalizes back to the prior; the arithmetic is
  // carried out numerically rather than assumed.
  std::vector<double> conditional(num_states);
  CompensatedSum h_given;
  for (std::uint64_t x = 0; x < num_inputs; ++x) {
    CompensatedSum mass;
    for (std::uint64_t s = 0; s < num_states; ++s) {
      conditional[s] = prior[s] * input_weight;
      mass.add(conditional[s]);
    }
    const double total = mass.value();
    for (auto& p : conditional) p /= total;
    h_given.add(input_weight *
                shannon_entropy(std::span<const double>(conditional)));
  }
  out.h_prev_given_x = h_given.value();
  return out;
}

double erased_information_decomposed(const Transducer& t) {
  require_output_determinism(t, "erased_information_decomposed");

  const bool reduced = t.family_exact() &&
                       *t.family_level() > kAnalyticLevelThreshold;
  if (!reduced) {
    const JointDistribution joint = one_step_joint(t);
    const std::vector<std::string> s_prev{"S_prev"};
    const std::vector<std::string> s_next{"S_next"};
    const std::vector<std::string> x{"X"};
    const std::vector<std::string> x_sprev{"X", "S_prev"};
    const std::vector<std::string> xy_snext{"X", "Y", "S_next"};

    const double eq1 = conditional_entropy(joint, s_prev, xy_snext);
    const double trans = conditional_entropy(joint, s_next, x_sprev);
    const double eq3 = trans + mutual_information(joint, s_next, x);
    const double eq2 = trans - conditional_entropy(joint, s_next, x) +
                       conditional_entropy(joint, s_prev, x);
    if (std::abs(eq1 - eq3) > kRouteAgreementTol ||
        std::abs(eq2 - eq3) > kRouteAgreementTol) {
      throw ConsistencyError("erased information forms disagree: " +
                             std::to_string(eq1) + " / " + std::to_string(eq2) +
                             " / " + std::to_string(eq3));
    }
    return eq3;
  }

  // Symmetry-reduced evaluation for large family machines. The offset
  // between a state and an input's eigenstate is uniform over all residues
  // when (state, input) is uniform, so the transition entropy averages the
  // binary entropy of cos^2 over one period.
  const std::uint64_t m = t.num_states();
  const double num_states_d = static_cast<double>(m);
  CompensatedSum h_trans_sum;
  const std::uint64_t half = m / 2;
  for (std::uint64_t d = 0; d <= half; ++d) {
    const double c = cos_sq_pi_ratio(static_cast<std::int64_t>(d), m);
    const double mult = (d == 0 || d == half) ? 1.0 : 2.0;
    h_trans_sum.add(mult * binary_entropy(c));
  }
  const double h_trans = h_trans_sum.value() / num_states_d;

  // P(S_next = eigenstate(+1) | X = x) at stationarity, evaluated
  // numerically for two inputs a quarter-turn apart.
  const auto eigen_mass = [&](std::uint64_t input) {
    CompensatedSum q;
    for (std::uint64_t i = 0; i < m; ++i) {
      q.add(cos_sq_pi_ratio(static_cast<std::int64_t>(input) -
                                static_cast<std::int64_t>(i),
                            m) /
            num_states_d);
    }
    return q.value();
  };
  const double q0 = eigen_mass(0);
  const double q1 = eigen_mass(t.num_inputs() / 2);
  if (std::abs(q0 - q1) > kRouteAgreementTol) {
    throw ConsistencyError("per-input successor masses disagree");
  }
  const double h_next_given_x = binary_entropy(q0);

  // Stationary state marginal is uniform (translation symmetry of the
  // kernel); H(S_next) = H(S_prev | X) = log2(m).
  const double h_states = std::log2(num_states_d);

  const double eq3 = h_trans + (h_states - h_next_given_x);
  const double eq2 = h_trans - h_next_given_x + h_states;
  const double eq1 = erased_information_direct(t);
  if (std::abs(eq1 - eq3) > kRouteAgreementTol ||
      std::abs(eq2 - eq3) > kRouteAgreementTol) {
    throw ConsistencyError("erased information forms disagree: " +
                           std::to_string(eq1) + " / " + std::to_string(eq2) +
                           " / " + std::to_string(eq3));
  }
  return eq3;
}

std::vector<SweepRow> erased_scaling_sweep(int n_max, double temperature_kelvin) {
  if (n_max < 1) throw ValidationError("sweep needs n_max >= 1");
  if (n_max > kMaxLevel) {
    throw SizeError("sweep cap is n_max = " + std::to_string(kMaxLevel));
  }
  if (temperature_kelvin < 0.0) {
    throw ValidationError("temperature must be non-negative");
  }

  std::vector<std::future<double>> futures;
  futures.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    futures.push_back(std::async(std::launch::async, [n] {
      const Transducer t = build_exact(MeasurementFamily(n));
      return erased_information_direct(t);
    }));
  }

  std::vector<SweepRow> rows;
  rows.reserve(n_max);
  double previous = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double erased = futures[n - 1].get();
    if (erased <= static_cast<double>(n)) {
      throw ConsistencyError("erased information at level " + std::to_string(n) +
                             " is not above n");
    }
    if (erased <= previous) {
      throw ConsistencyError("erased information not increasing at level " +
                             std::to_string(n));
    }
    previous = erased;
    rows.push_back({n, erased, erased - static_cast<double>(n),
                    landauer_heat_bound(erased, temperature_kelvin)});
  }
  return rows;
}

namespace {

std::string json_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_erasure_report(const ErasureReport& r) {
  std::string out = "{\n";
  out += "  \"n\": " + std::to_string(r.n) + ",\n";
  out += "  \"erased_bits\": " + json_double(r.erased_bits) + ",\n";
  if (r.has_decomposed) {
    out += "  \"erased_bits_decomposed\": " + json_double(r.erased_bits_decomposed) + ",\n";
  }
  out += "  \"temperature_K\": " + json_double(r.temperature_kelvin) + ",\n";
  out += "  \"heat_bound_J\": " + json_double(r.heat_bound_joules) + ",\n";
  out += std::string("  \"third_law_caveat\": ") +
         (r.third_law_caveat ? "true" : "false") + "\n";
  out += "}\n";
  return out;
}

ErasureReport parse_erasure_report(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("erasure report is not valid JSON: ") +
                      e.what());
  }
  try {
    ErasureReport r;
    r.n = doc.at("n").get<int>();
    r.erased_bits = doc.at("erased_bits").get<double>();
    if (doc.contains("erased_bits_decomposed")) {
      r.has_decomposed = true;
      r.erased_bits_decomposed = doc.at("erased_bits_decomposed").get<double>();
    }
    r.temperature_kelvin = doc.at("temperature_K").get<double>();
    r.heat_bound_joules = doc.at("heat_bound_J").get<double>();
    r.third_law_caveat = doc.at("third_law_caveat").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("erasure report malformed: ") + e.what());
  }
}

}  // namespace qerase
