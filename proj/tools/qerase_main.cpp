// qerase -- command-line front end.
//
// Subcommands: exact, simulate, infer, sweep, landauer. Exit codes:
//   0 success
//   2 validation failure (bad flags, ranges, caps, malformed documents)
//   3 sample-size failure (estimators without enough qualifying data)
//   4 internal consistency failure (independent routes disagree)
//   5 I/O failure

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qerase/erasure.hpp"
#include "qerase/inference.hpp"
#include "qerase/simulate.hpp"
#include "qerase/transducer.hpp"
#include "qerase/version.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSampleSize = 3;
constexpr int kExitConsistency = 4;
constexpr int kExitIo = 5;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw qerase::IoError("cannot open " + out_path + " for writing");
  out << text;
  if (!out) throw qerase::IoError("write failed for " + out_path);
}

std::string report_csv(const qerase::ErasureReport& r) {
  std::string text = "n,erased_bits";
  if (r.has_decomposed) text += ",erased_bits_decomposed";
  text += ",temperature_K,heat_bound_J,third_law_caveat\n";
  text += std::to_string(r.n) + "," + fmt17(r.erased_bits);
  if (r.has_decomposed) text += "," + fmt17(r.erased_bits_decomposed);
  text += "," + fmt17(r.temperature_kelvin) + "," + fmt17(r.heat_bound_joules);
  text += std::string(",") + (r.third_law_caveat ? "true" : "false") + "\n";
  return text;
}

int cmd_exact(int n, double temperature, const std::string& format,
              const std::string& out_path) {
  const qerase::Transducer machine =
      qerase::build_exact(qerase::MeasurementFamily(n));
  const double direct = qerase::erased_information_direct(machine);
  const double decomposed = qerase::erased_information_decomposed(machine);
  if (std::abs(direct - decomposed) > qerase::kRouteAgreementTol) {
    throw qerase::ConsistencyError(
        "direct and decomposed erased information disagree: " +
        fmt17(direct) + " vs " + fmt17(decomposed));
  }
  qerase::ErasureReport report =
      qerase::make_erasure_report(n, direct, temperature);
  report.has_decomposed = true;
  report.erased_bits_decomposed = decomposed;
  emit(format == "csv" ? report_csv(report)
                       : qerase::serialize_erasure_report(report),
       out_path);
  return 0;
}

int cmd_simulate(int n, std::uint64_t steps, std::uint64_t seed,
                 std::uint64_t initial_state, const std::string& out_path,
                 bool redacted) {
  qerase::SimulationConfig cfg{qerase::MeasurementFamily(n), steps, seed,
                               qerase::StateIndex{initial_state},
                               std::nullopt};
  const qerase::Trace trace = qerase::simulate(cfg);
  qerase::write_trace_file(trace, out_path, redacted);

  std::cout << "wrote " << trace.size() << " records to " << out_path
            << (redacted ? " (redacted)" : "") << "\n";
  if (trace.size() > qerase::kBurnInSteps) {
    std::cout << "flip fraction (post burn-in): "
              << fmt_short(qerase::flip_fraction(trace)) << "\n";
    const qerase::Distribution occ = qerase::state_occupancy(trace);
    if (cfg.family.num_states() <= 16) {
      std::cout << "state occupancy:";
      for (std::size_t i = 0; i < occ.labels.size(); ++i) {
        std::cout << " s" << occ.labels[i] << "=" << fmt_short(occ.probs[i]);
      }
      std::cout << "\n";
    } else {
      double max_dev = 0.0;
      const double uniform = 1.0 / static_cast<double>(cfg.family.num_states());
      for (double p : occ.probs) max_dev = std::max(max_dev, std::abs(p - uniform));
      std::cout << "state occupancy: max deviation from uniform "
                << fmt_short(max_dev) << "\n";
    }
  } else {
    std::cout << "trace shorter than burn-in (" << qerase::kBurnInSteps
              << "); no summary statistics\n";
  }
  return 0;
}

int cmd_infer(const std::string& trace_path, std::size_t history_length,
              double tol, std::uint64_t min_count, const std::string& out_path,
              const std::string& report_path) {
  const qerase::RedactedTrace trace =
      qerase::read_redacted_trace_file(trace_path);
  const qerase::PartitionMachine machine =
      qerase::reconstruct(trace, history_length, tol, min_count);
  qerase::write_partition_machine_file(machine, out_path);
  std::cout << "inferred " << machine.num_clusters << " states from "
            << trace.size() << " records; machine written to " << out_path
            << "\n";

  // The trace header always carries n, so the exact machine is available
  // for comparison.
  const qerase::Transducer exact =
      qerase::build_exact(qerase::MeasurementFamily(trace.n));
  const qerase::MachineComparison cmp = qerase::compare_machines(machine, exact);
  const std::string report = qerase::serialize_comparison(cmp);
  if (report_path.empty()) {
    std::cout << report;
  } else {
    emit(report, report_path);
    std::cout << "comparison written to " << report_path << "\n";
  }
  return 0;
}

int cmd_sweep(int n_max, double temperature, const std::string& format,
              const std::string& out_path) {
  const std::vector<qerase::SweepRow> rows =
      qerase::erased_scaling_sweep(n_max, temperature);
  std::string text;
  if (format == "json") {
    text += "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      text += "  {\"n\": " + std::to_string(rows[i].n) +
              ", \"erased_bits\": " + fmt17(rows[i].erased_bits) +
              ", \"excess_over_n\": " + fmt17(rows[i].excess_over_n) +
              ", \"heat_bound_J\": " + fmt17(rows[i].heat_bound_joules) + "}";
      text += (i + 1 < rows.size()) ? ",\n" : "\n";
    }
    text += "]\n";
  } else {
    text = "n,erased_bits,excess_over_n,heat_bound_J\n";
    for (const auto& row : rows) {
      text += std::to_string(row.n) + "," + fmt17(row.erased_bits) + "," +
              fmt17(row.excess_over_n) + "," + fmt17(row.heat_bound_joules) +
              "\n";
    }
  }
  emit(text, out_path);
  return 0;
}

int cmd_landauer(double bits, double temperature, const std::string& format,
                 const std::string& out_path) {
  const double heat = qerase::landauer_heat_bound(bits, temperature);
  std::string text;
  if (format == "csv") {
    text = "erased_bits,temperature_K,heat_bound_J,third_law_caveat\n";
    text += fmt17(bits) + "," + fmt17(temperature) + "," + fmt17(heat) +
            std::string(",") + (temperature == 0.0 ? "true" : "false") + "\n";
  } else {
    text = "{\n  \"erased_bits\": " + fmt17(bits) +
           ",\n  \"temperature_K\": " + fmt17(temperature) +
           ",\n  \"heat_bound_J\": " + fmt17(heat) +
           ",\n  \"third_law_caveat\": " +
           (temperature == 0.0 ? "true" : "false") + "\n}\n";
  }
  emit(text, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact predictive-machine construction, erased-information "
               "accounting, and Monte Carlo validation for sequentially "
               "measured qubits"};
  app.set_version_flag("--version", std::string(qerase::kVersion));
  app.require_subcommand(1);

  // exact
  auto* exact = app.add_subcommand(
      "exact", "Build the exact machine and report erased bits + heat bound");
  int exact_n = 1;
  double exact_temp = 300.0;
  std::string exact_format = "json";
  std::string exact_out;
  exact->add_option("--n", exact_n, "Discretization level")->required();
  auto* exact_temp_opt =
      exact->add_option("--temperature", exact_temp,
                        "Temperature in kelvin (default 300, reported in output)");
  exact->add_option("--format", exact_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  exact->add_option("--out", exact_out, "Output path (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a Monte Carlo trace under uniform random inputs");
  int sim_n = 1;
  std::uint64_t sim_steps = 0;
  std::uint64_t sim_seed = 0;
  std::uint64_t sim_initial = 0;
  std::string sim_out;
  bool sim_redact = false;
  simulate->add_option("--n", sim_n, "Discretization level")->required();
  simulate->add_option("--steps", sim_steps, "Number of measurements")->required();
  simulate->add_option("--seed", sim_seed, "Generator seed (default 0)");
  simulate->add_option("--initial-state", sim_initial,
                       "Starting state index (default 0)");
  simulate->add_option("--out", sim_out, "Trace file path")->required();
  simulate->add_flag("--redact", sim_redact,
                     "Omit the ground-truth state column");

  // infer
  auto* infer = app.add_subcommand(
      "infer", "Reconstruct a machine from a redacted trace");
  std::string infer_trace;
  std::size_t infer_length = 1;
  double infer_tol = qerase::kDefaultMergeTol;
  std::uint64_t infer_min_count = qerase::kDefaultMinCount;
  std::string infer_out;
  std::string infer_report;
  infer->add_option("--trace", infer_trace, "Trace file path")->required();
  infer->add_option("--history-length", infer_length,
                    "History pairs per position (default 1)");
  infer->add_option("--tol", infer_tol,
                    "Total-variation merge threshold (default 0.05)");
  infer->add_option("--min-count", infer_min_count,
                    "Observations per history per input (default 50)");
  infer->add_option("--out", infer_out, "Machine file path")->required();
  infer->add_option("--report", infer_report,
                    "Comparison report path (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Erased information and heat bound for n = 1..n_max");
  int sweep_n_max = 1;
  double sweep_temp = 300.0;
  std::string sweep_format = "csv";
  std::string sweep_out;
  sweep->add_option("--n-max", sweep_n_max, "Largest level")->required();
  auto* sweep_temp_opt =
      sweep->add_option("--temperature", sweep_temp,
                        "Temperature in kelvin (default 300, reported in output)");
  sweep->add_option("--format", sweep_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--out", sweep_out, "Output path (default stdout)");

  // landauer
  auto* landauer = app.add_subcommand(
      "landauer", "Convert erased bits to the minimum heat in joules");
  double landauer_bits = 0.0;
  double landauer_temp = 300.0;
  std::string landauer_format = "json";
  std::string landauer_out;
  landauer->add_option("--bits", landauer_bits, "Erased bits per measurement")
      ->required();
  auto* landauer_temp_opt = landauer->add_option(
      "--temperature", landauer_temp,
      "Temperature in kelvin (default 300, reported in output)");
  landauer->add_option("--format", landauer_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  landauer->add_option("--out", landauer_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (exact->parsed()) {
      if (exact_temp_opt->count() == 0) {
        std::cerr << "temperature defaulted to 300 K\n";
      }
      return cmd_exact(exact_n, exact_temp, exact_format, exact_out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(sim_n, sim_steps, sim_seed, sim_initial, sim_out,
                          sim_redact);
    }
    if (infer->parsed()) {
      return cmd_infer(infer_trace, infer_length, infer_tol, infer_min_count,
                       infer_out, infer_report);
    }
    if (sweep->parsed()) {
      if (sweep_temp_opt->count() == 0) {
        std::cerr << "temperature defaulted to 300 K\n";
      }
      return cmd_sweep(sweep_n_max, sweep_temp, sweep_format, sweep_out);
    }
    if (landauer->parsed()) {
      if (landauer_temp_opt->count() == 0) {
        std::cerr << "temperature defaulted to 300 K\n";
      }
      return cmd_landauer(landauer_bits, landauer_temp, landauer_format,
                          landauer_out);
    }
  } catch (const qerase::SampleSizeError& e) {
    std::cerr << "sample-size error: " << e.what() << "\n";
    return kExitSampleSize;
  } catch (const qerase::ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitConsistency;
  } catch (const qerase::ConvergenceError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitConsistency;
  } catch (const qerase::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const qerase::SchemaError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qerase::PreconditionError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qerase::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
