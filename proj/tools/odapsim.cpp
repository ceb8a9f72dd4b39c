// odapsim: batch front end for the distribution-pattern supply chain
// simulator. Subcommands: simulate, sweep, analyze, plot-data, calibrate.
// Exit codes: 0 ok, 1 runtime error, 2 usage or parse error, 3 validation
// error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "odapsim/calibrate.hpp"
#include "odapsim/factorial.hpp"
#include "odapsim/reports.hpp"
#include "odapsim/rtt_model.hpp"
#include "odapsim/scenario.hpp"
#include "odapsim/sweep.hpp"
#include "odapsim/version.hpp"
#include "odapsim/workflow.hpp"

namespace {

using namespace odapsim;
namespace fs = std::filesystem;

// "100M", "54M", "11M", "1M", "2.4G", "800k" or plain bits/s.
double parse_throughput(const std::string& text) {
  if (text.empty()) throw ParseError("empty throughput value");
  double scale = 1.0;
  std::string digits = text;
  switch (std::tolower(static_cast<unsigned char>(text.back()))) {
    case 'k': scale = 1e3; digits.pop_back(); break;
    case 'm': scale = 1e6; digits.pop_back(); break;
    case 'g': scale = 1e9; digits.pop_back(); break;
    default: break;
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(digits, &used);
    if (used != digits.size()) throw std::invalid_argument(digits);
    if (value <= 0) throw ValidationError("throughput must be > 0: '" + text + "'");
    return value * scale;
  } catch (const std::invalid_argument&) {
    throw ParseError("bad throughput '" + text + "' (expected e.g. 1M, 54M, 1000000)");
  } catch (const std::out_of_range&) {
    throw ParseError("throughput out of range: '" + text + "'");
  }
}

std::vector<double> parse_throughput_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_throughput(item));
  }
  if (out.empty()) throw ParseError("no throughputs in '" + text + "'");
  return out;
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

void refuse_existing(const fs::path& path, bool force) {
  if (!force && fs::exists(path)) {
    throw Error("output file exists: " + path.string() + " (use --force to overwrite)");
  }
}

struct SimulateArgs {
  std::string scenario;
  std::string pattern = "ODA";
  std::string throughput;
  std::uint64_t seed = 1;
  std::string trace_out;
};

int cmd_simulate(const SimulateArgs& args) {
  const Scenario sc = load_scenario_file(args.scenario);
  const DistributionPattern pattern =
      DistributionPattern::from_spec_lenient(args.pattern, sc.catalog);
  const double throughput =
      args.throughput.empty() ? sc.product.throughput_bps : parse_throughput(args.throughput);
  SimOptions options;
  options.collect_trace = !args.trace_out.empty();
  const SimResult result = run_simulation(sc, pattern, throughput, args.seed, options);
  if (!args.trace_out.empty()) {
    write_trace_file(args.trace_out, result.trace);
  }
  std::cout << format_double(result.makespan_s) << "\n";
  return 0;
}

struct SweepArgs {
  std::string scenario;
  std::string out = "sweep.csv";
  std::string throughputs = "100M,54M,11M,1M";
  int replicates = 10;
  std::uint64_t seed = 1;
  std::vector<std::uint32_t> pattern_ids;
  int jobs = 1;
  bool force = false;
};

int cmd_sweep(const SweepArgs& args) {
  const Scenario sc = load_scenario_file(args.scenario);
  refuse_existing(args.out, args.force);

  SweepPlan plan;
  plan.throughputs_bps = parse_throughput_list(args.throughputs);
  plan.replicates = args.replicates;
  plan.base_seed = args.seed;
  if (!args.pattern_ids.empty()) plan.pattern_ids = args.pattern_ids;

  const int jobs = args.jobs > 0
                       ? args.jobs
                       : std::max(1u, std::thread::hardware_concurrency());
  const std::vector<SweepRecord> records = run_sweep(sc, plan, jobs);
  write_sweep_csv(args.out, records);

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.scenario_path = args.scenario;
  manifest.scenario_hash = hash_file(args.scenario);
  manifest.created_at = now_iso8601();
  manifest.plan["throughputs"] = args.throughputs;
  manifest.plan["replicates"] = std::to_string(args.replicates);
  manifest.plan["base_seed"] = std::to_string(args.seed);
  manifest.plan["patterns"] =
      args.pattern_ids.empty() ? "all" : std::to_string(args.pattern_ids.size());
  manifest.outputs.push_back(args.out);
  write_manifest(manifest, args.out);

  std::cerr << records.size() << " records written to " << args.out << "\n";
  return 0;
}

void check_manifest_hash(const fs::path& sweep_csv, const std::string& scenario_path,
                         bool unsafe) {
  const fs::path manifest_file = manifest_path_for(sweep_csv);
  if (!fs::exists(manifest_file)) {
    std::cerr << "warning: no manifest next to " << sweep_csv.string()
              << "; scenario consistency not verified\n";
    return;
  }
  const RunManifest manifest = read_manifest(manifest_file);
  const std::string hash = hash_file(scenario_path);
  if (manifest.scenario_hash != hash) {
    if (unsafe) {
      std::cerr << "warning: scenario hash mismatch ignored (--unsafe)\n";
      return;
    }
    throw ValidationError("sweep " + sweep_csv.string() +
                          " was produced from a different scenario (hash " +
                          manifest.scenario_hash + " != " + hash +
                          "); pass --unsafe to analyze anyway");
  }
}

struct AnalyzeArgs {
  std::string sweep_csv;
  std::string throughput;
  double alpha = 0.05;
  int max_level = 3;
  std::string out;
  std::string scenario;
  bool unsafe = false;
  bool force = false;
};

int cmd_analyze(const AnalyzeArgs& args) {
  const std::vector<SweepRecord> records = read_sweep_csv(args.sweep_csv);
  if (records.empty()) throw ValidationError("sweep csv has no records");
  if (!args.scenario.empty()) check_manifest_hash(args.sweep_csv, args.scenario, args.unsafe);

  const double throughput = parse_throughput(args.throughput);
  std::map<std::uint32_t, std::vector<double>> cells;
  int k = 0;
  for (const SweepRecord& r : records) {
    k = std::max(k, static_cast<int>(r.pattern_bits.size()));
    if (r.throughput_bps == throughput) cells[r.pattern_id].push_back(r.makespan_s);
  }
  if (cells.empty()) {
    throw ValidationError("no records at throughput " + args.throughput);
  }
  std::vector<DistributionPattern> patterns;
  std::vector<std::vector<double>> responses;
  for (const auto& [id, values] : cells) {
    patterns.push_back(DistributionPattern::from_index(k, id));
    responses.push_back(values);
  }

  const FactorModel model =
      fit_factorial_regression(patterns, responses, args.max_level, args.alpha);
  if (!model.warning.empty()) std::cerr << "warning: " << model.warning << "\n";
  if (!args.out.empty()) {
    refuse_existing(args.out, args.force);
    write_factor_csv(args.out, model);
  }

  std::cout << summary_table_text(summarize_by_throughput(records));
  const auto significant = select_significant(model, args.alpha);
  std::cout << "significant factors at alpha=" << args.alpha << " ("
            << significant.size() << " of " << model.estimates.size() - 1 << "):\n";
  for (const FactorEstimate& e : significant) {
    std::cout << "  " << e.term.name() << "  coeff_s=" << format_double(e.coefficient_s)
              << "  p=" << format_double(e.p_value) << "\n";
  }
  return 0;
}

struct PlotArgs {
  std::string sweep_csv;
  std::string throughput;
  std::string out;
  bool force = false;
};

int cmd_plot_data(const PlotArgs& args) {
  const std::vector<SweepRecord> records = read_sweep_csv(args.sweep_csv);
  if (records.empty()) throw ValidationError("sweep csv has no records");
  refuse_existing(args.out, args.force);
  const PlotFiles files =
      write_plot_data(args.out, records, parse_throughput(args.throughput));
  std::cerr << "curve: " << files.curve.string()
            << "\nreference: " << files.oda_reference.string() << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string scenario;
  std::string targets;
  std::string out;
  double oda_target_s = 0.0;
  double odap_ratio = 0.0;
  std::string odap_throughput = "1M";
  int replicates = 10;
  std::uint64_t seed = 1;
  bool force = false;
};

int cmd_calibrate(const CalibrateArgs& args) {
  Scenario sc = load_scenario_file(args.scenario);
  refuse_existing(args.out, args.force);

  if (!args.targets.empty()) {
    const auto targets = load_calibration_targets(args.targets);
    const CalibrationReport report = calibrate_rtt(sc, targets);
    std::cout << report.to_text();
  }
  if (args.oda_target_s > 0) {
    const OdaCalibration oda =
        calibrate_oda_makespan(sc, args.oda_target_s, args.replicates, args.seed);
    std::cout << "join stage operation time: " << format_double(oda.oper_time_s)
              << " s (mean all-database makespan " << format_double(oda.achieved_mean_s)
              << " s over " << args.replicates << " replicates)\n";
  }
  if (args.odap_ratio > 0) {
    const OdapCalibration odap =
        calibrate_odap_ratio(sc, args.odap_ratio, parse_throughput(args.odap_throughput),
                             args.replicates, args.seed);
    std::cout << "fragment payload: " << odap.payload_bytes
              << " bytes (all-product/all-database ratio "
              << format_double(odap.achieved_ratio) << " at " << args.odap_throughput
              << ")\n";
  }

  validate_scenario(sc);
  save_scenario_file(sc, args.out);
  std::cerr << "calibrated scenario written to " << args.out << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"supply chain makespan simulator for data distribution patterns "
               "between fixed databases and data-carrying products"};
  app.set_version_flag("--version", odapsim::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run one simulation and print the makespan in seconds");
  simulate->add_option("--scenario", sim.scenario, "scenario file")->required();
  simulate->add_option("--pattern", sim.pattern,
                       "ODA, ODAP, or fragment list: \"!F1 F2 ...\" "
                       "(unmentioned fragments stay on their databases)");
  simulate->add_option("--throughput", sim.throughput,
                       "product throughput (e.g. 1M); default from the scenario");
  simulate->add_option("--seed", sim.seed, "simulation seed");
  simulate->add_option("--trace", sim.trace_out, "write an event trace CSV here");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "simulate every pattern x throughput x replicate cell");
  sweep_cmd->add_option("--scenario", sweep.scenario, "scenario file")->required();
  sweep_cmd->add_option("--out", sweep.out, "output CSV path");
  sweep_cmd->add_option("--throughputs", sweep.throughputs, "comma list, e.g. 100M,1M");
  sweep_cmd->add_option("--replicates", sweep.replicates, "runs per cell");
  sweep_cmd->add_option("--seed", sweep.seed, "base seed");
  sweep_cmd->add_option("--patterns", sweep.pattern_ids,
                        "restrict to these pattern ids (default: all 2^k)");
  sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads; 0 = hardware");
  sweep_cmd->add_flag("--force", sweep.force, "overwrite existing output");

  AnalyzeArgs analyze;
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "factorial regression and per-throughput summary of a sweep");
  analyze_cmd->add_option("--sweep", analyze.sweep_csv, "sweep CSV")->required();
  analyze_cmd->add_option("--throughput", analyze.throughput,
                          "throughput whose cells feed the regression")->required();
  analyze_cmd->add_option("--alpha", analyze.alpha, "significance level");
  analyze_cmd->add_option("--max-level", analyze.max_level, "highest interaction level");
  analyze_cmd->add_option("--out", analyze.out, "factor table CSV path");
  analyze_cmd->add_option("--scenario", analyze.scenario,
                          "verify the sweep manifest against this scenario");
  analyze_cmd->add_flag("--unsafe", analyze.unsafe, "ignore manifest hash mismatches");
  analyze_cmd->add_flag("--force", analyze.force, "overwrite existing output");

  PlotArgs plot;
  CLI::App* plot_cmd = app.add_subcommand(
      "plot-data", "pattern-index vs makespan curve plus reference line");
  plot_cmd->add_option("--sweep", plot.sweep_csv, "sweep CSV")->required();
  plot_cmd->add_option("--throughput", plot.throughput, "throughput to plot")->required();
  plot_cmd->add_option("--out", plot.out, "curve output path")->required();
  plot_cmd->add_flag("--force", plot.force, "overwrite existing output");

  CalibrateArgs cal;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "fit network timing and scenario parameters, write a new scenario");
  cal_cmd->add_option("--scenario", cal.scenario, "input scenario file")->required();
  cal_cmd->add_option("--targets", cal.targets, "round-trip-time target file (JSON)");
  cal_cmd->add_option("--out", cal.out, "calibrated scenario path")->required();
  cal_cmd->add_option("--oda-target-s", cal.oda_target_s,
                      "solve the join operation time for this all-database makespan");
  cal_cmd->add_option("--odap-ratio", cal.odap_ratio,
                      "solve fragment payloads for this all-product/all-database ratio");
  cal_cmd->add_option("--odap-throughput", cal.odap_throughput,
                      "throughput at which the ratio target applies");
  cal_cmd->add_option("--replicates", cal.replicates, "runs per mean estimate");
  cal_cmd->add_option("--seed", cal.seed, "base seed");
  cal_cmd->add_flag("--force", cal.force, "overwrite existing output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze);
    if (plot_cmd->parsed()) return cmd_plot_data(plot);
    if (cal_cmd->parsed()) return cmd_calibrate(cal);
  } catch (const odapsim::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const odapsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
