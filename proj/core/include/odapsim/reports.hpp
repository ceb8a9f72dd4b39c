#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "odapsim/factorial.hpp"
#include "odapsim/sweep.hpp"

namespace odapsim {

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double value);
// "2'27''" style minutes'seconds display used in summary tables.
std::string format_mmss(double seconds);
// 64-bit FNV-1a over the raw bytes, lowercase hex.
std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::filesystem::path& path);

// Provenance sidecar written next to every produced data file.
struct RunManifest {
  std::string tool_version;
  std::string scenario_path;
  std::string scenario_hash;
  std::string created_at; // ISO 8601 UTC
  std::map<std::string, std::string> plan;
  std::vector<std::string> outputs;
};

std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& output);
RunManifest read_manifest(const std::filesystem::path& manifest_file);

// Sweep results: header pattern_id,pattern_bits,throughput_bps,replicate,seed,makespan_s
void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

// Factor table: header term,coefficient_s,std_err,t,p,significant
void write_factor_csv(const std::filesystem::path& path, const FactorModel& model);

// Makespan curve over pattern index plus a constant all-database reference
// line; both files are two-column (pattern_id, mean makespan).
struct PlotFiles {
  std::filesystem::path curve;
  std::filesystem::path oda_reference;
};
PlotFiles write_plot_data(const std::filesystem::path& out,
                          const std::vector<SweepRecord>& records,
                          double throughput_bps);

// One row of the per-throughput comparison table.
struct ThroughputSummary {
  double throughput_bps = 0.0;
  double oda_mean_s = 0.0;
  double full_mean_s = 0.0;
  double best_mean_s = 0.0;
  std::uint32_t best_pattern_id = 0;
  std::string best_pattern_bits;
};

// Exhaustive scan per throughput: the reported best pattern attains the
// minimum mean makespan over all scanned cells (ties to the lowest id).
std::vector<ThroughputSummary> summarize_by_throughput(
    const std::vector<SweepRecord>& records);
std::string summary_table_text(const std::vector<ThroughputSummary>& rows);

} // namespace odapsim
