#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "odapsim/rtt_model.hpp"
#include "odapsim/scenario.hpp"

namespace odapsim {

struct AccessEntry {
  int frag = -1;
  std::int64_t bytes = 0;

  bool operator==(const AccessEntry&) const = default;
};

// A machine's query profile split by a distribution pattern, catalog order
// preserved. Byte counts are always the profile's query volumes.
struct AccessLists {
  std::vector<AccessEntry> db_reads;
  std::vector<AccessEntry> product_reads;
  std::vector<AccessEntry> db_writes;
  std::vector<AccessEntry> product_writes;
};

AccessLists split_access_lists(const QueryProfile& profile,
                               const DistributionPattern& pattern);

// Version counters for every (database, fragment) copy.
class DbState {
public:
  explicit DbState(const Scenario& scenario);

  // Primary and all replicas advance to the same new version atomically.
  std::int64_t commit_sync(int frag);
  // Asynchronous write: only the primary advances now.
  std::int64_t commit_primary(int frag);
  void apply_replica(int db, int frag, std::int64_t version);

  std::int64_t version(int db, int frag) const;
  std::int64_t committed_version(int frag) const;
  // True when every hosting copy of `frag` carries the same version.
  bool hosting_consistent(int frag) const;

private:
  const Scenario* scenario_;
  std::vector<std::vector<std::int64_t>> versions_; // [db][frag]
  std::vector<std::int64_t> committed_;             // [frag]
};

// Guarded commit: the writer must actually update `frag` in its profile.
std::int64_t commit_write(DbState& state, const QueryProfile& writer, int frag,
                          ReplicationMode mode);

struct TraceRecord {
  double time_s = 0.0;
  std::string kind;     // read_db, read_product, operate, write_db, write_product, join
  std::string entity;   // token or stage-run identifier
  std::string resource; // database or machine id, "-" when none
};

struct StageStats {
  std::string stage;
  std::uint64_t firings = 0;
  double busy_s = 0.0;
};

struct SimOptions {
  bool collect_trace = false;
  // Verify replica agreement at every commit and at the end of the run.
  bool check_consistency = false;
  std::uint64_t event_limit = 20'000'000;
};

struct SimResult {
  double makespan_s = 0.0;
  std::uint64_t events = 0;
  std::map<std::string, int> produced; // token class -> tokens created
  std::vector<StageStats> stage_stats;
  std::map<std::string, double> resource_utilization;
  std::vector<TraceRecord> trace;
  int consistency_violations = 0;
};

// Simulates the workflow under `pattern` until target_count join outputs
// exist; the makespan is the completion instant of the last one. Identical
// arguments produce identical results.
SimResult run_simulation(const Scenario& scenario, const DistributionPattern& pattern,
                         double product_throughput_bps, std::uint64_t seed,
                         const SimOptions& options = {});

void write_trace_file(const std::filesystem::path& path,
                      const std::vector<TraceRecord>& trace);

} // namespace odapsim
