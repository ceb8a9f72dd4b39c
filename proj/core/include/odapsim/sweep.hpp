#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odapsim/scenario.hpp"
#include "odapsim/workflow.hpp"

namespace odapsim {

struct SweepPlan {
  std::vector<double> throughputs_bps = {100e6, 54e6, 11e6, 1e6};
  int replicates = 10;
  std::uint64_t base_seed = 1;
  // Defaults to every pattern of the catalog.
  std::optional<std::vector<std::uint32_t>> pattern_ids;
  int enumeration_cap = 20;
  std::uint64_t event_limit = 20'000'000;
};

struct SweepRecord {
  std::uint32_t pattern_id = 0;
  std::string pattern_bits;
  double throughput_bps = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double makespan_s = 0.0;

  bool operator==(const SweepRecord&) const = default;
};

struct CellKey {
  std::uint32_t pattern_id = 0;
  double throughput_bps = 0.0;

  auto operator<=>(const CellKey&) const = default;
};

struct CellStats {
  double mean = 0.0;
  double variance = 0.0;
  double ci95_half = 0.0;
  int n = 0;
  bool variance_defined = false; // false when a cell has a single replicate
};

// All 2^k placements in binary-counting order, fragment 0 as the least
// significant bit. Refuses k beyond `cap` (2^k simulations per throughput).
std::vector<DistributionPattern> enumerate_patterns(int k, int cap = 20);

std::uint64_t sweep_seed(std::uint64_t base_seed, std::uint32_t pattern_id,
                         double throughput_bps, int replicate);

// Runs every (pattern, throughput, replicate) cell. Results are sorted
// canonically and do not depend on `jobs` or scheduling order. Any failing
// simulation aborts the sweep with its coordinates in the message.
std::vector<SweepRecord> run_sweep(const Scenario& scenario, const SweepPlan& plan,
                                   int jobs = 1);

std::map<CellKey, CellStats> summarize(const std::vector<SweepRecord>& records);

} // namespace odapsim
