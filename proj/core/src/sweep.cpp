#include "odapsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <thread>

#include "odapsim/stats.hpp"

namespace odapsim {

std::vector<DistributionPattern> enumerate_patterns(int k, int cap) {
  if (k < 0) throw ValidationError("fragment count must be >= 0");
  if (k > cap) {
    throw ValidationError("enumerating 2^" + std::to_string(k) +
                          " patterns exceeds the cap of 2^" + std::to_string(cap) +
                          "; raise the cap or restrict the pattern set");
  }
  const std::uint32_t n = std::uint32_t{1} << k;
  std::vector<DistributionPattern> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(DistributionPattern::from_index(k, i));
  return out;
}

std::uint64_t sweep_seed(std::uint64_t base_seed, std::uint32_t pattern_id,
                         double throughput_bps, int replicate) {
  return stats::mix_seed(base_seed, pattern_id,
                         std::bit_cast<std::uint64_t>(throughput_bps),
                         static_cast<std::uint64_t>(replicate));
}

std::vector<SweepRecord> run_sweep(const Scenario& scenario, const SweepPlan& plan,
                                   int jobs) {
  if (plan.replicates < 1) throw ValidationError("sweep replicates must be >= 1");
  if (plan.throughputs_bps.empty()) throw ValidationError("sweep needs at least one throughput");
  for (double t : plan.throughputs_bps) {
    if (t <= 0) throw ValidationError("sweep throughputs must be > 0");
  }

  std::vector<DistributionPattern> patterns;
  if (plan.pattern_ids) {
    for (std::uint32_t id : *plan.pattern_ids) {
      patterns.push_back(DistributionPattern::from_index(scenario.catalog.k(), id));
    }
  } else {
    patterns = enumerate_patterns(scenario.catalog.k(), plan.enumeration_cap);
  }

  struct Job {
    std::size_t pattern;
    std::size_t throughput;
    int replicate;
  };
  std::vector<Job> grid;
  grid.reserve(patterns.size() * plan.throughputs_bps.size() * plan.replicates);
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    for (std::size_t t = 0; t < plan.throughputs_bps.size(); ++t) {
      for (int r = 0; r < plan.replicates; ++r) grid.push_back({p, t, r});
    }
  }

  std::vector<SweepRecord> records(grid.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    SimOptions options;
    options.event_limit = plan.event_limit;
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      if (i >= grid.size()) return;
      const Job& job = grid[i];
      const DistributionPattern& pattern = patterns[job.pattern];
      const double throughput = plan.throughputs_bps[job.throughput];
      SweepRecord rec;
      rec.pattern_id = pattern.index();
      rec.pattern_bits = pattern.bit_string();
      rec.throughput_bps = throughput;
      rec.replicate = job.replicate;
      rec.seed = sweep_seed(plan.base_seed, rec.pattern_id, throughput, job.replicate);
      try {
        rec.makespan_s =
            run_simulation(scenario, pattern, throughput, rec.seed, options).makespan_s;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true)) {
          failure = "sweep aborted at pattern " + std::to_string(rec.pattern_id) +
                    ", throughput " + std::to_string(throughput) + ", replicate " +
                    std::to_string(job.replicate) + ": " + e.what();
        }
        return;
      }
      records[i] = std::move(rec);
    }
  };

  const int n_threads = std::max(1, jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed) throw Error(failure);

  // Canonical emission order, independent of execution interleaving.
  std::sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
    if (a.pattern_id != b.pattern_id) return a.pattern_id < b.pattern_id;
    if (a.throughput_bps != b.throughput_bps) return a.throughput_bps < b.throughput_bps;
    return a.replicate < b.replicate;
  });
  return records;
}

std::map<CellKey, CellStats> summarize(const std::vector<SweepRecord>& records) {
  std::map<CellKey, std::vector<double>> cells;
  for (const SweepRecord& r : records) {
    cells[{r.pattern_id, r.throughput_bps}].push_back(r.makespan_s);
  }
  std::map<CellKey, CellStats> out;
  for (const auto& [key, values] : cells) {
    CellStats cs;
    cs.n = static_cast<int>(values.size());
    cs.mean = stats::mean(values);
    cs.variance = stats::sample_variance(values);
    cs.variance_defined = values.size() >= 2;
    cs.ci95_half = stats::ci95_half_width(cs.variance, cs.n);
    out[key] = cs;
  }
  return out;
}

} // namespace odapsim
