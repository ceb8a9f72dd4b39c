#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "odapsim/scenario.hpp"

namespace odapsim {

using Rng = std::mt19937_64;

// Background replica update produced by an asynchronous write: the replica's
// copy becomes current `delay_s` after the primary commit.
struct Propagation {
  int db = -1;
  double delay_s = 0.0;
};

// Analytic network timing: per-link store-and-forward serialization, per-hop
// latency, one server processing slot per query, calibrated per-operation
// fixed offsets, and optional gaussian jitter truncated below at half the
// deterministic mean.
class RttModel {
public:
  explicit RttModel(const Scenario& scenario);

  // Deterministic round trip of a read served by a specific database.
  double read_rtt_det(int machine, int frag, int db) const;
  // Database serving reads of `frag` for `machine`: minimal deterministic
  // round trip over hosting copies, ties to the lowest database index.
  int serving_read_db(int machine, int frag) const;
  double db_read_rtt_det(int machine, int frag) const;
  double db_read_rtt(int machine, int frag, Rng& rng) const;

  // Writes go to the primary copy; under pc-s the slowest replica round trip
  // is completed before the acknowledgment, under pc-as it is not.
  double db_write_rtt_det(int machine, int frag, ReplicationMode mode) const;
  double db_write_rtt(int machine, int frag, Rng& rng) const;
  // Replica updates left pending by a pc-as write, delays relative to the
  // primary commit instant.
  std::vector<Propagation> async_propagations(int machine, int frag) const;

  // Local product access; deterministic, contention free.
  static double product_access_time(std::int64_t bytes, double throughput_bps,
                                    double overhead_s);
  // Bytes a product access moves for this (machine, fragment, direction)
  // under the scenario's transfer mode.
  std::int64_t product_transfer_bytes(int machine, int frag, bool is_read) const;

  const Scenario& scenario() const { return *scenario_; }

private:
  double one_way_s(int links, std::int64_t bytes) const;
  double apply_jitter(double det, Rng& rng) const;
  std::int64_t read_bytes(int machine, int frag) const;
  std::int64_t update_bytes(int machine, int frag) const;

  const Scenario* scenario_;
  // links_machine_db_[m][d], links_db_db_[a][b]; precomputed.
  std::vector<std::vector<int>> links_machine_db_;
  std::vector<std::vector<int>> links_db_db_;
};

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationTarget {
  std::string machine;
  std::string db;
  std::string fragment;
  enum class Op { Read, Write } op = Op::Read;
  double mean_s = 0.0;
};

struct CalibrationRow {
  CalibrationTarget target;
  double predicted_s = 0.0;
  double relative_error = 0.0;
};

struct CalibrationReport {
  double per_hop_latency_s = 0.0;
  double server_processing_s = 0.0;
  double read_offset_s = 0.0;
  double write_offset_s = 0.0;
  std::vector<CalibrationRow> rows;
  double max_relative_error = 0.0;

  std::string to_text() const;
};

// Least-squares fit of {per_hop_latency, read_offset, write_offset,
// server_processing} against the target means; collinear parameters keep the
// scenario's existing value. Writes the solved values into `scenario`.
// Throws CalibrationError when the best fit needs a negative parameter.
CalibrationReport calibrate_rtt(Scenario& scenario,
                                const std::vector<CalibrationTarget>& targets);

std::vector<CalibrationTarget> parse_calibration_targets(const std::string& text,
                                                         const std::string& source_name);
std::vector<CalibrationTarget> load_calibration_targets(const std::filesystem::path& path);

} // namespace odapsim
