#pragma once

#include <cstdint>

#include "odapsim/scenario.hpp"

namespace odapsim {

struct OdaCalibration {
  double oper_time_s = 0.0;     // solved join-stage operation time
  double achieved_mean_s = 0.0; // all-database mean makespan at that value
  int iterations = 0;
};

// Solves the join stage's operation time so the all-database mean makespan
// over `replicates` seeded runs hits `target_s`. Monotone in the unknown, so
// plain bisection; throws CalibrationError when network time alone already
// exceeds the target. Writes the solved value into `scenario`.
OdaCalibration calibrate_oda_makespan(Scenario& scenario, double target_s,
                                      int replicates, std::uint64_t base_seed,
                                      double rel_tolerance = 1e-4);

struct OdapCalibration {
  std::int64_t payload_bytes = 0; // uniform fragment body size
  double achieved_ratio = 0.0;
  double oda_mean_s = 0.0;
  double odap_mean_s = 0.0;
  int iterations = 0;
};

// Switches the scenario to whole-fragment product transfers and solves a
// uniform payload size so the all-product / all-database mean makespan ratio
// at `throughput_bps` hits `target_ratio`.
OdapCalibration calibrate_odap_ratio(Scenario& scenario, double target_ratio,
                                     double throughput_bps, int replicates,
                                     std::uint64_t base_seed,
                                     double rel_tolerance = 1e-3);

} // namespace odapsim
