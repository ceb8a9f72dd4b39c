#include "odapsim/calibrate.hpp"

#include <cmath>

#include "odapsim/sweep.hpp"
#include "odapsim/workflow.hpp"

namespace odapsim {

namespace {

double mean_makespan(const Scenario& sc, const DistributionPattern& pattern,
                     double throughput_bps, int replicates, std::uint64_t base_seed) {
  double sum = 0.0;
  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t seed = sweep_seed(base_seed, pattern.index(), throughput_bps, r);
    sum += run_simulation(sc, pattern, throughput_bps, seed).makespan_s;
  }
  return sum / replicates;
}

} // namespace

OdaCalibration calibrate_oda_makespan(Scenario& sc, double target_s, int replicates,
                                      std::uint64_t base_seed, double rel_tolerance) {
  if (target_s <= 0) throw CalibrationError("target makespan must be > 0");
  if (replicates < 1) throw CalibrationError("calibration needs at least one replicate");
  const DistributionPattern oda = DistributionPattern::all_database(sc.catalog.k());
  const double throughput = sc.product.throughput_bps;

  OdaCalibration result;
  auto eval = [&](double oper) {
    sc.workflow.join.oper_time_s = oper;
    ++result.iterations;
    return mean_makespan(sc, oda, throughput, replicates, base_seed);
  };

  const double floor = eval(0.0);
  if (floor > target_s) {
    throw CalibrationError("network and upstream stage time alone gives " +
                           std::to_string(floor) + " s, above the target of " +
                           std::to_string(target_s) + " s");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (eval(hi) < target_s) {
    hi *= 2.0;
    if (hi > 1e9) throw CalibrationError("operation time search diverged");
  }
  double achieved = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    achieved = eval(mid);
    if (std::abs(achieved - target_s) <= rel_tolerance * target_s) {
      lo = hi = mid;
      break;
    }
    (achieved < target_s ? lo : hi) = mid;
    if (hi - lo < 1e-12) break;
  }
  const double solved = 0.5 * (lo + hi);
  result.oper_time_s = solved;
  result.achieved_mean_s = eval(solved);
  return result;
}

OdapCalibration calibrate_odap_ratio(Scenario& sc, double target_ratio,
                                     double throughput_bps, int replicates,
                                     std::uint64_t base_seed, double rel_tolerance) {
  if (target_ratio <= 0) throw CalibrationError("target ratio must be > 0");
  if (throughput_bps <= 0) throw CalibrationError("calibration throughput must be > 0");
  if (replicates < 1) throw CalibrationError("calibration needs at least one replicate");
  if (sc.catalog.k() == 0) {
    throw CalibrationError("payload calibration needs at least one fragment");
  }

  sc.product.transfer_mode = TransferMode::WholeFragment;
  const DistributionPattern oda = DistributionPattern::all_database(sc.catalog.k());
  const DistributionPattern odap = DistributionPattern::all_product(sc.catalog.k());

  OdapCalibration result;
  result.oda_mean_s = mean_makespan(sc, oda, throughput_bps, replicates, base_seed);
  if (result.oda_mean_s <= 0) {
    throw CalibrationError("all-database makespan is zero; ratio undefined");
  }

  auto ratio_at = [&](std::int64_t payload) {
    for (Fragment& f : sc.catalog.fragments) f.payload_bytes = payload;
    ++result.iterations;
    result.odap_mean_s = mean_makespan(sc, odap, throughput_bps, replicates, base_seed);
    return result.odap_mean_s / result.oda_mean_s;
  };

  if (ratio_at(1) > target_ratio) {
    throw CalibrationError("ratio already above target at 1-byte payloads");
  }
  std::int64_t lo = 1;
  std::int64_t hi = 65536;
  while (ratio_at(hi) < target_ratio) {
    hi *= 2;
    if (hi > (std::int64_t{1} << 40)) {
      throw CalibrationError("payload search diverged");
    }
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double r = ratio_at(mid);
    if (std::abs(r - target_ratio) <= rel_tolerance * target_ratio) {
      lo = hi = mid;
      break;
    }
    (r < target_ratio ? lo : hi) = mid;
  }
  result.payload_bytes = hi;
  result.achieved_ratio = ratio_at(hi);
  return result;
}

} // namespace odapsim
