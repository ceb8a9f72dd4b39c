#include "odapsim/rtt_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace odapsim {

RttModel::RttModel(const Scenario& scenario) : scenario_(&scenario) {
  const auto& sc = *scenario_;
  links_machine_db_.resize(sc.machines.size(), std::vector<int>(sc.databases.size(), 0));
  for (std::size_t m = 0; m < sc.machines.size(); ++m) {
    for (std::size_t d = 0; d < sc.databases.size(); ++d) {
      links_machine_db_[m][d] =
          sc.topology.links_machine_db(sc.machines[m].machine_id, sc.databases[d]);
    }
  }
  links_db_db_.resize(sc.databases.size(), std::vector<int>(sc.databases.size(), 0));
  for (std::size_t a = 0; a < sc.databases.size(); ++a) {
    for (std::size_t b = 0; b < sc.databases.size(); ++b) {
      links_db_db_[a][b] = sc.topology.links_db_db(sc.databases[a], sc.databases[b]);
    }
  }
}

std::int64_t RttModel::read_bytes(int machine, int frag) const {
  const auto& reads = scenario_->machines.at(machine).reads;
  auto it = reads.find(frag);
  return it == reads.end() ? 0 : it->second;
}

std::int64_t RttModel::update_bytes(int machine, int frag) const {
  const auto& updates = scenario_->machines.at(machine).updates;
  auto it = updates.find(frag);
  return it == updates.end() ? 0 : it->second;
}

double RttModel::one_way_s(int links, std::int64_t bytes) const {
  const Topology& t = scenario_->topology;
  const double serial = static_cast<double>(bytes) * 8.0 / t.link_rate_bps;
  return links * (serial + t.per_hop_latency_s);
}

double RttModel::read_rtt_det(int machine, int frag, int db) const {
  const Topology& t = scenario_->topology;
  const int links = links_machine_db_.at(machine).at(db);
  const std::int64_t oh = t.request_overhead_bytes;
  return one_way_s(links, oh) + t.server_processing_s +
         one_way_s(links, read_bytes(machine, frag) + oh) + t.read_offset_s;
}

int RttModel::serving_read_db(int machine, int frag) const {
  const auto& f = scenario_->catalog.fragments.at(frag);
  int best = scenario_->db_index(f.primary_db);
  if (best < 0) {
    throw ConfigError("fragment " + f.id + " is not hosted on any known database");
  }
  double best_rtt = read_rtt_det(machine, frag, best);
  for (const std::string& r : f.replica_dbs) {
    const int db = scenario_->db_index(r);
    const double rtt = read_rtt_det(machine, frag, db);
    if (rtt < best_rtt || (rtt == best_rtt && db < best)) {
      best = db;
      best_rtt = rtt;
    }
  }
  return best;
}

double RttModel::db_read_rtt_det(int machine, int frag) const {
  return read_rtt_det(machine, frag, serving_read_db(machine, frag));
}

double RttModel::db_read_rtt(int machine, int frag, Rng& rng) const {
  return apply_jitter(db_read_rtt_det(machine, frag), rng);
}

double RttModel::db_write_rtt_det(int machine, int frag, ReplicationMode mode) const {
  const Topology& t = scenario_->topology;
  const auto& f = scenario_->catalog.fragments.at(frag);
  const int primary = scenario_->db_index(f.primary_db);
  if (primary < 0) {
    throw ConfigError("fragment " + f.id + " is not hosted on any known database");
  }
  const std::int64_t oh = t.request_overhead_bytes;
  const std::int64_t bytes = update_bytes(machine, frag);
  const int links = links_machine_db_.at(machine).at(primary);
  double rtt = one_way_s(links, bytes + oh) + t.server_processing_s +
               one_way_s(links, oh) + t.write_offset_s;
  if (mode == ReplicationMode::PcSync) {
    double fanout = 0.0;
    for (const std::string& r : f.replica_dbs) {
      const int db = scenario_->db_index(r);
      const int rl = links_db_db_.at(primary).at(db);
      fanout = std::max(fanout, one_way_s(rl, bytes + oh) + t.server_processing_s +
                                    one_way_s(rl, oh));
    }
    rtt += fanout;
  }
  return rtt;
}

double RttModel::db_write_rtt(int machine, int frag, Rng& rng) const {
  return apply_jitter(db_write_rtt_det(machine, frag, scenario_->replication), rng);
}

std::vector<Propagation> RttModel::async_propagations(int machine, int frag) const {
  const Topology& t = scenario_->topology;
  const auto& f = scenario_->catalog.fragments.at(frag);
  const int primary = scenario_->db_index(f.primary_db);
  const std::int64_t bytes = update_bytes(machine, frag);
  std::vector<Propagation> out;
  for (const std::string& r : f.replica_dbs) {
    const int db = scenario_->db_index(r);
    const int rl = links_db_db_.at(primary).at(db);
    out.push_back({db, one_way_s(rl, bytes + t.request_overhead_bytes) +
                           t.server_processing_s});
  }
  return out;
}

double RttModel::product_access_time(std::int64_t bytes, double throughput_bps,
                                     double overhead_s) {
  if (throughput_bps <= 0) {
    throw ConfigError("product throughput must be > 0 bits/s");
  }
  if (bytes < 0) {
    throw ConfigError("product access byte count must be >= 0");
  }
  return static_cast<double>(bytes) * 8.0 / throughput_bps + overhead_s;
}

std::int64_t RttModel::product_transfer_bytes(int machine, int frag, bool is_read) const {
  if (scenario_->product.transfer_mode == TransferMode::WholeFragment) {
    return scenario_->catalog.fragments.at(frag).payload_bytes;
  }
  return is_read ? read_bytes(machine, frag) : update_bytes(machine, frag);
}

double RttModel::apply_jitter(double det, Rng& rng) const {
  const double sigma = scenario_->topology.jitter_sigma_s;
  if (sigma <= 0.0) return det;
  std::normal_distribution<double> noise(0.0, sigma);
  return std::max(det + noise(rng), 0.5 * det);
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

// Free parameters in solve order; collinear columns are dropped back to the
// scenario's configured values, so per-operation offsets win over the shared
// server processing term when the targets cannot separate them.
enum Param { kLatency = 0, kReadOffset = 1, kWriteOffset = 2, kServerProc = 3, kNumParams = 4 };

struct TargetRow {
  double coeff[kNumParams] = {0, 0, 0, 0};
  double base = 0.0; // serialization terms, fully determined by bytes and rate
};

TargetRow build_row(const Scenario& sc, const RttModel& model,
                    const CalibrationTarget& t) {
  const int m = sc.machine_index(t.machine);
  if (m < 0) throw ValidationError("calibration target: unknown machine '" + t.machine + "'");
  const int frag = sc.catalog.index_of(t.fragment);
  if (frag < 0) throw ValidationError("calibration target: unknown fragment '" + t.fragment + "'");
  const int db = sc.db_index(t.db);
  if (db < 0) throw ValidationError("calibration target: unknown database '" + t.db + "'");

  const Topology& topo = sc.topology;
  const auto serial = [&](int links, std::int64_t bytes) {
    return links * (static_cast<double>(bytes) * 8.0 / topo.link_rate_bps);
  };
  const std::int64_t oh = topo.request_overhead_bytes;
  const int links = topo.links_machine_db(t.machine, t.db);

  TargetRow row;
  if (t.op == CalibrationTarget::Op::Read) {
    const auto& reads = sc.machines[m].reads;
    auto it = reads.find(frag);
    const std::int64_t bytes = it == reads.end() ? 0 : it->second;
    row.coeff[kLatency] = 2.0 * links;
    row.coeff[kServerProc] = 1.0;
    row.coeff[kReadOffset] = 1.0;
    row.base = serial(links, oh) + serial(links, bytes + oh);
  } else {
    const auto& updates = sc.machines[m].updates;
    auto it = updates.find(frag);
    const std::int64_t bytes = it == updates.end() ? 0 : it->second;
    row.coeff[kLatency] = 2.0 * links;
    row.coeff[kServerProc] = 1.0;
    row.coeff[kWriteOffset] = 1.0;
    row.base = serial(links, oh) + serial(links, bytes + oh);
    // Synchronous fan-out from the primary to the slowest replica. The slowest
    // path is fixed by the link counts, independent of the solved parameters,
    // because every replica shares the same per-link cost structure.
    const Fragment& f = sc.catalog.fragments[frag];
    if (sc.replication == ReplicationMode::PcSync && !f.replica_dbs.empty()) {
      int max_links = 0;
      for (const std::string& r : f.replica_dbs) {
        max_links = std::max(max_links, topo.links_db_db(f.primary_db, r));
      }
      row.coeff[kLatency] += 2.0 * max_links;
      row.coeff[kServerProc] += 1.0;
      row.base += serial(max_links, oh) + serial(max_links, bytes + oh);
    }
  }
  (void)model;
  return row;
}

} // namespace

CalibrationReport calibrate_rtt(Scenario& sc,
                                const std::vector<CalibrationTarget>& targets) {
  CalibrationReport report;
  report.per_hop_latency_s = sc.topology.per_hop_latency_s;
  report.server_processing_s = sc.topology.server_processing_s;
  report.read_offset_s = sc.topology.read_offset_s;
  report.write_offset_s = sc.topology.write_offset_s;

  if (!targets.empty()) {
    RttModel model(sc);
    const int n = static_cast<int>(targets.size());
    Eigen::MatrixXd a(n, kNumParams);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      const TargetRow row = build_row(sc, model, targets[i]);
      for (int j = 0; j < kNumParams; ++j) a(i, j) = row.coeff[j];
      b(i) = targets[i].mean_s - row.base;
    }

    // Sequential Gram-Schmidt in parameter order; columns that add no new
    // direction are pinned to the scenario's current values.
    const double current[kNumParams] = {
        sc.topology.per_hop_latency_s, sc.topology.read_offset_s,
        sc.topology.write_offset_s, sc.topology.server_processing_s};
    std::vector<int> free_cols;
    Eigen::MatrixXd basis(n, 0);
    for (int j = 0; j < kNumParams; ++j) {
      Eigen::VectorXd col = a.col(j);
      const double orig = col.norm();
      Eigen::VectorXd resid = col;
      if (basis.cols() > 0) {
        resid -= basis * (basis.transpose() * col);
      }
      if (orig > 0 && resid.norm() > 1e-9 * std::max(1.0, orig)) {
        free_cols.push_back(j);
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = resid / resid.norm();
      } else {
        b -= a.col(j) * current[j];
      }
    }

    double solved[kNumParams] = {current[0], current[1], current[2], current[3]};
    if (!free_cols.empty()) {
      Eigen::MatrixXd af(n, free_cols.size());
      for (std::size_t j = 0; j < free_cols.size(); ++j) af.col(j) = a.col(free_cols[j]);
      Eigen::VectorXd x = af.colPivHouseholderQr().solve(b);
      for (std::size_t j = 0; j < free_cols.size(); ++j) solved[free_cols[j]] = x(j);
    }

    for (int j = 0; j < kNumParams; ++j) {
      if (solved[j] < -1e-12) {
        std::ostringstream msg;
        msg << "calibration infeasible: best fit needs a negative parameter ("
            << (j == kLatency ? "per_hop_latency_s"
                : j == kReadOffset ? "read_offset_s"
                : j == kWriteOffset ? "write_offset_s" : "server_processing_s")
            << " = " << solved[j] << ")";
        throw CalibrationError(msg.str());
      }
      solved[j] = std::max(solved[j], 0.0);
    }

    sc.topology.per_hop_latency_s = solved[kLatency];
    sc.topology.read_offset_s = solved[kReadOffset];
    sc.topology.write_offset_s = solved[kWriteOffset];
    sc.topology.server_processing_s = solved[kServerProc];
    report.per_hop_latency_s = solved[kLatency];
    report.read_offset_s = solved[kReadOffset];
    report.write_offset_s = solved[kWriteOffset];
    report.server_processing_s = solved[kServerProc];
  }

  // Report predicted vs target through the full model.
  RttModel fitted(sc);
  for (const CalibrationTarget& t : targets) {
    const int m = sc.machine_index(t.machine);
    const int frag = sc.catalog.index_of(t.fragment);
    const int db = sc.db_index(t.db);
    CalibrationRow row;
    row.target = t;
    row.predicted_s = t.op == CalibrationTarget::Op::Read
                          ? fitted.read_rtt_det(m, frag, db)
                          : fitted.db_write_rtt_det(m, frag, sc.replication);
    row.relative_error =
        t.mean_s != 0.0 ? std::abs(row.predicted_s - t.mean_s) / t.mean_s
                        : std::abs(row.predicted_s);
    report.max_relative_error = std::max(report.max_relative_error, row.relative_error);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string CalibrationReport::to_text() const {
  std::ostringstream out;
  out << "calibrated parameters:\n";
  out << "  per_hop_latency_s    = " << per_hop_latency_s << "\n";
  out << "  server_processing_s  = " << server_processing_s << "\n";
  out << "  read_offset_s        = " << read_offset_s << "\n";
  out << "  write_offset_s       = " << write_offset_s << "\n";
  if (!rows.empty()) {
    out << "targets:\n";
    out << "  machine db fragment op     target_s     predicted_s  rel_error\n";
    for (const CalibrationRow& r : rows) {
      std::ostringstream line;
      line << "  " << r.target.machine << " " << r.target.db << " " << r.target.fragment
           << " " << (r.target.op == CalibrationTarget::Op::Read ? "read " : "write")
           << "  " << r.target.mean_s << "  " << r.predicted_s << "  " << r.relative_error;
      out << line.str() << "\n";
    }
    out << "max relative error: " << max_relative_error << "\n";
  }
  return out.str();
}

std::vector<CalibrationTarget> parse_calibration_targets(const std::string& text,
                                                         const std::string& source_name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source_name + ": parse error at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("targets") || !doc["targets"].is_array()) {
    throw ParseError(source_name + ": expected an object with a 'targets' array");
  }
  std::vector<CalibrationTarget> out;
  for (const auto& jt : doc["targets"]) {
    CalibrationTarget t;
    for (auto it = jt.begin(); it != jt.end(); ++it) {
      if (it.key() != "machine" && it.key() != "db" && it.key() != "fragment" &&
          it.key() != "op" && it.key() != "mean_s") {
        throw ValidationError(source_name + ": unknown key '" + it.key() + "' in target");
      }
    }
    t.machine = jt.at("machine").get<std::string>();
    t.db = jt.at("db").get<std::string>();
    t.fragment = jt.at("fragment").get<std::string>();
    const std::string op = jt.at("op").get<std::string>();
    if (op == "read") {
      t.op = CalibrationTarget::Op::Read;
    } else if (op == "write") {
      t.op = CalibrationTarget::Op::Write;
    } else {
      throw ValidationError(source_name + ": target op must be 'read' or 'write'");
    }
    t.mean_s = jt.at("mean_s").get<double>();
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<CalibrationTarget> load_calibration_targets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open targets file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration_targets(buf.str(), path.string());
}

} // namespace odapsim
