#pragma once

#include <filesystem>
#include <string>

#include "odapsim/scenario.hpp"

#ifndef ODAPSIM_SCENARIO_DIR
#error "build must define ODAPSIM_SCENARIO_DIR"
#endif

namespace testutil {

inline std::filesystem::path scenario_dir() { return ODAPSIM_SCENARIO_DIR; }

inline std::filesystem::path case_study_path() {
  return scenario_dir() / "case_study_fig2.json";
}

inline odapsim::Scenario case_study() {
  return odapsim::load_scenario_file(case_study_path());
}

// Reference scenario with jitter disabled, for deterministic expectations.
inline odapsim::Scenario case_study_no_jitter() {
  odapsim::Scenario sc = case_study();
  sc.topology.jitter_sigma_s = 0.0;
  return sc;
}

// Two clusters, two fragments (one replicated), one machine per cluster,
// trivial workflow. Small enough to hand-compute against.
inline std::string small_scenario_text() {
  return R"({
  "fragments": [
    {"id": "F1", "payload_bytes": 1000, "primary_db": "DBa", "replica_dbs": []},
    {"id": "F2", "payload_bytes": 2000, "primary_db": "DBa", "replica_dbs": ["DBb"]}
  ],
  "databases": ["DBa", "DBb"],
  "machines": [
    {"id": "Mx", "reads": {"F1": 100, "F2": 200}, "updates": {"F1": 50, "F2": 80}, "oper_time_s": 0.5},
    {"id": "My", "reads": {"F2": 150}, "updates": {"F2": 60}, "oper_time_s": 0.25}
  ],
  "topology": {
    "clusters": [
      {"id": "Ca", "machines": ["Mx"], "db": "DBa"},
      {"id": "Cb", "machines": ["My"], "db": "DBb"}
    ],
    "link_rate_bps": 10000000.0,
    "per_hop_latency_s": 0.0001,
    "server_processing_s": 0.0002,
    "request_overhead_bytes": 32,
    "read_offset_s": 0.0005,
    "write_offset_s": 0.001,
    "jitter_sigma_s": 0.0
  },
  "workflow": {
    "inputs": [
      {"class": "raw1", "count": 2},
      {"class": "raw2", "count": 2}
    ],
    "stages": [
      {"name": "shape", "machine": "Mx", "input": "raw1", "output": "part1", "multiplicity": 3}
    ],
    "join": {"name": "fit", "machine": "My", "inputs": ["part1", "raw2"], "output": "done", "multiplicity": 1},
    "target_count": 2
  },
  "product": {
    "throughput_bps": 1000000.0,
    "access_overhead_s": 0.0,
    "transfer_mode": "query_bytes"
  },
  "replication": {"mode": "pc-s"}
})";
}

inline odapsim::Scenario small_scenario() {
  return odapsim::load_scenario(small_scenario_text(), "small");
}

inline std::string zero_fragment_scenario_text() {
  return R"({
  "fragments": [],
  "databases": ["DB1"],
  "machines": [
    {"id": "M1", "reads": {}, "updates": {}, "oper_time_s": 0.1}
  ],
  "topology": {
    "clusters": [{"id": "C1", "machines": ["M1"], "db": "DB1"}],
    "link_rate_bps": 10000000.0,
    "per_hop_latency_s": 0.0001,
    "server_processing_s": 0.0
  },
  "workflow": {
    "inputs": [{"class": "blank", "count": 3}],
    "stages": [],
    "join": {"name": "stamp", "machine": "M1", "inputs": ["blank"], "output": "coin", "multiplicity": 1},
    "target_count": 3
  },
  "product": {"throughput_bps": 1000000.0},
  "replication": {"mode": "pc-s"}
})";
}

} // namespace testutil
