#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odapsim/errors.hpp"

namespace odapsim {

// One unit of the distributed schema. Fragments are taken as given input
// data; this toolkit never derives them.
struct Fragment {
  std::string id;                       // "F1".."Fk"
  std::int64_t payload_bytes = 1;       // full fragment body size
  std::string primary_db;               // database holding the writable copy
  std::vector<std::string> replica_dbs; // synchronous replica locations

  bool operator==(const Fragment&) const = default;
};

struct FragmentCatalog {
  std::vector<Fragment> fragments;

  int k() const { return static_cast<int>(fragments.size()); }
  // Index in catalog order, -1 when unknown.
  int index_of(const std::string& id) const;
  // Primary first, replicas after, in declaration order.
  std::vector<std::string> hosting_dbs(int frag_index) const;

  bool operator==(const FragmentCatalog&) const = default;
};

// Per-machine query profile: how many bytes each read/update of a fragment
// moves. Keys are catalog indices so iteration follows catalog order.
struct QueryProfile {
  std::string machine_id;
  std::map<int, std::int64_t> reads;
  std::map<int, std::int64_t> updates;
  double oper_time_s = 0.0; // default operation time for stages on this machine

  bool operator==(const QueryProfile&) const = default;
};

// Placement choice for every fragment: bit i true = fragment i travels on the
// product, false = it stays on its database allocation.
class DistributionPattern {
public:
  DistributionPattern() = default;
  explicit DistributionPattern(std::vector<bool> bits) : bits_(std::move(bits)) {}

  static DistributionPattern all_database(int k);
  static DistributionPattern all_product(int k);
  // Binary-counting order: fragment 0 is the least significant bit.
  static DistributionPattern from_index(int k, std::uint32_t index);
  // Strict textual form: every fragment listed exactly once, "Fi" = on the
  // product, "!Fi" = on its databases.
  static DistributionPattern from_spec(const std::string& spec,
                                       const FragmentCatalog& catalog);
  // Forgiving form used by the command line: unmentioned fragments default to
  // the database side; "ODA" and "ODAP" are accepted as shorthands.
  static DistributionPattern from_spec_lenient(const std::string& spec,
                                               const FragmentCatalog& catalog);

  int size() const { return static_cast<int>(bits_.size()); }
  bool on_product(int frag_index) const { return bits_.at(frag_index); }
  bool all_on_database() const;
  bool all_on_product() const;
  std::uint32_t index() const;
  // '1' = product, fragment 0 first: "00000101" puts fragments 6 and 8 on
  // the product.
  std::string bit_string() const;
  // Round-trippable spec string ("!F1 F2 ...").
  std::string spec_string(const FragmentCatalog& catalog) const;
  const std::vector<bool>& bits() const { return bits_; }

  bool operator==(const DistributionPattern&) const = default;

private:
  std::vector<bool> bits_;
};

struct ClusterBinding {
  std::string cluster_id;
  std::vector<std::string> machine_ids;
  std::string db_id;

  bool operator==(const ClusterBinding&) const = default;
};

// Linear chain of clusters, one router per cluster, machine and database
// hanging off a per-cluster switch. All network timing parameters live here,
// including the calibrated per-operation offsets.
struct Topology {
  std::vector<ClusterBinding> clusters; // array order defines the backbone chain
  double link_rate_bps = 10e6;
  double per_hop_latency_s = 0.0;
  double server_processing_s = 0.0;
  std::int64_t request_overhead_bytes = 64;
  double read_offset_s = 0.0;
  double write_offset_s = 0.0;
  double jitter_sigma_s = 0.0;

  int cluster_of_machine(const std::string& machine_id) const; // -1 unknown
  int cluster_of_db(const std::string& db_id) const;           // -1 unknown
  // Number of links a query traverses one way. Same cluster: machine-switch
  // plus switch-db. Crossing the backbone adds the two switch uplinks and one
  // router hop per cluster of distance.
  int links_machine_db(const std::string& machine_id, const std::string& db_id) const;
  int links_db_db(const std::string& a, const std::string& b) const;

  bool operator==(const Topology&) const = default;
};

struct WorkflowInput {
  std::string product_class;
  int count = 0;

  bool operator==(const WorkflowInput&) const = default;
};

struct Stage {
  std::string name;
  std::string machine_id;
  std::vector<std::string> input_classes; // one per consumed token class
  std::string output_class;
  int output_multiplicity = 1;
  // Resolved at load time: stage override if present, machine default otherwise.
  double oper_time_s = 0.0;

  bool operator==(const Stage&) const = default;
};

struct Workflow {
  std::vector<WorkflowInput> inputs;
  std::vector<Stage> stages; // single-input transformation stages
  Stage join;                // consumes one token of each input class per firing
  int target_count = 0;

  // Greatest number of join outputs the inputs can ever produce.
  int producible_outputs() const;

  bool operator==(const Workflow&) const = default;
};

enum class TransferMode {
  QueryBytes,    // product access moves the query's byte count
  WholeFragment, // product access moves the fragment's payload_bytes
};

struct ProductParams {
  double throughput_bps = 1e6;
  double access_overhead_s = 0.0;
  TransferMode transfer_mode = TransferMode::QueryBytes;

  bool operator==(const ProductParams&) const = default;
};

enum class ReplicationMode {
  PcSync,  // primary copy, synchronous fan-out before acknowledgment
  PcAsync, // primary copy, background propagation
};

std::string to_string(TransferMode mode);
std::string to_string(ReplicationMode mode);

// Immutable after load; safe to share read-only across concurrent simulations.
struct Scenario {
  FragmentCatalog catalog;
  std::vector<std::string> databases;
  std::vector<QueryProfile> machines;
  Topology topology;
  Workflow workflow;
  ProductParams product;
  ReplicationMode replication = ReplicationMode::PcSync;

  int machine_index(const std::string& machine_id) const; // -1 unknown
  int db_index(const std::string& db_id) const;           // -1 unknown

  bool operator==(const Scenario&) const = default;
};

// Parses and validates a scenario document. Unknown keys are rejected, parse
// errors carry the source name and byte offset, validation errors name the
// violated invariant.
Scenario load_scenario(const std::string& config_text,
                       const std::string& source_name = "<config>");
Scenario load_scenario_file(const std::filesystem::path& path);

// Canonical serialization; load_scenario(save_scenario(s)) == s.
std::string save_scenario(const Scenario& scenario);
void save_scenario_file(const Scenario& scenario, const std::filesystem::path& path);

// Full invariant check, also run by load_scenario.
void validate_scenario(const Scenario& scenario);

} // namespace odapsim
