#include "odapsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace odapsim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// FragmentCatalog

int FragmentCatalog::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (fragments[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> FragmentCatalog::hosting_dbs(int frag_index) const {
  const Fragment& f = fragments.at(frag_index);
  std::vector<std::string> dbs;
  dbs.push_back(f.primary_db);
  dbs.insert(dbs.end(), f.replica_dbs.begin(), f.replica_dbs.end());
  return dbs;
}

// ---------------------------------------------------------------------------
// DistributionPattern

DistributionPattern DistributionPattern::all_database(int k) {
  return DistributionPattern(std::vector<bool>(k, false));
}

DistributionPattern DistributionPattern::all_product(int k) {
  return DistributionPattern(std::vector<bool>(k, true));
}

DistributionPattern DistributionPattern::from_index(int k, std::uint32_t index) {
  if (k < 0 || k > 31) throw ValidationError("pattern index form supports 0 <= k <= 31");
  if (k < 32 && index >= (std::uint32_t{1} << k)) {
    throw ValidationError("pattern index " + std::to_string(index) +
                          " out of range for k=" + std::to_string(k));
  }
  std::vector<bool> bits(k);
  for (int i = 0; i < k; ++i) bits[i] = (index >> i) & 1u;
  return DistributionPattern(std::move(bits));
}

namespace {

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

DistributionPattern pattern_from_tokens(const std::vector<std::string>& tokens,
                                        const FragmentCatalog& catalog,
                                        bool require_all) {
  const int k = catalog.k();
  std::vector<int> seen(k, 0);
  std::vector<bool> bits(k, false);
  for (const std::string& tok : tokens) {
    bool negated = !tok.empty() && tok.front() == '!';
    const std::string id = negated ? tok.substr(1) : tok;
    const int idx = catalog.index_of(id);
    if (idx < 0) throw ParseError("pattern spec: unknown fragment '" + id + "'");
    if (seen[idx]++) throw ParseError("pattern spec: fragment '" + id + "' listed twice");
    bits[idx] = !negated;
  }
  if (require_all) {
    for (int i = 0; i < k; ++i) {
      if (!seen[i]) {
        throw ParseError("pattern spec: fragment '" + catalog.fragments[i].id +
                         "' missing (list every fragment as Fi or !Fi)");
      }
    }
  }
  return DistributionPattern(std::move(bits));
}

} // namespace

DistributionPattern DistributionPattern::from_spec(const std::string& spec,
                                                   const FragmentCatalog& catalog) {
  return pattern_from_tokens(split_ws(spec), catalog, /*require_all=*/true);
}

DistributionPattern DistributionPattern::from_spec_lenient(const std::string& spec,
                                                           const FragmentCatalog& catalog) {
  const std::vector<std::string> tokens = split_ws(spec);
  if (tokens.size() == 1) {
    std::string word = tokens[0];
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (word == "ODA") return all_database(catalog.k());
    if (word == "ODAP" || word == "FULL") return all_product(catalog.k());
  }
  return pattern_from_tokens(tokens, catalog, /*require_all=*/false);
}

bool DistributionPattern::all_on_database() const {
  return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

bool DistributionPattern::all_on_product() const {
  return std::all_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

std::uint32_t DistributionPattern::index() const {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) v |= (std::uint32_t{1} << i);
  }
  return v;
}

std::string DistributionPattern::bit_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) s[i] = '1';
  }
  return s;
}

std::string DistributionPattern::spec_string(const FragmentCatalog& catalog) const {
  if (static_cast<int>(bits_.size()) != catalog.k()) {
    throw ValidationError("pattern length does not match catalog size");
  }
  std::string out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!out.empty()) out += ' ';
    if (!bits_[i]) out += '!';
    out += catalog.fragments[i].id;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topology

int Topology::cluster_of_machine(const std::string& machine_id) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& ms = clusters[c].machine_ids;
    if (std::find(ms.begin(), ms.end(), machine_id) != ms.end()) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

int Topology::cluster_of_db(const std::string& db_id) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].db_id == db_id) return static_cast<int>(c);
  }
  return -1;
}

int Topology::links_machine_db(const std::string& machine_id,
                               const std::string& db_id) const {
  const int cm = cluster_of_machine(machine_id);
  const int cd = cluster_of_db(db_id);
  if (cm < 0) throw ConfigError("unknown machine '" + machine_id + "' in topology");
  if (cd < 0) throw ConfigError("unknown database '" + db_id + "' in topology");
  if (cm == cd) return 2;
  return 4 + std::abs(cm - cd);
}

int Topology::links_db_db(const std::string& a, const std::string& b) const {
  const int ca = cluster_of_db(a);
  const int cb = cluster_of_db(b);
  if (ca < 0) throw ConfigError("unknown database '" + a + "' in topology");
  if (cb < 0) throw ConfigError("unknown database '" + b + "' in topology");
  if (ca == cb) return 0;
  return 4 + std::abs(ca - cb);
}

// ---------------------------------------------------------------------------
// Workflow

int Workflow::producible_outputs() const {
  // Token count per class after exhausting all inputs through all stages.
  std::map<std::string, long long> count;
  for (const auto& in : inputs) count[in.product_class] += in.count;
  // Stages form a forward pipeline; iterate until stable to tolerate any
  // declaration order.
  bool changed = true;
  std::map<std::string, bool> consumed;
  while (changed) {
    changed = false;
    for (const auto& st : stages) {
      if (consumed[st.name]) continue;
      if (st.input_classes.empty()) continue;
      const std::string& in_cls = st.input_classes.front();
      if (count.find(in_cls) == count.end()) continue;
      count[st.output_class] += count[in_cls] * st.output_multiplicity;
      consumed[st.name] = true;
      changed = true;
    }
  }
  long long producible = std::numeric_limits<long long>::max();
  for (const auto& cls : join.input_classes) {
    auto it = count.find(cls);
    producible = std::min(producible, it == count.end() ? 0LL : it->second);
  }
  if (join.input_classes.empty()) producible = 0;
  producible *= join.output_multiplicity;
  return static_cast<int>(std::min<long long>(producible,
                                              std::numeric_limits<int>::max()));
}

// ---------------------------------------------------------------------------
// Enums

std::string to_string(TransferMode mode) {
  return mode == TransferMode::QueryBytes ? "query_bytes" : "whole_fragment";
}

std::string to_string(ReplicationMode mode) {
  return mode == ReplicationMode::PcSync ? "pc-s" : "pc-as";
}

static TransferMode transfer_mode_from_string(const std::string& s) {
  if (s == "query_bytes") return TransferMode::QueryBytes;
  if (s == "whole_fragment") return TransferMode::WholeFragment;
  throw ValidationError("product.transfer_mode must be 'query_bytes' or 'whole_fragment', got '" + s + "'");
}

static ReplicationMode replication_mode_from_string(const std::string& s) {
  if (s == "pc-s") return ReplicationMode::PcSync;
  if (s == "pc-as") return ReplicationMode::PcAsync;
  throw ValidationError("replication.mode must be 'pc-s' or 'pc-as', got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Scenario lookups

int Scenario::machine_index(const std::string& machine_id) const {
  for (std::size_t i = 0; i < machines.size(); ++i) {
    if (machines[i].machine_id == machine_id) return static_cast<int>(i);
  }
  return -1;
}

int Scenario::db_index(const std::string& db_id) const {
  for (std::size_t i = 0; i < databases.size(); ++i) {
    if (databases[i] == db_id) return static_cast<int>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Parsing helpers

namespace {

void check_keys(const json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) { known = true; break; }
    }
    if (!known) {
      throw ValidationError(std::string("unknown key '") + it.key() +
                            "' in section '" + section + "'");
    }
  }
}

const json& require(const json& obj, const char* key, const char* section) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string("missing key '") + key +
                          "' in section '" + section + "'");
  }
  return *it;
}

std::map<int, std::int64_t> parse_byte_map(const json& obj,
                                           const FragmentCatalog& catalog,
                                           const std::string& context) {
  std::map<int, std::int64_t> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const int idx = catalog.index_of(it.key());
    if (idx < 0) {
      throw ValidationError(context + ": unknown fragment '" + it.key() + "'");
    }
    out[idx] = it.value().get<std::int64_t>();
  }
  return out;
}

Stage parse_stage(const json& j, const Scenario& sc, bool is_join) {
  check_keys(j, is_join ? "workflow.join" : "workflow.stages[]",
             {"name", "machine", "input", "inputs", "output", "multiplicity", "oper_time_s"});
  Stage st;
  st.name = require(j, "name", "workflow stage").get<std::string>();
  st.machine_id = require(j, "machine", "workflow stage").get<std::string>();
  if (is_join) {
    for (const auto& cls : require(j, "inputs", "workflow.join")) {
      st.input_classes.push_back(cls.get<std::string>());
    }
  } else {
    st.input_classes.push_back(require(j, "input", "workflow stage").get<std::string>());
  }
  st.output_class = require(j, "output", "workflow stage").get<std::string>();
  st.output_multiplicity = j.value("multiplicity", 1);
  if (j.contains("oper_time_s")) {
    st.oper_time_s = j["oper_time_s"].get<double>();
  } else {
    const int m = sc.machine_index(st.machine_id);
    if (m >= 0) st.oper_time_s = sc.machines[m].oper_time_s;
  }
  return st;
}

} // namespace

// ---------------------------------------------------------------------------
// load / validate

Scenario load_scenario(const std::string& config_text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name + ": parse error at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source_name + ": top level must be an object");
  check_keys(doc, "<top>", {"fragments", "databases", "machines", "topology",
                            "workflow", "product", "replication"});

  Scenario sc;

  for (const auto& jf : require(doc, "fragments", "<top>")) {
    check_keys(jf, "fragments[]", {"id", "payload_bytes", "primary_db", "replica_dbs"});
    Fragment f;
    f.id = require(jf, "id", "fragments[]").get<std::string>();
    f.payload_bytes = jf.value("payload_bytes", std::int64_t{1});
    f.primary_db = require(jf, "primary_db", "fragments[]").get<std::string>();
    if (jf.contains("replica_dbs")) {
      for (const auto& r : jf["replica_dbs"]) f.replica_dbs.push_back(r.get<std::string>());
    }
    sc.catalog.fragments.push_back(std::move(f));
  }

  for (const auto& jd : require(doc, "databases", "<top>")) {
    sc.databases.push_back(jd.get<std::string>());
  }

  for (const auto& jm : require(doc, "machines", "<top>")) {
    check_keys(jm, "machines[]", {"id", "reads", "updates", "oper_time_s"});
    QueryProfile p;
    p.machine_id = require(jm, "id", "machines[]").get<std::string>();
    if (jm.contains("reads")) {
      p.reads = parse_byte_map(jm["reads"], sc.catalog, "machine " + p.machine_id + " reads");
    }
    if (jm.contains("updates")) {
      p.updates = parse_byte_map(jm["updates"], sc.catalog, "machine " + p.machine_id + " updates");
    }
    p.oper_time_s = jm.value("oper_time_s", 0.0);
    sc.machines.push_back(std::move(p));
  }

  {
    const json& jt = require(doc, "topology", "<top>");
    check_keys(jt, "topology",
               {"clusters", "link_rate_bps", "per_hop_latency_s", "server_processing_s",
                "request_overhead_bytes", "read_offset_s", "write_offset_s",
                "jitter_sigma_s"});
    for (const auto& jc : require(jt, "clusters", "topology")) {
      check_keys(jc, "topology.clusters[]", {"id", "machines", "db"});
      ClusterBinding cb;
      cb.cluster_id = require(jc, "id", "topology.clusters[]").get<std::string>();
      for (const auto& m : require(jc, "machines", "topology.clusters[]")) {
        cb.machine_ids.push_back(m.get<std::string>());
      }
      cb.db_id = require(jc, "db", "topology.clusters[]").get<std::string>();
      sc.topology.clusters.push_back(std::move(cb));
    }
    sc.topology.link_rate_bps = require(jt, "link_rate_bps", "topology").get<double>();
    sc.topology.per_hop_latency_s = require(jt, "per_hop_latency_s", "topology").get<double>();
    sc.topology.server_processing_s = require(jt, "server_processing_s", "topology").get<double>();
    sc.topology.request_overhead_bytes = jt.value("request_overhead_bytes", std::int64_t{64});
    sc.topology.read_offset_s = jt.value("read_offset_s", 0.0);
    sc.topology.write_offset_s = jt.value("write_offset_s", 0.0);
    sc.topology.jitter_sigma_s = jt.value("jitter_sigma_s", 0.0);
  }

  {
    const json& jw = require(doc, "workflow", "<top>");
    check_keys(jw, "workflow", {"inputs", "stages", "join", "target_count"});
    for (const auto& ji : require(jw, "inputs", "workflow")) {
      check_keys(ji, "workflow.inputs[]", {"class", "count"});
      WorkflowInput in;
      in.product_class = require(ji, "class", "workflow.inputs[]").get<std::string>();
      in.count = require(ji, "count", "workflow.inputs[]").get<int>();
      sc.workflow.inputs.push_back(std::move(in));
    }
    for (const auto& js : require(jw, "stages", "workflow")) {
      sc.workflow.stages.push_back(parse_stage(js, sc, /*is_join=*/false));
    }
    sc.workflow.join = parse_stage(require(jw, "join", "workflow"), sc, /*is_join=*/true);
    sc.workflow.target_count = require(jw, "target_count", "workflow").get<int>();
  }

  {
    const json& jp = require(doc, "product", "<top>");
    check_keys(jp, "product", {"throughput_bps", "access_overhead_s", "transfer_mode"});
    sc.product.throughput_bps = require(jp, "throughput_bps", "product").get<double>();
    sc.product.access_overhead_s = jp.value("access_overhead_s", 0.0);
    sc.product.transfer_mode =
        transfer_mode_from_string(jp.value("transfer_mode", std::string("query_bytes")));
  }

  {
    const json& jr = require(doc, "replication", "<top>");
    check_keys(jr, "replication", {"mode"});
    sc.replication = replication_mode_from_string(
        require(jr, "mode", "replication").get<std::string>());
  }

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str(), path.string());
}

void validate_scenario(const Scenario& sc) {
  std::set<std::string> db_set(sc.databases.begin(), sc.databases.end());
  if (db_set.size() != sc.databases.size()) {
    throw ValidationError("duplicate database id");
  }

  std::set<std::string> frag_ids;
  for (const Fragment& f : sc.catalog.fragments) {
    if (!frag_ids.insert(f.id).second) {
      throw ValidationError("duplicate fragment id '" + f.id + "'");
    }
    if (f.payload_bytes <= 0) {
      throw ValidationError("fragment " + f.id + ": payload_bytes must be > 0");
    }
    if (db_set.find(f.primary_db) == db_set.end()) {
      throw ValidationError("fragment " + f.id + ": primary_db '" + f.primary_db +
                            "' is not a known database");
    }
    std::set<std::string> replicas;
    for (const std::string& r : f.replica_dbs) {
      if (db_set.find(r) == db_set.end()) {
        throw ValidationError("fragment " + f.id + ": replica_db '" + r +
                              "' is not a known database");
      }
      if (r == f.primary_db) {
        throw ValidationError("fragment " + f.id + ": primary_db '" + r +
                              "' repeated in replica_dbs");
      }
      if (!replicas.insert(r).second) {
        throw ValidationError("fragment " + f.id + ": duplicate replica_db '" + r + "'");
      }
    }
  }

  std::set<std::string> machine_ids;
  for (const QueryProfile& p : sc.machines) {
    if (!machine_ids.insert(p.machine_id).second) {
      throw ValidationError("duplicate machine id '" + p.machine_id + "'");
    }
    for (const auto& [frag, bytes] : p.reads) {
      if (bytes <= 0) {
        throw ValidationError("machine " + p.machine_id + ": read bytes for " +
                              sc.catalog.fragments[frag].id + " must be > 0");
      }
    }
    for (const auto& [frag, bytes] : p.updates) {
      if (bytes <= 0) {
        throw ValidationError("machine " + p.machine_id + ": update bytes for " +
                              sc.catalog.fragments[frag].id + " must be > 0");
      }
    }
    if (p.oper_time_s < 0) {
      throw ValidationError("machine " + p.machine_id + ": oper_time_s must be >= 0");
    }
  }

  // Topology cross references.
  std::set<std::string> bound_dbs;
  std::set<std::string> bound_machines;
  for (const ClusterBinding& cb : sc.topology.clusters) {
    if (db_set.find(cb.db_id) == db_set.end()) {
      throw ValidationError("cluster " + cb.cluster_id + ": unknown database '" +
                            cb.db_id + "'");
    }
    if (!bound_dbs.insert(cb.db_id).second) {
      throw ValidationError("database '" + cb.db_id + "' bound to more than one cluster");
    }
    for (const std::string& m : cb.machine_ids) {
      if (machine_ids.find(m) == machine_ids.end()) {
        throw ValidationError("cluster " + cb.cluster_id + ": unknown machine '" + m + "'");
      }
      if (!bound_machines.insert(m).second) {
        throw ValidationError("machine '" + m + "' bound to more than one cluster");
      }
    }
  }
  for (const std::string& db : sc.databases) {
    if (bound_dbs.find(db) == bound_dbs.end()) {
      throw ValidationError("database '" + db + "' is not bound to any cluster");
    }
  }
  for (const std::string& m : machine_ids) {
    if (bound_machines.find(m) == bound_machines.end()) {
      throw ValidationError("machine '" + m + "' is not bound to any cluster");
    }
  }
  if (sc.topology.link_rate_bps <= 0) {
    throw ValidationError("topology.link_rate_bps must be > 0");
  }
  if (sc.topology.per_hop_latency_s < 0 || sc.topology.server_processing_s < 0 ||
      sc.topology.read_offset_s < 0 || sc.topology.write_offset_s < 0 ||
      sc.topology.jitter_sigma_s < 0 || sc.topology.request_overhead_bytes < 0) {
    throw ValidationError("topology timing parameters must be >= 0");
  }

  // Workflow structure.
  std::set<std::string> produced_classes;
  for (const WorkflowInput& in : sc.workflow.inputs) {
    if (in.count < 0) throw ValidationError("workflow input count must be >= 0");
    if (!produced_classes.insert(in.product_class).second) {
      throw ValidationError("workflow input class '" + in.product_class + "' listed twice");
    }
  }
  std::set<std::string> consumed_classes;
  std::set<std::string> stage_names;
  auto check_stage = [&](const Stage& st, bool is_join) {
    if (!stage_names.insert(st.name).second) {
      throw ValidationError("duplicate stage name '" + st.name + "'");
    }
    if (machine_ids.find(st.machine_id) == machine_ids.end()) {
      throw ValidationError("stage " + st.name + ": unknown machine '" + st.machine_id + "'");
    }
    if (st.input_classes.empty()) {
      throw ValidationError("stage " + st.name + ": needs at least one input class");
    }
    if (st.output_multiplicity < 1) {
      throw ValidationError("stage " + st.name + ": multiplicity must be >= 1");
    }
    if (st.oper_time_s < 0) {
      throw ValidationError("stage " + st.name + ": oper_time_s must be >= 0");
    }
    for (const std::string& cls : st.input_classes) {
      if (!consumed_classes.insert(cls).second) {
        throw ValidationError("token class '" + cls + "' consumed by more than one stage");
      }
    }
    if (!is_join && st.input_classes.size() != 1) {
      throw ValidationError("stage " + st.name + ": non-join stages take exactly one input class");
    }
  };
  for (const Stage& st : sc.workflow.stages) {
    check_stage(st, false);
    produced_classes.insert(st.output_class);
  }
  check_stage(sc.workflow.join, true);
  produced_classes.insert(sc.workflow.join.output_class);
  for (const Stage& st : sc.workflow.stages) {
    if (produced_classes.find(st.input_classes.front()) == produced_classes.end()) {
      throw ValidationError("stage " + st.name + ": input class '" +
                            st.input_classes.front() + "' is never produced");
    }
  }
  for (const std::string& cls : sc.workflow.join.input_classes) {
    if (produced_classes.find(cls) == produced_classes.end()) {
      throw ValidationError("join stage: input class '" + cls + "' is never produced");
    }
  }
  if (sc.workflow.target_count < 0) {
    throw ValidationError("workflow.target_count must be >= 0");
  }
  const int producible = sc.workflow.producible_outputs();
  if (sc.workflow.target_count > producible) {
    throw ValidationError("workflow.target_count " + std::to_string(sc.workflow.target_count) +
                          " exceeds the " + std::to_string(producible) +
                          " outputs producible from the declared inputs");
  }

  if (sc.product.throughput_bps <= 0) {
    throw ValidationError("product.throughput_bps must be > 0");
  }
  if (sc.product.access_overhead_s < 0) {
    throw ValidationError("product.access_overhead_s must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// save

std::string save_scenario(const Scenario& sc) {
  json doc = json::object();

  json jfrags = json::array();
  for (const Fragment& f : sc.catalog.fragments) {
    json jf;
    jf["id"] = f.id;
    jf["payload_bytes"] = f.payload_bytes;
    jf["primary_db"] = f.primary_db;
    jf["replica_dbs"] = f.replica_dbs;
    jfrags.push_back(std::move(jf));
  }
  doc["fragments"] = std::move(jfrags);

  doc["databases"] = sc.databases;

  json jmachines = json::array();
  for (const QueryProfile& p : sc.machines) {
    json jm;
    jm["id"] = p.machine_id;
    json reads = json::object();
    for (const auto& [frag, bytes] : p.reads) reads[sc.catalog.fragments[frag].id] = bytes;
    json updates = json::object();
    for (const auto& [frag, bytes] : p.updates) updates[sc.catalog.fragments[frag].id] = bytes;
    jm["reads"] = std::move(reads);
    jm["updates"] = std::move(updates);
    jm["oper_time_s"] = p.oper_time_s;
    jmachines.push_back(std::move(jm));
  }
  doc["machines"] = std::move(jmachines);

  json jt;
  json jclusters = json::array();
  for (const ClusterBinding& cb : sc.topology.clusters) {
    json jc;
    jc["id"] = cb.cluster_id;
    jc["machines"] = cb.machine_ids;
    jc["db"] = cb.db_id;
    jclusters.push_back(std::move(jc));
  }
  jt["clusters"] = std::move(jclusters);
  jt["link_rate_bps"] = sc.topology.link_rate_bps;
  jt["per_hop_latency_s"] = sc.topology.per_hop_latency_s;
  jt["server_processing_s"] = sc.topology.server_processing_s;
  jt["request_overhead_bytes"] = sc.topology.request_overhead_bytes;
  jt["read_offset_s"] = sc.topology.read_offset_s;
  jt["write_offset_s"] = sc.topology.write_offset_s;
  jt["jitter_sigma_s"] = sc.topology.jitter_sigma_s;
  doc["topology"] = std::move(jt);

  json jw;
  json jinputs = json::array();
  for (const WorkflowInput& in : sc.workflow.inputs) {
    jinputs.push_back({{"class", in.product_class}, {"count", in.count}});
  }
  jw["inputs"] = std::move(jinputs);
  json jstages = json::array();
  auto stage_json = [](const Stage& st, bool is_join) {
    json js;
    js["name"] = st.name;
    js["machine"] = st.machine_id;
    if (is_join) {
      js["inputs"] = st.input_classes;
    } else {
      js["input"] = st.input_classes.front();
    }
    js["output"] = st.output_class;
    js["multiplicity"] = st.output_multiplicity;
    js["oper_time_s"] = st.oper_time_s;
    return js;
  };
  for (const Stage& st : sc.workflow.stages) jstages.push_back(stage_json(st, false));
  jw["stages"] = std::move(jstages);
  jw["join"] = stage_json(sc.workflow.join, true);
  jw["target_count"] = sc.workflow.target_count;
  doc["workflow"] = std::move(jw);

  json jp;
  jp["throughput_bps"] = sc.product.throughput_bps;
  jp["access_overhead_s"] = sc.product.access_overhead_s;
  jp["transfer_mode"] = to_string(sc.product.transfer_mode);
  doc["product"] = std::move(jp);

  doc["replication"] = {{"mode", to_string(sc.replication)}};

  return doc.dump(2) + "\n";
}

void save_scenario_file(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path.string());
  out << save_scenario(scenario);
}

} // namespace odapsim
