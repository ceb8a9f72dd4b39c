#include "odapsim/workflow.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>

#include "odapsim/des.hpp"

namespace odapsim {

// ---------------------------------------------------------------------------
// split_access_lists

AccessLists split_access_lists(const QueryProfile& profile,
                               const DistributionPattern& pattern) {
  AccessLists out;
  for (const auto& [frag, bytes] : profile.reads) {
    (pattern.on_product(frag) ? out.product_reads : out.db_reads)
        .push_back({frag, bytes});
  }
  for (const auto& [frag, bytes] : profile.updates) {
    (pattern.on_product(frag) ? out.product_writes : out.db_writes)
        .push_back({frag, bytes});
  }
  return out;
}

// ---------------------------------------------------------------------------
// DbState

DbState::DbState(const Scenario& scenario) : scenario_(&scenario) {
  versions_.resize(scenario.databases.size(),
                   std::vector<std::int64_t>(scenario.catalog.k(), 0));
  committed_.resize(scenario.catalog.k(), 0);
}

std::int64_t DbState::commit_sync(int frag) {
  const std::int64_t v = ++committed_.at(frag);
  const Fragment& f = scenario_->catalog.fragments.at(frag);
  versions_[scenario_->db_index(f.primary_db)][frag] = v;
  for (const std::string& r : f.replica_dbs) {
    versions_[scenario_->db_index(r)][frag] = v;
  }
  return v;
}

std::int64_t DbState::commit_primary(int frag) {
  const std::int64_t v = ++committed_.at(frag);
  const Fragment& f = scenario_->catalog.fragments.at(frag);
  versions_[scenario_->db_index(f.primary_db)][frag] = v;
  return v;
}

void DbState::apply_replica(int db, int frag, std::int64_t version) {
  // Propagations may arrive out of order; replicas only move forward.
  auto& slot = versions_.at(db).at(frag);
  slot = std::max(slot, version);
}

std::int64_t DbState::version(int db, int frag) const {
  return versions_.at(db).at(frag);
}

std::int64_t DbState::committed_version(int frag) const { return committed_.at(frag); }

bool DbState::hosting_consistent(int frag) const {
  const Fragment& f = scenario_->catalog.fragments.at(frag);
  const std::int64_t primary = versions_[scenario_->db_index(f.primary_db)][frag];
  for (const std::string& r : f.replica_dbs) {
    if (versions_[scenario_->db_index(r)][frag] != primary) return false;
  }
  return true;
}

std::int64_t commit_write(DbState& state, const QueryProfile& writer, int frag,
                          ReplicationMode mode) {
  if (writer.updates.find(frag) == writer.updates.end()) {
    throw ValidationError("machine " + writer.machine_id +
                          " writes a fragment its profile does not update");
  }
  return mode == ReplicationMode::PcSync ? state.commit_sync(frag)
                                         : state.commit_primary(frag);
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

struct Token {
  std::string cls;
  std::uint64_t uid = 0;
  std::map<int, std::int64_t> versions; // product-resident fragments only
};

struct StepPlan {
  enum class Kind { DbRead, ProductRead, Operate, DbWrite, ProductWrite };
  Kind kind;
  int frag = -1;
  std::size_t input_index = 0;
};

class Simulation {
public:
  Simulation(const Scenario& sc, const DistributionPattern& pattern,
             double throughput_bps, std::uint64_t seed, const SimOptions& opt)
      : sc_(sc), pattern_(pattern), throughput_(throughput_bps), opt_(opt),
        rtt_(sc), db_state_(sc), rng_(seed) {
    if (pattern.size() != sc.catalog.k()) {
      throw ValidationError("pattern length " + std::to_string(pattern.size()) +
                            " does not match catalog size " +
                            std::to_string(sc.catalog.k()));
    }
    if (throughput_ <= 0) throw ConfigError("product throughput must be > 0 bits/s");
    const int producible = sc.workflow.producible_outputs();
    if (sc.workflow.target_count > producible) {
      throw ValidationError("target_count exceeds producible outputs");
    }
    engine_.set_event_limit(opt.event_limit);

    for (const std::string& db : sc_.databases) {
      db_resources_.push_back(&engine_.add_resource(db));
    }
    for (const QueryProfile& m : sc_.machines) {
      machine_resources_.push_back(&engine_.add_resource(m.machine_id));
    }
    writes_in_flight_.resize(std::max(sc_.catalog.k(), 1), 0);

    for (const Stage& st : sc_.workflow.stages) add_stage(st);
    add_stage(sc_.workflow.join);
    join_stage_ = static_cast<int>(stages_.size()) - 1;
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      for (const std::string& cls : stages_[s].def->input_classes) {
        consumer_of_[cls] = static_cast<int>(s);
      }
    }
  }

  SimResult run() {
    engine_.schedule_at(0.0, [this]() { inject_inputs(); });
    const std::string& out_cls = sc_.workflow.join.output_class;
    const int target = sc_.workflow.target_count;
    const auto stats = engine_.run_until(
        [this, &out_cls, target]() { return produced_[out_cls] >= target; });

    SimResult result;
    result.makespan_s = stats.end_time;
    result.events = stats.events_processed;
    result.produced = produced_;
    for (const StageRt& st : stages_) {
      result.stage_stats.push_back({st.def->name, st.firings, st.busy_s});
    }
    for (des::Resource* r : db_resources_) {
      result.resource_utilization[r->id()] = engine_.utilization(*r);
    }
    for (des::Resource* r : machine_resources_) {
      result.resource_utilization[r->id()] = engine_.utilization(*r);
    }
    if (opt_.check_consistency && sc_.replication == ReplicationMode::PcSync) {
      for (int f = 0; f < sc_.catalog.k(); ++f) {
        if (writes_in_flight_[f] == 0 && !db_state_.hosting_consistent(f)) {
          ++violations_;
        }
      }
    }
    result.consistency_violations = violations_;
    result.trace = std::move(trace_);
    return result;
  }

private:
  struct StageRt {
    const Stage* def;
    int machine = -1;
    std::vector<std::deque<Token>> queues; // aligned with def->input_classes
    bool running = false;
    std::uint64_t firings = 0;
    double busy_s = 0.0;
  };

  struct RunState {
    int stage = -1;
    std::uint64_t run_id = 0;
    std::vector<Token> inputs;
    std::vector<Token> outputs;
    std::vector<StepPlan> steps;
    std::size_t next_step = 0;
    double started_at = 0.0;
  };

  void add_stage(const Stage& st) {
    StageRt rt;
    rt.def = &st;
    rt.machine = sc_.machine_index(st.machine_id);
    rt.queues.resize(st.input_classes.size());
    stages_.push_back(std::move(rt));
  }

  void inject_inputs() {
    for (const WorkflowInput& in : sc_.workflow.inputs) {
      for (int i = 0; i < in.count; ++i) deliver(make_token(in.product_class));
    }
  }

  Token make_token(const std::string& cls) {
    Token t;
    t.cls = cls;
    t.uid = ++class_counter_[cls];
    for (int f = 0; f < sc_.catalog.k(); ++f) {
      if (pattern_.on_product(f)) t.versions[f] = 0;
    }
    return t;
  }

  static std::string entity_name(const Token& t) {
    return t.cls + "#" + std::to_string(t.uid);
  }

  void deliver(Token token) {
    ++produced_[token.cls];
    auto it = consumer_of_.find(token.cls);
    if (it == consumer_of_.end()) return; // terminal class, counted only
    StageRt& st = stages_[it->second];
    for (std::size_t q = 0; q < st.def->input_classes.size(); ++q) {
      if (st.def->input_classes[q] == token.cls) {
        st.queues[q].push_back(std::move(token));
        break;
      }
    }
    try_start(it->second);
  }

  void try_start(int stage_idx) {
    StageRt& st = stages_[stage_idx];
    if (st.running) return;
    for (const auto& q : st.queues) {
      if (q.empty()) return;
    }
    st.running = true;

    auto run = std::make_shared<RunState>();
    run->stage = stage_idx;
    run->run_id = ++st.firings;
    for (auto& q : st.queues) {
      run->inputs.push_back(std::move(q.front()));
      q.pop_front();
    }
    plan_steps(*run);
    if (stage_idx == join_stage_) {
      trace(engine_.now(), "join", st.def->name + "#" + std::to_string(run->run_id),
            st.def->machine_id);
    }
    engine_.acquire(*machine_resources_[st.machine], [this, run]() {
      run->started_at = engine_.now();
      exec_step(run);
    });
  }

  void plan_steps(RunState& run) const {
    const QueryProfile& prof = sc_.machines[stages_[run.stage].machine];
    // One read phase per consumed token, fragments in catalog order.
    for (std::size_t i = 0; i < run.inputs.size(); ++i) {
      for (const auto& [frag, bytes] : prof.reads) {
        run.steps.push_back({pattern_.on_product(frag) ? StepPlan::Kind::ProductRead
                                                       : StepPlan::Kind::DbRead,
                             frag, i});
      }
    }
    run.steps.push_back({StepPlan::Kind::Operate, -1, 0});
    // One write phase per firing, applied to the output lot.
    for (const auto& [frag, bytes] : prof.updates) {
      run.steps.push_back({pattern_.on_product(frag) ? StepPlan::Kind::ProductWrite
                                                     : StepPlan::Kind::DbWrite,
                           frag, 0});
    }
  }

  void exec_step(const std::shared_ptr<RunState>& run) {
    if (run->next_step == run->steps.size()) {
      finish_run(run);
      return;
    }
    const StepPlan step = run->steps[run->next_step++];
    StageRt& st = stages_[run->stage];
    const int machine = st.machine;

    switch (step.kind) {
      case StepPlan::Kind::DbRead: {
        const int db = rtt_.serving_read_db(machine, step.frag);
        const double dur = rtt_.db_read_rtt(machine, step.frag, rng_);
        const std::string entity = entity_name(run->inputs[step.input_index]);
        engine_.hold(*db_resources_[db], dur, [this, run, entity, db]() {
          trace(engine_.now(), "read_db", entity, sc_.databases[db]);
          exec_step(run);
        });
        break;
      }
      case StepPlan::Kind::ProductRead: {
        const std::int64_t bytes = rtt_.product_transfer_bytes(machine, step.frag, true);
        const double dur = RttModel::product_access_time(
            bytes, throughput_, sc_.product.access_overhead_s);
        const std::string entity = entity_name(run->inputs[step.input_index]);
        engine_.schedule_in(dur, [this, run, entity]() {
          trace(engine_.now(), "read_product", entity, "-");
          exec_step(run);
        });
        break;
      }
      case StepPlan::Kind::Operate: {
        engine_.schedule_in(st.def->oper_time_s, [this, run]() {
          StageRt& stage = stages_[run->stage];
          trace(engine_.now(), "operate",
                stage.def->name + "#" + std::to_string(run->run_id),
                stage.def->machine_id);
          make_outputs(*run);
          exec_step(run);
        });
        break;
      }
      case StepPlan::Kind::DbWrite: {
        ++writes_in_flight_[step.frag];
        const double dur = rtt_.db_write_rtt(machine, step.frag, rng_);
        std::vector<des::Resource*> dbs = write_resources(step.frag);
        const int frag = step.frag;
        engine_.acquire_all(dbs, [this, run, dbs, frag, dur, machine]() {
          engine_.schedule_in(dur, [this, run, dbs, frag, machine]() {
            complete_db_write(run, dbs, frag, machine);
          });
        });
        break;
      }
      case StepPlan::Kind::ProductWrite: {
        const std::int64_t bytes = rtt_.product_transfer_bytes(machine, step.frag, false);
        const double dur = RttModel::product_access_time(
            bytes, throughput_, sc_.product.access_overhead_s);
        const int frag = step.frag;
        engine_.schedule_in(dur, [this, run, frag]() {
          for (Token& out : run->outputs) ++out.versions.at(frag);
          const std::string entity =
              run->outputs.empty() ? entity_name(run->inputs.front())
                                   : entity_name(run->outputs.front());
          trace(engine_.now(), "write_product", entity, "-");
          exec_step(run);
        });
        break;
      }
    }
  }

  // All databases touched by a pc-s write of `frag`, ascending db index so
  // concurrent fan-outs never deadlock. Under pc-as only the primary is held.
  std::vector<des::Resource*> write_resources(int frag) const {
    const Fragment& f = sc_.catalog.fragments[frag];
    std::vector<int> ids{sc_.db_index(f.primary_db)};
    if (sc_.replication == ReplicationMode::PcSync) {
      for (const std::string& r : f.replica_dbs) ids.push_back(sc_.db_index(r));
    }
    std::sort(ids.begin(), ids.end());
    std::vector<des::Resource*> out;
    for (int id : ids) out.push_back(db_resources_[id]);
    return out;
  }

  void complete_db_write(const std::shared_ptr<RunState>& run,
                         const std::vector<des::Resource*>& dbs, int frag, int machine) {
    const std::int64_t version =
        commit_write(db_state_, sc_.machines[machine], frag, sc_.replication);
    --writes_in_flight_[frag];
    engine_.release_all(dbs);
    if (sc_.replication == ReplicationMode::PcAsync) {
      for (const Propagation& p : rtt_.async_propagations(machine, frag)) {
        engine_.schedule_in(p.delay_s, [this, p, frag, version]() {
          db_state_.apply_replica(p.db, frag, version);
        });
      }
    } else if (opt_.check_consistency && writes_in_flight_[frag] == 0 &&
               !db_state_.hosting_consistent(frag)) {
      ++violations_;
    }
    const Fragment& f = sc_.catalog.fragments[frag];
    const std::string entity = run->outputs.empty()
                                   ? entity_name(run->inputs.front())
                                   : entity_name(run->outputs.front());
    trace(engine_.now(), "write_db", entity, f.primary_db);
    exec_step(run);
  }

  void make_outputs(RunState& run) {
    const Stage& def = *stages_[run.stage].def;
    // The first consumed token is the fragment carrier; the whole output lot
    // inherits its product-side versions.
    const Token& carrier = run.inputs.front();
    for (int i = 0; i < def.output_multiplicity; ++i) {
      Token out = make_token(def.output_class);
      out.versions = carrier.versions;
      run.outputs.push_back(std::move(out));
    }
  }

  void finish_run(const std::shared_ptr<RunState>& run) {
    StageRt& st = stages_[run->stage];
    engine_.release(*machine_resources_[st.machine]);
    st.busy_s += engine_.now() - run->started_at;
    st.running = false;
    for (Token& out : run->outputs) deliver(std::move(out));
    try_start(run->stage);
  }

  void trace(double t, const char* kind, const std::string& entity,
             const std::string& resource) {
    if (!opt_.collect_trace) return;
    trace_.push_back({t, kind, entity, resource.empty() ? "-" : resource});
  }

  const Scenario& sc_;
  DistributionPattern pattern_;
  double throughput_;
  SimOptions opt_;
  RttModel rtt_;
  DbState db_state_;
  Rng rng_;
  des::Engine engine_;
  std::vector<des::Resource*> db_resources_;
  std::vector<des::Resource*> machine_resources_;
  std::vector<StageRt> stages_;
  int join_stage_ = -1;
  std::map<std::string, int> consumer_of_;
  std::map<std::string, int> produced_;
  std::map<std::string, std::uint64_t> class_counter_;
  std::vector<int> writes_in_flight_;
  std::vector<TraceRecord> trace_;
  int violations_ = 0;
};

} // namespace

SimResult run_simulation(const Scenario& scenario, const DistributionPattern& pattern,
                         double product_throughput_bps, std::uint64_t seed,
                         const SimOptions& options) {
  Simulation sim(scenario, pattern, product_throughput_bps, seed, options);
  return sim.run();
}

void write_trace_file(const std::filesystem::path& path,
                      const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file: " + path.string());
  out << "time_s,event_kind,entity_id,resource_id\n";
  char buf[32];
  for (const TraceRecord& r : trace) {
    auto res = std::to_chars(buf, buf + sizeof buf, r.time_s);
    out.write(buf, res.ptr - buf);
    out << ',' << r.kind << ',' << r.entity << ',' << r.resource << '\n';
  }
}

} // namespace odapsim
