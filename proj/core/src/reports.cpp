#include "odapsim/reports.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "odapsim/version.hpp"

namespace odapsim {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_mmss(double seconds) {
  const long long total = std::llround(seconds);
  return std::to_string(total / 60) + "'" + (total % 60 < 10 ? "0" : "") +
         std::to_string(total % 60) + "''";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for hashing: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& output) {
  json doc;
  doc["tool_version"] = manifest.tool_version.empty() ? kVersion : manifest.tool_version;
  doc["scenario_path"] = manifest.scenario_path;
  doc["scenario_hash"] = manifest.scenario_hash;
  doc["created_at"] = manifest.created_at;
  doc["plan"] = manifest.plan;
  doc["outputs"] = manifest.outputs;
  const auto path = manifest_path_for(output);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << doc.dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& manifest_file) {
  std::ifstream in(manifest_file);
  if (!in) throw IoError("cannot open manifest: " + manifest_file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_file.string() + ": " + e.what());
  }
  RunManifest m;
  m.tool_version = doc.value("tool_version", "");
  m.scenario_path = doc.value("scenario_path", "");
  m.scenario_hash = doc.value("scenario_hash", "");
  m.created_at = doc.value("created_at", "");
  if (doc.contains("plan")) {
    for (auto it = doc["plan"].begin(); it != doc["plan"].end(); ++it) {
      m.plan[it.key()] = it.value().get<std::string>();
    }
  }
  if (doc.contains("outputs")) {
    for (const auto& o : doc["outputs"]) m.outputs.push_back(o.get<std::string>());
  }
  return m;
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sweep csv: " + path.string());
  out << "pattern_id,pattern_bits,throughput_bps,replicate,seed,makespan_s\n";
  for (const SweepRecord& r : records) {
    out << r.pattern_id << ',' << r.pattern_bits << ',' << format_double(r.throughput_bps)
        << ',' << r.replicate << ',' << r.seed << ',' << format_double(r.makespan_s)
        << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  return out;
}

double parse_double_field(const std::string& s, const std::string& context) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(context + ": bad numeric field '" + s + "'");
  }
  return v;
}

} // namespace

std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep csv: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (line != "pattern_id,pattern_bits,throughput_bps,replicate,seed,makespan_s") {
    throw ParseError(path.string() + ": unexpected header '" + line + "'");
  }
  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 6) throw ParseError(ctx + ": expected 6 fields");
    SweepRecord r;
    r.pattern_id = static_cast<std::uint32_t>(parse_double_field(fields[0], ctx));
    r.pattern_bits = fields[1];
    r.throughput_bps = parse_double_field(fields[2], ctx);
    r.replicate = static_cast<int>(parse_double_field(fields[3], ctx));
    r.seed = std::stoull(fields[4]);
    r.makespan_s = parse_double_field(fields[5], ctx);
    records.push_back(std::move(r));
  }
  return records;
}

void write_factor_csv(const std::filesystem::path& path, const FactorModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write factor csv: " + path.string());
  out << "term,coefficient_s,std_err,t,p,significant\n";
  for (const FactorEstimate& e : model.estimates) {
    out << e.term.name() << ',' << format_double(e.coefficient_s) << ','
        << format_double(e.std_err) << ',' << format_double(e.t_stat) << ','
        << format_double(e.p_value) << ',' << (e.significant ? "true" : "false") << '\n';
  }
}

namespace {

std::map<std::uint32_t, double> cell_means_at(const std::vector<SweepRecord>& records,
                                              double throughput_bps) {
  std::map<std::uint32_t, std::pair<double, int>> acc;
  for (const SweepRecord& r : records) {
    if (r.throughput_bps != throughput_bps) continue;
    auto& [sum, n] = acc[r.pattern_id];
    sum += r.makespan_s;
    ++n;
  }
  std::map<std::uint32_t, double> means;
  for (const auto& [id, sn] : acc) means[id] = sn.first / sn.second;
  return means;
}

} // namespace

PlotFiles write_plot_data(const std::filesystem::path& out,
                          const std::vector<SweepRecord>& records,
                          double throughput_bps) {
  const auto means = cell_means_at(records, throughput_bps);
  if (means.empty()) {
    throw ValidationError("no sweep records at throughput " +
                          format_double(throughput_bps) + " bps");
  }
  PlotFiles files;
  files.curve = out;
  files.oda_reference = out;
  files.oda_reference += ".oda";

  std::ofstream curve(files.curve);
  if (!curve) throw IoError("cannot write plot data: " + files.curve.string());
  for (const auto& [id, mean] : means) {
    curve << id << ' ' << format_double(mean) << '\n';
  }

  auto oda_it = means.find(0);
  if (oda_it == means.end()) {
    throw ValidationError("sweep lacks the all-database pattern needed for the reference line");
  }
  std::ofstream ref(files.oda_reference);
  if (!ref) throw IoError("cannot write plot data: " + files.oda_reference.string());
  for (const auto& [id, mean] : means) {
    ref << id << ' ' << format_double(oda_it->second) << '\n';
  }
  return files;
}

std::vector<ThroughputSummary> summarize_by_throughput(
    const std::vector<SweepRecord>& records) {
  std::set<double> throughputs;
  std::uint32_t max_id = 0;
  for (const SweepRecord& r : records) {
    throughputs.insert(r.throughput_bps);
    max_id = std::max(max_id, r.pattern_id);
  }
  std::vector<ThroughputSummary> rows;
  for (double t : throughputs) {
    const auto means = cell_means_at(records, t);
    ThroughputSummary row;
    row.throughput_bps = t;
    if (auto it = means.find(0); it != means.end()) row.oda_mean_s = it->second;
    if (auto it = means.find(max_id); it != means.end()) row.full_mean_s = it->second;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [id, mean] : means) {
      if (mean < best) {
        best = mean;
        row.best_pattern_id = id;
      }
    }
    row.best_mean_s = best;
    for (const SweepRecord& r : records) {
      if (r.pattern_id == row.best_pattern_id) {
        row.best_pattern_bits = r.pattern_bits;
        break;
      }
    }
    rows.push_back(std::move(row));
  }
  // Highest throughput first, matching the usual presentation.
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.throughput_bps > b.throughput_bps;
  });
  return rows;
}

std::string summary_table_text(const std::vector<ThroughputSummary>& rows) {
  std::ostringstream out;
  out << "throughput_bps  all_database  all_product  best            best_pattern\n";
  for (const ThroughputSummary& r : rows) {
    std::ostringstream line;
    line << format_double(r.throughput_bps) << "  " << format_mmss(r.oda_mean_s) << " ("
         << format_double(r.oda_mean_s) << "s)  " << format_mmss(r.full_mean_s) << " ("
         << format_double(r.full_mean_s) << "s)  " << format_mmss(r.best_mean_s) << " ("
         << format_double(r.best_mean_s) << "s)  id=" << r.best_pattern_id << " bits="
         << r.best_pattern_bits;
    out << line.str() << "\n";
  }
  return out.str();
}

} // namespace odapsim
