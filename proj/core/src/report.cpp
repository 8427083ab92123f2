#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "binclust/harness.hpp"

namespace binclust {

namespace {

using nlohmann::json;

json record_to_json(const RunRecord& r) {
  return json{{"config_key", r.config_key},
              {"dataset", r.dataset},
              {"representation", r.representation},
              {"clusterer", r.clusterer},
              {"params", r.params},
              {"seed", r.seed},
              {"n_clusters_effective", r.n_clusters_effective},
              {"h_train", r.h_train},
              {"h_test", r.h_test},
              {"vm_train", r.vm_train},
              {"vm_test", r.vm_test},
              {"wall_time", r.wall_time},
              {"failed", r.failed},
              {"error", r.error}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  j.at("config_key").get_to(r.config_key);
  j.at("dataset").get_to(r.dataset);
  j.at("representation").get_to(r.representation);
  j.at("clusterer").get_to(r.clusterer);
  j.at("params").get_to(r.params);
  j.at("seed").get_to(r.seed);
  j.at("n_clusters_effective").get_to(r.n_clusters_effective);
  j.at("h_train").get_to(r.h_train);
  j.at("h_test").get_to(r.h_test);
  j.at("vm_train").get_to(r.vm_train);
  j.at("vm_test").get_to(r.vm_test);
  j.at("wall_time").get_to(r.wall_time);
  j.at("failed").get_to(r.failed);
  j.at("error").get_to(r.error);
  return r;
}

std::string real_field(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Keeps the delimited files single-line-per-record and comma-clean.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return s;
}

void write_delimited(const std::vector<RunRecord>& records,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "config_key,dataset,representation,clusterer,params,seed,"
         "n_clusters_effective,h_train,h_test,vm_train,vm_test,wall_time,"
         "failed,error\n";
  for (const RunRecord& r : records) {
    out << r.config_key << ',' << r.dataset << ',' << r.representation << ','
        << r.clusterer << ',' << r.params << ',' << r.seed << ','
        << r.n_clusters_effective << ',' << real_field(r.h_train) << ','
        << real_field(r.h_test) << ',' << real_field(r.vm_train) << ','
        << real_field(r.vm_test) << ',' << real_field(r.wall_time) << ','
        << (r.failed ? 1 : 0) << ',' << sanitize(r.error) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path best_path_for(const std::filesystem::path& path) {
  std::filesystem::path best = path;
  const std::string ext = best.extension().string();
  best.replace_extension();
  best += ".best";
  best += ext;
  return best;
}

}  // namespace

void append_run_record(const std::filesystem::path& path, const RunRecord& r) {
  // A crash can leave the file without a trailing newline; appending onto that
  // torn tail would corrupt the next record, so start on a fresh line.
  bool needs_newline = false;
  {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (in && in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      needs_newline = in.get() != '\n';
    }
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path.string() + " for appending");
  if (needs_newline) out << '\n';
  out << record_to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RunRecord> load_run_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    // A line truncated by an interrupt is not an error; the run it would
    // have recorded simply repeats.
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    try {
      out.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw IoError("bad record in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

ReportSummary emit_report(std::vector<RunRecord> records,
                          const std::filesystem::path& path, ReportFormat format) {
  if (records.empty()) throw InvalidSpec("no records to report");
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.config_key < b.config_key;
  });

  ReportSummary summary;
  summary.n_records = records.size();
  std::map<std::string, const RunRecord*> best;
  std::vector<std::string> dataset_order;
  for (const RunRecord& r : records) {
    if (r.failed) {
      ++summary.n_failed;
      continue;
    }
    auto [it, fresh] = best.try_emplace(r.dataset, &r);
    if (fresh) {
      dataset_order.push_back(r.dataset);
    } else if (r.h_train > it->second->h_train) {
      // Ties keep the earlier record, which has the lower config key.
      it->second = &r;
    }
  }
  for (const std::string& ds : dataset_order) summary.best_rows.push_back(*best[ds]);

  if (format == ReportFormat::Delimited) {
    write_delimited(records, path);
    write_delimited(summary.best_rows, best_path_for(path));
  } else {
    json j;
    j["records"] = json::array();
    for (const RunRecord& r : records) j["records"].push_back(record_to_json(r));
    j["best_rows"] = json::array();
    for (const RunRecord& r : summary.best_rows) j["best_rows"].push_back(record_to_json(r));
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
  }
  return summary;
}

std::vector<RunRecord> load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RunRecord> out;
  try {
    json j;
    in >> j;
    for (const json& rec : j.at("records")) out.push_back(record_from_json(rec));
  } catch (const json::exception& e) {
    throw IoError("malformed report " + path.string() + ": " + e.what());
  }
  return out;
}

void emit_ablation_pivot(const std::vector<RunRecord>& records,
                         const std::filesystem::path& path) {
  if (records.empty()) throw InvalidSpec("no records to pivot");

  // representation follows the "<method>-<count>" naming
  auto method_of = [](const std::string& rep) { return rep.substr(0, rep.find('-')); };
  auto count_of = [](const std::string& rep) -> std::size_t {
    const auto dash = rep.find('-');
    return dash == std::string::npos ? 0 : std::stoull(rep.substr(dash + 1));
  };

  std::set<std::size_t> counts;
  for (const RunRecord& r : records) counts.insert(count_of(r.representation));

  std::vector<std::pair<std::string, std::string>> row_order;  // dataset, method
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, const RunRecord*>>
      cells;
  for (const RunRecord& r : records) {
    const auto key = std::make_pair(r.dataset, method_of(r.representation));
    auto [it, fresh] = cells.try_emplace(key);
    if (it->second.empty() && fresh) row_order.push_back(key);
    it->second[count_of(r.representation)] = &r;
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "dataset,method";
  for (std::size_t c : counts) out << ",h_train_" << c;
  out << '\n';
  for (const auto& key : row_order) {
    out << key.first << ',' << key.second;
    const auto& row = cells[key];
    for (std::size_t c : counts) {
      out << ',';
      const auto hit = row.find(c);
      if (hit != row.end() && !hit->second->failed) out << real_field(hit->second->h_train);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace binclust
