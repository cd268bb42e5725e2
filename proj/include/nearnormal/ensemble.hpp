#pragma once

// Seeded Hermitian-pair ensembles: a worker pool over the (dim, scale, trial)
// grid, canonical CSV output and resumable line-delimited records.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "nearnormal/io.hpp"
#include "nearnormal/oracle.hpp"
#include "nearnormal/pipeline.hpp"

namespace nearnormal {

struct EnsembleSpec {
  std::vector<Index> dims{4, 8, 16, 32};
  std::vector<double> scales{1e-4, 1e-3, 1e-2, 1e-1};
  int trials = 25;
  std::uint64_t seed = 20240501;
};

struct EnsembleOptions {
  PipelineConfig config;
  int jobs = 1;
  bool oracle = true;        ///< oracle column for dims <= kOracleMaxDim
  int oracle_restarts = 200;
  bool timing = false;       ///< fill runtime_ms (breaks byte-for-byte reproducibility)
};

struct TrialKey {
  Index dim = 0;
  double scale = 0.0;
  int trial = 0;

  auto tie() const { return std::tie(dim, scale, trial); }
  bool operator<(const TrialKey& o) const { return tie() < o.tie(); }
  bool operator==(const TrialKey& o) const { return tie() == o.tie(); }
};

struct TrialResult {
  TrialKey key;
  bool ok = false;
  double comm_norm = 0.0;  ///< ||[X,Y]||
  double distance = 0.0;   ///< ||X-X'|| + ||Y-Y'||
  double ratio = 0.0;
  double lower_bound = 0.0;
  std::optional<double> oracle;
  double runtime_ms = 0.0;
  std::string error;
  nlohmann::json record;  ///< full line-delimited record
};

inline constexpr const char* kEnsembleHeader =
    "dim,scale,trial,comm_norm,distance,ratio,lower_bound,oracle_dist_or_blank,runtime_ms";

/// Shortest round-trip text for a double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::vector<TrialKey> ensemble_keys(const EnsembleSpec& spec) {
  std::vector<TrialKey> keys;
  for (Index d : spec.dims)
    for (double s : spec.scales)
      for (int t = 0; t < spec.trials; ++t) keys.push_back({d, s, t});
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

/// Restart seed of the oracle for one trial, independent of the pair's stream.
inline std::uint64_t oracle_seed(std::uint64_t master_seed, const TrialKey& key) {
  auto rng = trial_rng(~master_seed, key.dim, key.scale, static_cast<std::uint64_t>(key.trial));
  return rng();
}

inline TrialResult run_trial(const EnsembleSpec& spec, const TrialKey& key, const EnsembleOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult out;
  out.key = key;
  const RandomPair rp = random_pair(key.dim, key.scale, spec.seed, static_cast<std::uint64_t>(key.trial));
  const Matrix a = rp.X + kI * rp.Y;
  out.comm_norm = rp.commutator;
  out.lower_bound = lower_bound(a);
  const nlohmann::json seeds = {{"master_seed", spec.seed}, {"dim", key.dim}, {"scale", key.scale},
                                {"trial", key.trial}};
  try {
    const PairResult pr = hermitian_pair_form(rp.X, rp.Y, opt.config);
    out.ok = true;
    out.distance = pr.report.distance;
    out.ratio = pr.report.ratio;
    out.record = run_record(pr.report, opt.config, seeds);
  } catch (const Error& e) {
    out.error = e.what();
    out.record = {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion},
                  {"config", config_json(opt.config)}, {"seeds", seeds},
                  {"error", {{"stage", e.stage()}, {"message", e.message()}}}};
  }
  if (opt.oracle && key.dim <= kOracleMaxDim)
    out.oracle = nearest_normal_search(a, opt.oracle_restarts, 400, oracle_seed(spec.seed, key)).distance;
  out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json row = {{"comm_norm", out.comm_norm}, {"lower_bound", out.lower_bound}, {"ok", out.ok}};
  if (out.ok) {
    row["distance"] = out.distance;
    row["ratio"] = out.ratio;
  }
  if (out.oracle) row["oracle"] = *out.oracle;
  row["runtime_ms"] = out.runtime_ms;
  out.record["key"] = {{"dim", key.dim}, {"scale", key.scale}, {"trial", key.trial}};
  out.record["row"] = std::move(row);
  return out;
}

/// Rebuilds a result from a record written by a previous run.
inline std::optional<TrialResult> result_from_record(const nlohmann::json& rec) {
  try {
    TrialResult out;
    const auto& k = rec.at("key");
    out.key = {k.at("dim").get<Index>(), k.at("scale").get<double>(), k.at("trial").get<int>()};
    const auto& row = rec.at("row");
    out.comm_norm = row.at("comm_norm").get<double>();
    out.lower_bound = row.at("lower_bound").get<double>();
    out.ok = row.at("ok").get<bool>();
    if (out.ok) {
      out.distance = row.at("distance").get<double>();
      out.ratio = row.at("ratio").get<double>();
    }
    if (row.contains("oracle")) out.oracle = row.at("oracle").get<double>();
    out.runtime_ms = row.at("runtime_ms").get<double>();
    out.record = rec;
    return out;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

/// Completed records of a line-delimited file; unparsable lines (a crash
/// mid-write) are skipped.
inline std::map<TrialKey, TrialResult> read_records(const std::string& path) {
  std::map<TrialKey, TrialResult> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded()) continue;
    if (auto r = result_from_record(rec)) out[r->key] = std::move(*r);
  }
  return out;
}

inline std::string csv_row(const TrialResult& r, bool timing) {
  std::string s = std::to_string(r.key.dim) + "," + format_double(r.key.scale) + "," + std::to_string(r.key.trial) +
                  "," + format_double(r.comm_norm) + ",";
  if (r.ok) s += format_double(r.distance) + "," + format_double(r.ratio);
  else s += ",";
  s += "," + format_double(r.lower_bound) + ",";
  if (r.oracle) s += format_double(*r.oracle);
  s += ",";
  if (timing) s += format_double(r.runtime_ms);
  return s;
}

inline std::string ensemble_csv(const std::vector<TrialResult>& results, bool timing) {
  std::string s = std::string(kEnsembleHeader) + "\n";
  for (const auto& r : results) s += csv_row(r, timing) + "\n";
  return s;
}

/// Runs every trial of the grid on `jobs` workers. Results come back in
/// canonical key order; records are appended to `records_path` (if set) in
/// the same order as soon as a contiguous prefix is complete.
inline std::vector<TrialResult> run_ensemble(const EnsembleSpec& spec, const EnsembleOptions& opt,
                                             const std::string& records_path = {}, bool resume = false) {
  const std::vector<TrialKey> keys = ensemble_keys(spec);
  std::map<TrialKey, TrialResult> done;
  if (resume && !records_path.empty()) done = read_records(records_path);

  std::vector<std::optional<TrialResult>> results(keys.size());
  std::vector<size_t> todo;
  for (size_t i = 0; i < keys.size(); ++i) {
    auto it = done.find(keys[i]);
    if (it != done.end()) results[i] = it->second;
    else todo.push_back(i);
  }

  std::ofstream rec_out;
  if (!records_path.empty()) {
    // A crash can leave a partial last line; start appending on a fresh one.
    bool partial = false;
    if (resume) {
      std::ifstream in(records_path, std::ios::binary | std::ios::ate);
      if (in && in.tellg() > 0) {
        in.seekg(-1, std::ios::end);
        partial = in.get() != '\n';
      }
    }
    rec_out.open(records_path, resume ? std::ios::app : std::ios::trunc);
    if (!rec_out) throw IoError("ensemble", "cannot write " + records_path);
    if (partial) rec_out << "\n";
  }
  std::mutex mu;
  size_t next_write = 0;  // index into todo
  std::vector<bool> finished(todo.size(), false);
  auto flush_ready = [&] {
    while (next_write < todo.size() && finished[next_write]) {
      if (rec_out.is_open()) rec_out << results[todo[next_write]]->record.dump() << "\n" << std::flush;
      ++next_write;
    }
  };

  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (size_t k = cursor++; k < todo.size(); k = cursor++) {
      TrialResult r = run_trial(spec, keys[todo[k]], opt);
      std::lock_guard<std::mutex> lock(mu);
      results[todo[k]] = std::move(r);
      finished[k] = true;
      flush_ready();
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(std::max<size_t>(todo.size(), 1))));
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }
  if (rec_out.is_open() && !rec_out) throw IoError("ensemble", "write failed for " + records_path);

  std::vector<TrialResult> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace nearnormal
