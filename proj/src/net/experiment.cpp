// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/net/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "quip/error.hpp"

namespace quip::net {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr SimTime kDrainStep = 10'000'000;  // 10 ms

SimTime to_ns(double s) { return static_cast<SimTime>(std::llround(s * 1e9)); }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_file(const fs::path &path, const std::string &content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::kInvalidConfig, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

RunResult run_experiment(const TopologySpec &topology, const DemandSpec &demand, uint64_t seed, std::ostream *log) {
  validate(demand);
  RunResult r;
  r.seed = seed;
  Network nw(topology, seed);
  for (size_t i = 0; i < nw.device_count(); ++i) r.node_names.push_back(nw.node_name(static_cast<uint32_t>(i)));
  nw.engine().set_log(log);
  try {
    for (const DemandItem &d : generate_demand(demand, nw.end_nodes(), seed)) nw.submit(d);
    const SimTime duration = to_ns(demand.duration_s);
    nw.engine().run_until(duration);
    if (demand.drain) {
      const SimTime limit = duration + to_ns(demand.drain_limit_s);
      SimTime t = duration;
      while (nw.outstanding() > 0 && !nw.engine().empty() && t < limit) {
        t = std::min(t + kDrainStep, limit);
        nw.engine().run_until(t);
      }
      // Only teardown work can be left once nothing is outstanding.
      if (nw.outstanding() == 0) nw.engine().run();
    }
  } catch (const Error &e) {
    r.aborted = true;
    r.error = e.what();
  }
  r.requests = nw.requests();
  r.trace_hash = nw.engine().trace_hash();
  r.events = nw.engine().processed();
  r.end_time = nw.engine().now();
  r.outstanding = nw.outstanding();
  r.deliveries = nw.check_deliveries();
  r.ledger_audits = nw.controller().audits();
  r.ledger_violations = nw.controller().violations();
  r.fabric = nw.fabric().stats();
  r.network = nw.stats();
  return r;
}

double percentile(const std::vector<double> &sorted, double p) {
  if (sorted.empty()) return 0;
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<size_t>(std::ceil(p * n));
  rank = std::clamp<size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double empirical_cdf(const std::vector<double> &sorted, double x) {
  if (sorted.empty()) return 0;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

WindowMetrics compute_metrics(const std::vector<RequestRecord> &requests, double start_s, double end_s) {
  WindowMetrics m;
  const SimTime w0 = to_ns(start_s);
  const SimTime w1 = to_ns(end_s);
  for (const RequestRecord &r : requests) {
    if (!r.completed() || r.start < w0 || r.complete > w1) continue;
    m.latencies_s.push_back(static_cast<double>(r.start - r.submit) / 1e9);
  }
  std::sort(m.latencies_s.begin(), m.latencies_s.end());
  m.count = m.latencies_s.size();
  m.empty = m.count == 0;
  if (m.empty || !(end_s > start_s)) return m;
  m.throughput = static_cast<double>(m.count) / (end_s - start_s);
  double sum = 0;
  for (double l : m.latencies_s) sum += l;
  m.mean_latency_s = sum / static_cast<double>(m.count);
  m.p50_s = percentile(m.latencies_s, 0.50);
  m.p95_s = percentile(m.latencies_s, 0.95);
  return m;
}

double mean_execution_s(const std::vector<RequestRecord> &requests) {
  double sum = 0;
  size_t n = 0;
  for (const RequestRecord &r : requests) {
    if (!r.completed()) continue;
    sum += static_cast<double>(r.complete - r.start) / 1e9;
    ++n;
  }
  return n == 0 ? 0 : sum / static_cast<double>(n);
}

void write_run_csv(std::ostream &out, const RunResult &r) {
  out << "request_id,src,dst,submit_ns,start_ns,complete_ns\n";
  auto name = [&](uint32_t n) { return n < r.node_names.size() ? r.node_names[n] : std::to_string(n); };
  for (const RequestRecord &q : r.requests) {
    out << q.id << ',' << name(q.src) << ',' << name(q.dst) << ',' << q.submit << ',';
    if (q.started()) out << q.start;
    out << ',';
    if (q.completed()) out << q.complete;
    out << '\n';
  }
}

std::string result_json(const RunResult &r, const WindowMetrics &m) {
  size_t completed = 0;
  for (const RequestRecord &q : r.requests) completed += q.completed() ? 1 : 0;
  json j;
  j["seed"] = r.seed;
  j["trace_hash"] = hash_hex(r.trace_hash);
  j["events"] = r.events;
  j["end_time_ns"] = r.end_time;
  j["requests"] = r.requests.size();
  j["completed"] = completed;
  j["outstanding"] = r.outstanding;
  j["mean_execution_s"] = mean_execution_s(r.requests);
  j["deliveries"] = {{"objects", r.deliveries.objects},
                     {"mismatched", r.deliveries.mismatched},
                     {"missing", r.deliveries.missing},
                     {"bell_counts", r.deliveries.bell_counts}};
  j["ledger"] = {{"audits", r.ledger_audits}, {"violations", r.ledger_violations}};
  j["fabric"] = {{"attempts", r.fabric.attempts},
                 {"heralded_pairs", r.fabric.heralded_pairs},
                 {"swaps_succeeded", r.fabric.swaps_succeeded},
                 {"swaps_failed", r.fabric.swaps_failed},
                 {"releases", r.fabric.releases}};
  j["window"] = {{"count", m.count},
                 {"throughput", m.throughput},
                 {"mean_latency_s", m.mean_latency_s},
                 {"p50_s", m.p50_s},
                 {"p95_s", m.p95_s},
                 {"empty", m.empty},
                 {"latencies_s", m.latencies_s}};
  j["aborted"] = r.aborted;
  if (r.aborted) j["error"] = r.error;
  return j.dump(2) + "\n";
}

std::string format_rate(double rate) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", rate);
  return buf;
}

std::string cell_name(const SweepCell &c) {
  return "u" + std::to_string(c.units) + "_r" + format_rate(c.rate) + "_s" + std::to_string(c.seed);
}

std::vector<SweepCell> sweep_cells(const ExperimentConfig &config) {
  std::vector<uint32_t> units = config.sweep.bsm_units;
  if (units.empty()) {
    for (const NodeSpec &n : config.topology.nodes) {
      if (n.role == v1q::Role::kHub) {
        units.push_back(n.bsm_units);
        break;
      }
    }
  }
  std::vector<double> rates = config.sweep.rates;
  if (rates.empty()) rates.push_back(config.demand.rate);
  if (!config.seed) throw Error(ErrorCode::kInvalidConfig, "/seed: no seed given");
  std::vector<SweepCell> cells;
  for (uint32_t u : units) {
    for (double rate : rates) {
      for (uint32_t rep = 0; rep < config.demand.repetitions; ++rep) cells.push_back({u, rate, *config.seed + rep});
    }
  }
  return cells;
}

namespace {

bool read_cell(const fs::path &dir, SweepRow &row) {
  std::ifstream in(dir / "result.json");
  if (!in) return false;
  try {
    const json j = json::parse(in);
    if (j.at("aborted").get<bool>()) return false;
    const json &w = j.at("window");
    row.metrics.count = w.at("count").get<size_t>();
    row.metrics.throughput = w.at("throughput").get<double>();
    row.metrics.mean_latency_s = w.at("mean_latency_s").get<double>();
    row.metrics.p50_s = w.at("p50_s").get<double>();
    row.metrics.p95_s = w.at("p95_s").get<double>();
    row.metrics.empty = w.at("empty").get<bool>();
    row.metrics.latencies_s = w.at("latencies_s").get<std::vector<double>>();
    row.mean_execution_s = j.at("mean_execution_s").get<double>();
    row.trace_hash = std::stoull(j.at("trace_hash").get<std::string>(), nullptr, 16);
  } catch (const std::exception &) {
    return false;
  }
  row.resumed = true;
  return true;
}

SweepRow run_cell(const ExperimentConfig &base, const SweepCell &cell, const fs::path &dir) {
  SweepRow row;
  row.cell = cell;
  ExperimentConfig c = base;
  set_hub_units(c.topology, cell.units);
  c.demand.rate = cell.rate;
  c.seed = cell.seed;
  c.sweep = {};
  try {
    const RunResult r = run_experiment(c.topology, c.demand, cell.seed);
    row.metrics = compute_metrics(r.requests, c.demand.window_start_s, c.demand.window_end_s);
    row.mean_execution_s = mean_execution_s(r.requests);
    row.trace_hash = r.trace_hash;
    if (r.aborted) {
      row.failed = true;
      row.error = r.error;
    }
    fs::create_directories(dir);
    std::ostringstream csv;
    write_run_csv(csv, r);
    write_file(dir / "run.csv", csv.str());
    write_file(dir / "run_config.json", config_to_json(c));
    // Written last: its presence marks the cell as done.
    if (!row.failed) write_file(dir / "result.json", result_json(r, row.metrics));
  } catch (const std::exception &e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig &config, const fs::path &out_dir, const SweepOptions &options) {
  const std::vector<SweepCell> cells = sweep_cells(config);
  std::vector<SweepRow> rows(cells.size());
  fs::create_directories(out_dir / "cells");
  std::atomic<size_t> next{0};
  std::mutex progress_mu;
  auto worker = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      const fs::path dir = out_dir / "cells" / cell_name(cells[i]);
      SweepRow row;
      row.cell = cells[i];
      if (!(options.resume && read_cell(dir, row))) row = run_cell(config, cells[i], dir);
      rows[i] = std::move(row);
      if (options.progress) {
        std::lock_guard lock(progress_mu);
        options.progress(rows[i]);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (auto &t : threads) t.join();

  std::ostringstream summary;
  summary << "units,rate,seed,throughput,mean_latency,p50,p95\n";
  std::ostringstream failures;
  failures << "units,rate,seed,error\n";
  std::map<std::pair<uint32_t, double>, std::vector<const SweepRow *>> groups;
  for (const SweepRow &r : rows) {
    if (r.failed) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      failures << r.cell.units << ',' << format_rate(r.cell.rate) << ',' << r.cell.seed << ',' << err << '\n';
      continue;
    }
    summary << r.cell.units << ',' << format_rate(r.cell.rate) << ',' << r.cell.seed << ',' << num(r.metrics.throughput)
            << ',' << num(r.metrics.mean_latency_s) << ',' << num(r.metrics.p50_s) << ',' << num(r.metrics.p95_s)
            << '\n';
    groups[{r.cell.units, r.cell.rate}].push_back(&r);
  }
  write_file(out_dir / "summary.csv", summary.str());
  write_file(out_dir / "failures.csv", failures.str());

  std::ostringstream means;
  means << "units,rate,seeds,throughput_mean,throughput_sd,mean_latency_mean,p50_mean,p95_mean,execution_mean_s\n";
  for (const auto &[key, group] : groups) {
    const auto k = static_cast<double>(group.size());
    double tp = 0, tp2 = 0, lat = 0, p50 = 0, p95 = 0, exec = 0;
    std::vector<double> pooled;
    for (const SweepRow *r : group) {
      tp += r->metrics.throughput;
      tp2 += r->metrics.throughput * r->metrics.throughput;
      lat += r->metrics.mean_latency_s;
      p50 += r->metrics.p50_s;
      p95 += r->metrics.p95_s;
      exec += r->mean_execution_s;
      pooled.insert(pooled.end(), r->metrics.latencies_s.begin(), r->metrics.latencies_s.end());
    }
    const double mean_tp = tp / k;
    const double sd = group.size() > 1 ? std::sqrt(std::max(0.0, (tp2 - k * mean_tp * mean_tp) / (k - 1))) : 0;
    means << key.first << ',' << format_rate(key.second) << ',' << group.size() << ',' << num(mean_tp) << ','
          << num(sd) << ',' << num(lat / k) << ',' << num(p50 / k) << ',' << num(p95 / k) << ',' << num(exec / k)
          << '\n';
    std::sort(pooled.begin(), pooled.end());
    std::ostringstream cdf;
    cdf << "latency_s,cdf\n";
    for (size_t i = 0; i < pooled.size(); ++i) {
      if (i + 1 < pooled.size() && pooled[i + 1] == pooled[i]) continue;
      cdf << num(pooled[i]) << ',' << num(static_cast<double>(i + 1) / static_cast<double>(pooled.size())) << '\n';
    }
    write_file(out_dir / ("cdf_u" + std::to_string(key.first) + "_r" + format_rate(key.second) + ".csv"), cdf.str());
  }
  write_file(out_dir / "summary_means.csv", means.str());
  return rows;
}

}  // namespace quip::net
