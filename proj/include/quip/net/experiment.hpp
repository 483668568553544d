// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "quip/net/config.hpp"
#include "quip/net/network.hpp"

namespace quip::net {

struct RunResult {
  uint64_t seed = 0;
  std::vector<RequestRecord> requests;
  std::vector<std::string> node_names;
  uint64_t trace_hash = 0;
  uint64_t events = 0;
  SimTime end_time = 0;
  size_t outstanding = 0;  // requests not completed when the run stopped
  DeliveryCheck deliveries;
  uint64_t ledger_audits = 0;
  uint64_t ledger_violations = 0;
  fabric::FabricStats fabric;
  NetworkStats network;
  bool aborted = false;  // a simulation error stopped the run; results are partial
  std::string error;
};

// Builds the network, injects the seeded demand and runs: up to the demand
// duration, then (with drain) until every request has completed.
// `log` receives the event trace when given.
RunResult run_experiment(const TopologySpec &topology, const DemandSpec &demand, uint64_t seed,
                         std::ostream *log = nullptr);

struct WindowMetrics {
  size_t count = 0;
  double throughput = 0;  // requests per second
  double mean_latency_s = 0;
  double p50_s = 0;
  double p95_s = 0;
  bool empty = true;
  std::vector<double> latencies_s;  // sorted
};

// Requests that both started and completed inside [start_s, end_s];
// latency is start - submit.
WindowMetrics compute_metrics(const std::vector<RequestRecord> &requests, double start_s, double end_s);
// Smallest sample x with F(x) >= p, F the empirical CDF (nearest rank).
double percentile(const std::vector<double> &sorted, double p);
// Fraction of samples <= x.
double empirical_cdf(const std::vector<double> &sorted, double x);
// Mean of complete - start over completed requests; 0 if none.
double mean_execution_s(const std::vector<RequestRecord> &requests);

void write_run_csv(std::ostream &out, const RunResult &r);
std::string result_json(const RunResult &r, const WindowMetrics &m);
// Hex form used in result files and logs.
std::string hash_hex(uint64_t h);

struct SweepCell {
  uint32_t units = 0;
  double rate = 0;
  uint64_t seed = 0;
};

struct SweepRow {
  SweepCell cell;
  WindowMetrics metrics;
  double mean_execution_s = 0;
  uint64_t trace_hash = 0;
  bool failed = false;
  bool resumed = false;  // read back from an earlier, interrupted sweep
  std::string error;
};

std::vector<SweepCell> sweep_cells(const ExperimentConfig &config);

struct SweepOptions {
  unsigned workers = 1;
  bool resume = true;
  std::function<void(const SweepRow &)> progress;
};

// Runs every cell into out_dir/cells/<cell>/ and writes summary.csv,
// summary_means.csv and one cdf_u<units>_r<rate>.csv per (units, rate).
std::vector<SweepRow> run_sweep(const ExperimentConfig &config, const std::filesystem::path &out_dir,
                                const SweepOptions &options);

std::string cell_name(const SweepCell &c);
std::string format_rate(double rate);

}  // namespace quip::net
