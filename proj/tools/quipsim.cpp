// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

// quipsim: validate programs, run and sweep experiments, replay runs,
// poke at match+action tables and dump event traces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"
#include "quip/net/experiment.hpp"
#include "quip/p4/processor.hpp"

namespace fs = std::filesystem;
using namespace quip;

namespace {

enum Exit { kOk = 0, kValidation = 1, kConfig = 2, kRuntime = 3 };

int exit_for(const Error &e) {
  switch (e.code()) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidTopology:
      return kConfig;
    case ErrorCode::kMalformedDocument:
    case ErrorCode::kUnsupportedConstruct:
    case ErrorCode::kDanglingReference:
    case ErrorCode::kWidthOutOfRange:
      return kValidation;
    default:
      return kRuntime;
  }
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path &p, const std::string &content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kInvalidConfig, "cannot write " + p.string());
}

net::ExperimentConfig config_with_seed(const std::string &path, std::optional<uint64_t> seed) {
  net::ExperimentConfig c = net::load_config(path);
  if (seed) c.seed = seed;
  if (!c.seed) throw Error(ErrorCode::kInvalidConfig, path + ": /seed: no seed in the config and no --seed");
  c.demand.base_seed = *c.seed;
  return c;
}

struct RunFiles {
  std::string csv;
  std::string result;
  net::RunResult run;
  net::WindowMetrics metrics;
};

RunFiles run_once(const net::ExperimentConfig &c, std::ostream *log = nullptr) {
  RunFiles f;
  f.run = net::run_experiment(c.topology, c.demand, *c.seed, log);
  f.metrics = net::compute_metrics(f.run.requests, c.demand.window_start_s, c.demand.window_end_s);
  std::ostringstream csv;
  net::write_run_csv(csv, f.run);
  f.csv = csv.str();
  f.result = net::result_json(f.run, f.metrics);
  return f;
}

int cmd_validate(const std::vector<std::string> &paths) {
  int rc = kOk;
  for (const std::string &p : paths) {
    try {
      const bmv2::Program prog = bmv2::load_program_file(p);
      std::cout << p << ": ok (" << (prog.target == bmv2::Target::kV1Quantum ? "v1quantum" : "classical") << ")\n";
    } catch (const Error &e) {
      std::cerr << p << ": " << e.what() << "\n";
      rc = kValidation;
    }
  }
  return rc;
}

int cmd_run(const std::string &config, std::optional<uint64_t> seed, const fs::path &out) {
  const net::ExperimentConfig c = config_with_seed(config, seed);
  const RunFiles f = run_once(c);
  fs::create_directories(out);
  write(out / "run.csv", f.csv);
  write(out / "run_config.json", net::config_to_json(c));
  write(out / "result.json", f.result);
  size_t completed = 0;
  for (const auto &r : f.run.requests) completed += r.completed() ? 1 : 0;
  std::cout << "seed=" << *c.seed << " requests=" << f.run.requests.size() << " completed=" << completed
            << " throughput=" << f.metrics.throughput << " mean_latency_s=" << f.metrics.mean_latency_s
            << " deliveries=" << f.run.deliveries.objects << " mismatched=" << f.run.deliveries.mismatched
            << " trace=" << net::hash_hex(f.run.trace_hash) << "\n";
  if (f.run.aborted) {
    std::cerr << "run aborted: " << f.run.error << "\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_sweep(const std::string &config, std::optional<uint64_t> seed, const fs::path &out, unsigned workers,
              bool resume) {
  const net::ExperimentConfig c = config_with_seed(config, seed);
  net::SweepOptions opt;
  opt.workers = workers;
  opt.resume = resume;
  opt.progress = [](const net::SweepRow &r) {
    std::cout << net::cell_name(r.cell) << (r.failed ? " FAILED " + r.error : r.resumed ? " skipped" : " done")
              << " throughput=" << r.metrics.throughput << "\n";
  };
  fs::create_directories(out);
  write(out / "sweep_config.json", net::config_to_json(c));
  const auto rows = net::run_sweep(c, out, opt);
  size_t failed = 0;
  for (const auto &r : rows) failed += r.failed ? 1 : 0;
  std::cout << rows.size() << " cells, " << failed << " failed\n";
  return failed == 0 ? kOk : kRuntime;
}

int cmd_replay(const fs::path &dir) {
  const fs::path cfg = dir / "run_config.json";
  if (!fs::exists(cfg)) throw Error(ErrorCode::kInvalidConfig, cfg.string() + ": not found");
  const net::ExperimentConfig c = config_with_seed(cfg.string(), std::nullopt);
  const RunFiles f = run_once(c);
  bool same = true;
  if (slurp(dir / "run.csv") != f.csv) {
    std::cout << "run.csv differs\n";
    same = false;
  }
  if (fs::exists(dir / "result.json") && slurp(dir / "result.json") != f.result) {
    std::cout << "result.json differs\n";
    same = false;
  }
  std::cout << (same ? "replay identical" : "replay differs") << " trace=" << net::hash_hex(f.run.trace_hash) << "\n";
  return same ? kOk : kRuntime;
}

int cmd_trace(const std::string &config, std::optional<uint64_t> seed) {
  const net::ExperimentConfig c = config_with_seed(config, seed);
  const RunFiles f = run_once(c, &std::cout);
  std::cout << "# trace " << net::hash_hex(f.run.trace_hash) << "\n";
  return f.run.aborted ? kRuntime : kOk;
}

std::vector<uint64_t> numbers(const std::string &text) {
  std::vector<uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item, nullptr, 0));
  }
  return out;
}

std::vector<std::string> split(const std::string &text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string join(const std::vector<uint64_t> &v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Operations run in command-line order: insert TABLE:KEYS:ACTION:PARAMS,
// delete TABLE:KEYS, lookup TABLE:KEYS; --list dumps every table at the end.
int cmd_table(const std::string &program, const std::vector<std::pair<std::string, std::string>> &ops, bool list) {
  p4::Processor proc(bmv2::load_program_file(program));
  for (const auto &[op, arg] : ops) {
    const auto parts = split(arg, ':');
    if (parts.size() < 2) throw Error(ErrorCode::kInvalidConfig, "--" + op + " " + arg + ": expected TABLE:KEYS...");
    if (op == "insert") {
      if (parts.size() < 3) throw Error(ErrorCode::kInvalidConfig, "--insert " + arg + ": expected TABLE:KEYS:ACTION[:PARAMS]");
      proc.table_insert({parts[0], numbers(parts[1]), parts[2], parts.size() > 3 ? numbers(parts[3]) : std::vector<uint64_t>{}});
      std::cout << "inserted " << arg << "\n";
    } else if (op == "delete") {
      proc.table_delete(parts[0], numbers(parts[1]));
      std::cout << "deleted " << arg << "\n";
    } else {
      const p4::LookupResult r = proc.table_lookup(parts[0], numbers(parts[1]));
      std::cout << parts[0] << "[" << parts[1] << "] -> " << (r.hit ? "hit " : "miss ") << r.action << "("
                << join(r.params) << ")\n";
    }
  }
  if (list) {
    for (const auto &pipe : proc.program().pipelines) {
      for (const auto &t : pipe.tables) {
        std::cout << pipe.name << "." << t.name << " (" << proc.table_size(t.name) << "/" << t.max_size << ")\n";
        for (const p4::TableEntry &e : proc.table_entries(t.name)) {
          std::cout << "  " << join(e.key) << " => " << e.action << "(" << join(e.params) << ")\n";
        }
      }
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"quipsim: quantum network simulator driven by BMv2 JSON programs"};
  app.require_subcommand(1);

  std::vector<std::string> programs;
  auto *validate = app.add_subcommand("validate", "Check BMv2 JSON programs");
  validate->add_option("programs", programs, "Program files")->required();

  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  unsigned workers = 1;
  bool no_resume = false;

  auto *run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Seed; defaults to the config's");
  run->add_option("--out", out, "Output directory")->required();

  auto *sweep = app.add_subcommand("sweep", "Run every (units, rate, seed) cell of a config");
  sweep->add_option("--config", config, "Experiment config (JSON)")->required();
  sweep->add_option("--seed", seed, "Base seed; defaults to the config's");
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--workers", workers, "Parallel runs")->check(CLI::Range(1u, 256u));
  sweep->add_flag("--no-resume", no_resume, "Rerun cells that already have results");

  auto *replay = app.add_subcommand("replay", "Rerun a stored run and compare its outputs");
  replay->add_option("--out", out, "Directory written by 'run'")->required();

  auto *trace = app.add_subcommand("trace", "Print the event log of a run");
  trace->add_option("--config", config, "Experiment config (JSON)")->required();
  trace->add_option("--seed", seed, "Seed; defaults to the config's");

  std::string program;
  std::vector<std::pair<std::string, std::string>> ops;
  bool list = false;
  auto *table = app.add_subcommand("table", "Apply table operations to a program and show the result");
  table->add_option("program", program, "Program file")->required();
  for (const char *op : {"insert", "delete", "lookup"}) {
    table->add_option_function<std::vector<std::string>>(
        std::string("--") + op,
        [&ops, op](const std::vector<std::string> &args) {
          for (const auto &a : args) ops.emplace_back(op, a);
        },
        "TABLE:KEYS[:ACTION[:PARAMS]]");
  }
  table->add_flag("--list", list, "Print every table's entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*validate) return cmd_validate(programs);
    if (*run) return cmd_run(config, seed, out);
    if (*sweep) return cmd_sweep(config, seed, out, workers, !no_resume);
    if (*replay) return cmd_replay(out);
    if (*trace) return cmd_trace(config, seed);
    if (*table) return cmd_table(program, ops, list);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
