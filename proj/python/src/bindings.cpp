// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"
#include "quip/fabric/bell.hpp"
#include "quip/net/config.hpp"
#include "quip/net/experiment.hpp"
#include "quip/p4/processor.hpp"

namespace py = pybind11;
using namespace quip;

namespace {

py::bytes to_bytes(const std::vector<uint8_t> &v) {
  return py::bytes(reinterpret_cast<const char *>(v.data()), v.size());
}

std::vector<uint8_t> from_bytes(const py::bytes &b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict request_dict(const net::RunResult &r, const net::RequestRecord &q) {
  py::dict d;
  d["id"] = q.id;
  d["src"] = r.node_names.at(q.src);
  d["dst"] = r.node_names.at(q.dst);
  d["pairs"] = q.pairs;
  d["submit_ns"] = q.submit;
  d["start_ns"] = q.started() ? py::object(py::int_(q.start)) : py::object(py::none());
  d["complete_ns"] = q.completed() ? py::object(py::int_(q.complete)) : py::object(py::none());
  return d;
}

py::dict metrics_dict(const net::WindowMetrics &m) {
  py::dict d;
  d["count"] = m.count;
  d["throughput"] = m.throughput;
  d["mean_latency_s"] = m.mean_latency_s;
  d["p50_s"] = m.p50_s;
  d["p95_s"] = m.p95_s;
  return d;
}

py::dict run_dict(const net::RunResult &r, const net::DemandSpec &demand) {
  py::dict d;
  d["seed"] = r.seed;
  d["trace_hash"] = net::hash_hex(r.trace_hash);
  d["events"] = r.events;
  d["end_time_ns"] = r.end_time;
  d["outstanding"] = r.outstanding;
  d["aborted"] = r.aborted;
  d["error"] = r.error;
  d["ledger_violations"] = r.ledger_violations;
  py::dict del;
  del["objects"] = r.deliveries.objects;
  del["mismatched"] = r.deliveries.mismatched;
  del["missing"] = r.deliveries.missing;
  del["bell_counts"] = r.deliveries.bell_counts;
  d["deliveries"] = del;
  d["metrics"] = metrics_dict(net::compute_metrics(r.requests, demand.window_start_s, demand.window_end_s));
  d["mean_execution_s"] = net::mean_execution_s(r.requests);
  py::list reqs;
  for (const auto &q : r.requests) reqs.append(request_dict(r, q));
  d["requests"] = reqs;
  std::ostringstream csv;
  net::write_run_csv(csv, r);
  d["csv"] = csv.str();
  return d;
}

net::ExperimentConfig load(const std::string &config, bool is_path) {
  return is_path ? net::load_config(config) : net::parse_config(config);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "quipsim core: BMv2 program runtime and quantum network simulation";

  static py::exception<Error> quip_error(m, "QuipError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error &e) {
      py::object exc = quip_error;
      py::object instance = exc(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(quip_error.ptr(), instance.ptr());
    }
  });

  m.def("compose_bell", [](int b1, int b2, int mo) {
    return static_cast<int>(fabric::compose_bell(static_cast<fabric::BellIndex>(b1), static_cast<fabric::BellIndex>(b2),
                                                 static_cast<fabric::BellIndex>(mo)));
  }, py::arg("b1"), py::arg("b2"), py::arg("m"), "End-to-end Bell index after a swap.");

  m.def("validate_program", [](const std::string &text) {
    const bmv2::Program p = bmv2::load_program(text);
    return bmv2::serialize_program(p);
  }, py::arg("text"), "Load and validate a BMv2 JSON program; returns its canonical form.");

  py::class_<p4::PacketInstance>(m, "Packet")
      .def_property_readonly("payload", [](const p4::PacketInstance &p) { return to_bytes(p.payload); });

  py::class_<p4::Processor>(m, "Processor")
      .def(py::init([](const std::string &text) { return std::make_unique<p4::Processor>(bmv2::load_program(text)); }),
           py::arg("program_json"))
      .def("parse", [](const p4::Processor &p, const py::bytes &raw) { return p.parse(from_bytes(raw)); })
      .def("deparse", [](const p4::Processor &p, const p4::PacketInstance &pkt) { return to_bytes(p.deparse(pkt)); })
      .def("execute", [](p4::Processor &p, const std::string &pipeline, p4::PacketInstance &pkt) {
        p.execute_pipeline(pipeline, pkt);
      })
      .def("get", py::overload_cast<const p4::PacketInstance &, std::string_view, std::string_view>(
                      &p4::Processor::get, py::const_))
      .def("set", py::overload_cast<p4::PacketInstance &, std::string_view, std::string_view, uint64_t>(
                      &p4::Processor::set, py::const_))
      .def("is_valid", &p4::Processor::is_valid)
      .def("table_insert", [](p4::Processor &p, const std::string &table, std::vector<uint64_t> key,
                              const std::string &action, std::vector<uint64_t> params) {
        p.table_insert({table, std::move(key), action, std::move(params)});
      }, py::arg("table"), py::arg("key"), py::arg("action"), py::arg("params") = std::vector<uint64_t>{})
      .def("table_delete", &p4::Processor::table_delete)
      .def("table_lookup", [](const p4::Processor &p, const std::string &table, const std::vector<uint64_t> &key) {
        const auto r = p.table_lookup(table, key);
        return py::make_tuple(r.hit, r.action, r.params);
      })
      .def("table_size", &p4::Processor::table_size)
      .def("register_read", &p4::Processor::register_read)
      .def("register_write", &p4::Processor::register_write);

  m.def("run", [](const std::string &config, std::optional<uint64_t> seed, bool is_path) {
    const net::ExperimentConfig c = load(config, is_path);
    const std::optional<uint64_t> s = seed ? seed : c.seed;
    if (!s) throw Error(ErrorCode::kInvalidConfig, "no seed given and none in the config");
    net::RunResult r;
    {
      py::gil_scoped_release release;
      r = net::run_experiment(c.topology, c.demand, *s);
    }
    return run_dict(r, c.demand);
  }, py::arg("config"), py::arg("seed") = py::none(), py::arg("is_path") = false,
     "Run one experiment from a JSON config (text, or a path with is_path=True).");

  m.def("sweep", [](const std::string &config_path, const std::string &out_dir, unsigned workers, bool resume) {
    const net::ExperimentConfig c = net::load_config(config_path);
    net::SweepOptions opts;
    opts.workers = workers;
    opts.resume = resume;
    std::vector<net::SweepRow> rows;
    {
      py::gil_scoped_release release;
      rows = net::run_sweep(c, out_dir, opts);
    }
    py::list out;
    for (const auto &row : rows) {
      py::dict d = metrics_dict(row.metrics);
      d["units"] = row.cell.units;
      d["rate"] = row.cell.rate;
      d["seed"] = row.cell.seed;
      d["failed"] = row.failed;
      d["resumed"] = row.resumed;
      d["trace_hash"] = net::hash_hex(row.trace_hash);
      out.append(d);
    }
    return out;
  }, py::arg("config_path"), py::arg("out_dir"), py::arg("workers") = 1, py::arg("resume") = true);
}
