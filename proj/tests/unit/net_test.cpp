// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quip/error.hpp"
#include "quip/net/experiment.hpp"
#include "quip/protocols/programs.hpp"

namespace quip::net {
namespace {

namespace fs = std::filesystem;
namespace names = protocols::names;
using v1q::Role;

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kMalformedDocument;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("quip_net_test_" + name);
  fs::remove_all(p);
  return p;
}

// ---- topology -------------------------------------------------------------

TEST(Topology, SmallStar) {
  Network nw(hub_and_spoke(2, 5, 1), 1);
  EXPECT_EQ(nw.device_count(), 3u);
  EXPECT_EQ(nw.spec().links.size(), 2u);
  EXPECT_EQ(nw.end_nodes(), (std::vector<uint32_t>{1, 2}));
  EXPECT_EQ(nw.controller_node(), 0u);
  EXPECT_EQ(nw.device(0).bsm_units(), 1u);
}

TEST(Topology, SixteenNodeStar) {
  for (uint32_t units : {1u, 8u}) {
    Network nw(hub_and_spoke(16, 5, units), 1);
    EXPECT_EQ(nw.device_count(), 17u);
    EXPECT_EQ(nw.device(0).role(), Role::kHub);
    EXPECT_EQ(nw.device(0).bsm_units(), units);
    for (uint32_t e : nw.end_nodes()) {
      EXPECT_EQ(nw.device(e).role(), Role::kEndNode);
      EXPECT_EQ(nw.uplink(e), 1u);
      EXPECT_EQ(nw.control_delay(e), 25'000);
    }
  }
}

TEST(Topology, ChainHasRouterInTheMiddle) {
  Network nw(chain(5), 1);
  EXPECT_EQ(nw.device_count(), 5u);
  EXPECT_EQ(nw.device(2).role(), Role::kRouter);
  EXPECT_EQ(nw.device(2).processor().table_size(names::kPortConn), 0u);
  EXPECT_EQ(nw.device(1).processor().compiled(), nw.device(3).processor().compiled());  // one program per role
  EXPECT_EQ(nw.control_delay(4), 3 * 25'000);
}

TEST(Topology, ControlRoutesPointAtTheController) {
  Network nw(chain(5), 1);
  const uint32_t ctl = nw.controller_node();
  EXPECT_EQ(nw.node_name(ctl), "hub1");
  auto route = [&](uint32_t node) {
    return nw.device(node).processor().table_lookup(names::kCtrlRoute, {ctl}).params.at(0);
  };
  EXPECT_EQ(route(0), 1u);    // a -> hub1
  EXPECT_EQ(route(1), 510u);  // hub1 -> CPU
  EXPECT_EQ(route(2), 1u);    // r -> hub1
  EXPECT_EQ(route(3), 1u);    // hub2 -> r
  EXPECT_EQ(route(4), 1u);    // b -> hub2
}

TEST(Topology, PortsAreAssignedWhenOmitted) {
  TopologySpec t;
  t.nodes = {{"h", Role::kHub, 2}, {"x", Role::kEndNode, 0}, {"y", Role::kEndNode, 0}};
  t.links = {{"x", 0, "h", 0, 3}, {"h", 0, "y", 0, 4}};
  const TopologySpec r = resolve(t);
  EXPECT_EQ(r.links[0].a_port, 1u);
  EXPECT_EQ(r.links[0].b_port, 1u);
  EXPECT_EQ(r.links[1].a_port, 2u);
  EXPECT_EQ(r.links[1].b_port, 1u);
  EXPECT_EQ(r.controller, "h");
}

TEST(Topology, RejectsBadShapes) {
  auto bad = [](TopologySpec t) { return code_of([&] { resolve(t); }); };
  TopologySpec star = hub_and_spoke(2, 5, 1);

  TopologySpec t = star;
  t.nodes[0].bsm_units = 0;
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links.push_back({"e1", 2, "hub", 3, 5});  // end node with two links
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links.push_back({"e1", 2, "e2", 2, 5});  // no hub on the link
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links[1].b_port = 1;  // hub port 1 used twice
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links[0].length_km = 0;
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.nodes.push_back({"h2", Role::kHub, 1});  // disconnected
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.controller = "e1";
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links[0].b = "nowhere";
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.links[0].a_port = 510;
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);

  t = star;
  t.nodes[1].bsm_units = 1;
  EXPECT_EQ(bad(t), ErrorCode::kInvalidTopology);
}

TEST(Topology, PlanThroughTheChain) {
  Network nw(chain(5), 1);
  const auto p = nw.plan(0, 4);
  ASSERT_TRUE(p.has_value());
  ASSERT_EQ(p->hubs.size(), 2u);
  ASSERT_EQ(p->routers.size(), 1u);
  EXPECT_EQ(p->hubs[0].hub, 1u);
  EXPECT_EQ(p->hubs[0].port_head, 1u);
  EXPECT_EQ(p->hubs[0].port_tail, 2u);
  EXPECT_EQ(p->routers[0].router, 2u);
  EXPECT_EQ(p->routers[0].up_port, 1u);
  EXPECT_EQ(p->routers[0].down_port, 2u);
  EXPECT_EQ(p->hubs[1].hub, 3u);
  const auto back = nw.plan(4, 0);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->routers[0].up_port, 2u);
  EXPECT_FALSE(nw.plan(0, 0).has_value());
  EXPECT_FALSE(nw.plan(0, 2).has_value());  // routers are not endpoints
}

// ---- demand ---------------------------------------------------------------

TEST(Demand, ZeroRateIsEmpty) {
  DemandSpec d;
  d.rate = 0;
  EXPECT_TRUE(generate_demand(d, {1, 2, 3}, 5).empty());
}

TEST(Demand, SameSeedSameSchedule) {
  DemandSpec d;
  d.rate = 300;
  const auto a = generate_demand(d, {1, 2, 3, 4}, 9);
  const auto b = generate_demand(d, {1, 2, 3, 4}, 9);
  const auto c = generate_demand(d, {1, 2, 3, 4}, 10);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].src, b[i].src);
    EXPECT_EQ(a[i].dst, b[i].dst);
  }
  EXPECT_NE(a.size() == c.size() && a[0].time == c[0].time, true);
}

TEST(Demand, ArrivalsAreOrderedAndInsideTheDuration) {
  DemandSpec d;
  d.rate = 500;
  const auto items = generate_demand(d, {1, 2, 3}, 3);
  for (size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(items[i].id, i + 1);
    EXPECT_NE(items[i].src, items[i].dst);
    EXPECT_LT(items[i].time, 2'000'000'000);
    if (i) EXPECT_GE(items[i].time, items[i - 1].time);
  }
}

// Poisson count: mean r*T and variance r*T, so the mean of 1000 counts is
// within 3 * sqrt(r*T / 1000) of r*T.
TEST(Demand, MeanCountOverSeeds) {
  DemandSpec d;
  d.rate = 40;
  d.duration_s = 2;
  const double expected = 80;
  const int seeds = 1000;
  double sum = 0;
  for (int s = 0; s < seeds; ++s) sum += static_cast<double>(generate_demand(d, {1, 2}, 1000 + s).size());
  const double mean = sum / seeds;
  EXPECT_NEAR(mean, expected, 3 * std::sqrt(expected / seeds));
}

TEST(Demand, OrderedPairsAreUniform) {
  DemandSpec d;
  d.rate = 20'000;
  const std::vector<uint32_t> ends{1, 2, 3, 4};
  const auto items = generate_demand(d, ends, 77);
  std::map<std::pair<uint32_t, uint32_t>, double> count;
  for (const auto &i : items) ++count[{i.src, i.dst}];
  ASSERT_EQ(count.size(), 12u);
  // Pearson chi-square, 11 degrees of freedom; 0.999 quantile is 31.26.
  const double e = static_cast<double>(items.size()) / 12;
  double chi2 = 0;
  for (const auto &[k, c] : count) chi2 += (c - e) * (c - e) / e;
  EXPECT_LT(chi2, 31.26);
}

TEST(Demand, Validation) {
  DemandSpec d;
  d.rate = -1;
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::kInvalidConfig);
  d = DemandSpec{};
  d.window_end_s = 3;
  EXPECT_EQ(code_of([&] { validate(d); }), ErrorCode::kInvalidConfig);
}

// ---- metrics --------------------------------------------------------------

RequestRecord rec(uint32_t id, double submit, double start, double complete) {
  RequestRecord r;
  r.id = id;
  r.submit = std::llround(submit * 1e9);
  r.start = start < 0 ? -1 : std::llround(start * 1e9);
  r.complete = complete < 0 ? -1 : std::llround(complete * 1e9);
  return r;
}

TEST(Metrics, ThroughputCountsWindowedCompletions) {
  std::vector<RequestRecord> rs;
  for (uint32_t i = 0; i < 30; ++i) rs.push_back(rec(i, 1.0 + i * 0.02, 1.0 + i * 0.02 + 0.01, 1.0 + i * 0.02 + 0.025));
  const WindowMetrics m = compute_metrics(rs, 1, 2);
  EXPECT_EQ(m.count, 30u);
  EXPECT_DOUBLE_EQ(m.throughput, 30);
  EXPECT_NEAR(m.mean_latency_s, 0.01, 1e-12);
}

TEST(Metrics, BothEndsMustBeInsideTheWindow) {
  const std::vector<RequestRecord> rs{
      rec(1, 0.9, 0.99, 1.01),   // started before the window
      rec(2, 1.9, 1.99, 2.01),   // completed after it
      rec(3, 1.1, 1.2, -1),      // never completed
      rec(4, 1.0, 1.0, 2.0),     // exactly on the edges
      rec(5, 0.5, 1.5, 1.6),     // submitted early, started inside
  };
  const WindowMetrics m = compute_metrics(rs, 1, 2);
  EXPECT_EQ(m.count, 2u);
  EXPECT_EQ(m.latencies_s, (std::vector<double>{0.0, 1.0}));
}

TEST(Metrics, EmptyWindow) {
  const WindowMetrics m = compute_metrics({rec(1, 0.1, 0.2, 0.3)}, 1, 2);
  EXPECT_TRUE(m.empty);
  EXPECT_EQ(m.throughput, 0);
  EXPECT_EQ(m.mean_latency_s, 0);
}

TEST(Metrics, CdfIsRightContinuous) {
  const std::vector<double> xs{0.1, 0.2, 0.2, 0.4};
  EXPECT_EQ(empirical_cdf(xs, 0.05), 0);
  EXPECT_EQ(empirical_cdf(xs, 0.1), 0.25);
  EXPECT_EQ(empirical_cdf(xs, 0.2), 0.75);
  EXPECT_EQ(empirical_cdf(xs, 0.3), 0.75);
  EXPECT_EQ(empirical_cdf(xs, 0.4), 1.0);
  EXPECT_EQ(percentile(xs, 0.5), 0.2);
  EXPECT_EQ(percentile(xs, 0.25), 0.1);
  EXPECT_EQ(percentile(xs, 0.95), 0.4);
  EXPECT_EQ(percentile(xs, 0.0), 0.1);
}

// ---- network --------------------------------------------------------------

TEST(Network, OneRequestOnAStar) {
  Network nw(hub_and_spoke(2, 5, 1), 7);
  nw.submit({1, 1000, 1, 2, 50});
  nw.engine().run();
  const RequestRecord &r = nw.requests().at(0);
  ASSERT_TRUE(r.completed());
  EXPECT_EQ(r.start, 1000 + 25'000);  // one fibre hop to the controller
  const double exec = static_cast<double>(r.complete - r.start) / 1e9;
  EXPECT_GT(exec, 0.005);
  EXPECT_LT(exec, 0.05);
  const DeliveryCheck c = nw.check_deliveries();
  EXPECT_EQ(c.objects, 50u);
  EXPECT_TRUE(c.ok()) << (c.problems.empty() ? "" : c.problems[0]);
  EXPECT_EQ(c.bell_counts[0] + c.bell_counts[2], 0u);  // only Psi states are heralded
  EXPECT_EQ(nw.fabric().live_pairs(), 0u);
  EXPECT_TRUE(nw.fabric().consistent());
  EXPECT_EQ(nw.controller().violations(), 0u);
  EXPECT_EQ(nw.device(0).groups().size(), 0u);
}

TEST(Network, ChainConfigurationAndTeardown) {
  Network nw(chain(5), 3);
  nw.submit({1, 0, 0, 4, 5});
  // REQUEST from b needs 75 us to reach hub1; configuration takes up to
  // another 75 us.
  nw.engine().run_until(100'000 + 100'000);
  ASSERT_TRUE(nw.requests()[0].started());
  const uint16_t cid = nw.requests()[0].cid;
  v1q::DeviceShell &hub1 = nw.device(1);
  v1q::DeviceShell &r = nw.device(2);
  v1q::DeviceShell &hub2 = nw.device(3);
  ASSERT_EQ(hub1.groups().size(), 1u);
  ASSERT_EQ(hub2.groups().size(), 1u);
  EXPECT_EQ(hub1.groups()[0], (v1q::BsmGroup{cid, 1, 2}));
  EXPECT_EQ(hub2.groups()[0], (v1q::BsmGroup{cid, 1, 2}));
  ASSERT_NE(r.find_group(cid), nullptr);
  EXPECT_EQ(*r.find_group(cid), (v1q::BsmGroup{cid, 1, 2}));
  EXPECT_EQ(r.processor().table_size(names::kPortConn) + r.processor().table_size(names::kCidConn), 3u);
  EXPECT_EQ(nw.device(0).processor().table_lookup(names::kConn, {1}).params,
            (std::vector<uint64_t>{cid, 1, 5}));
  EXPECT_EQ(nw.device(4).processor().table_lookup(names::kConn, {1}).params,
            (std::vector<uint64_t>{cid, 0, 5}));

  nw.engine().run();
  ASSERT_TRUE(nw.requests()[0].completed());
  EXPECT_EQ(hub1.groups().size(), 0u);
  EXPECT_EQ(hub2.groups().size(), 0u);
  EXPECT_EQ(r.find_group(cid), nullptr);
  EXPECT_EQ(r.processor().table_size(names::kPortConn) + r.processor().table_size(names::kCidConn), 0u);
  EXPECT_EQ(nw.device(0).processor().table_size(names::kConn), 0u);
  EXPECT_EQ(nw.device(4).processor().table_size(names::kConn), 0u);
  EXPECT_EQ(nw.fabric().live_pairs(), 0u);
  EXPECT_EQ(nw.controller().ledger().active(), 0u);
  EXPECT_TRUE(nw.check_deliveries().ok());
  EXPECT_EQ(nw.check_deliveries().objects, 5u);
}

TEST(Network, SecondRequestOnSameUnitWaits) {
  Network nw(hub_and_spoke(4, 5, 1), 5);
  nw.submit({1, 0, 1, 2, 10});
  nw.submit({2, 0, 3, 4, 10});
  nw.engine().run();
  const auto &rs = nw.requests();
  ASSERT_TRUE(rs[0].completed() && rs[1].completed());
  EXPECT_GT(rs[1].start, rs[0].complete);
  EXPECT_TRUE(nw.check_deliveries().ok());
}

// ---- experiment ------------------------------------------------------------

TEST(Experiment, ZeroDemandIsIdle) {
  DemandSpec d;
  const RunResult a = run_experiment(hub_and_spoke(4, 5, 2), d, 1);
  const RunResult b = run_experiment(hub_and_spoke(4, 5, 2), d, 1);
  EXPECT_TRUE(a.requests.empty());
  EXPECT_NE(a.trace_hash, 0u);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
}

TEST(Experiment, RerunIsIdentical) {
  DemandSpec d;
  d.rate = 60;
  d.duration_s = 0.5;
  d.window_start_s = 0.1;
  d.window_end_s = 0.5;
  const RunResult a = run_experiment(hub_and_spoke(6, 5, 2), d, 21);
  const RunResult b = run_experiment(hub_and_spoke(6, 5, 2), d, 21);
  const RunResult c = run_experiment(hub_and_spoke(6, 5, 2), d, 22);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
  EXPECT_NE(a.trace_hash, c.trace_hash);
  std::ostringstream x, y;
  write_run_csv(x, a);
  write_run_csv(y, b);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_EQ(a.outstanding, 0u);
  EXPECT_TRUE(a.deliveries.ok());
  for (const auto &r : a.requests) {
    EXPECT_LE(r.submit, r.start);
    EXPECT_LE(r.start, r.complete);
  }
}

TEST(Experiment, WithoutDrainRequestsStayIncomplete) {
  DemandSpec d;
  d.rate = 400;
  d.duration_s = 0.2;
  d.window_start_s = 0;
  d.window_end_s = 0.2;
  d.drain = false;
  const RunResult r = run_experiment(hub_and_spoke(4, 5, 1), d, 2);
  EXPECT_GT(r.outstanding, 0u);
  EXPECT_FALSE(r.aborted);
  EXPECT_TRUE(r.deliveries.ok());
}

TEST(Experiment, RunCsvLayout) {
  RunResult r;
  r.node_names = {"hub", "e1", "e2"};
  r.requests = {rec(1, 0.001, 0.002, 0.003), rec(2, 0.004, -1, -1)};
  r.requests[0].src = 1;
  r.requests[0].dst = 2;
  r.requests[1].src = 2;
  r.requests[1].dst = 1;
  std::ostringstream out;
  write_run_csv(out, r);
  EXPECT_EQ(out.str(),
            "request_id,src,dst,submit_ns,start_ns,complete_ns\n"
            "1,e1,e2,1000000,2000000,3000000\n"
            "2,e2,e1,4000000,,\n");
}

// ---- config ----------------------------------------------------------------

TEST(Config, ParsesAndRoundTrips) {
  const ExperimentConfig c = parse_config(R"({
    "topology": {"kind": "chain", "length_km": 3, "bsm_units": 2},
    "physics": {"t_prep_ns": 9000},
    "demand": {"rate": 12.5, "window_s": [0.5, 1.5], "repetitions": 3},
    "seed": 4,
    "sweep": {"bsm_units": [1, 2], "rate": [1, 2.5]}
  })");
  EXPECT_EQ(c.topology.nodes.size(), 5u);
  EXPECT_EQ(c.topology.physics.t_prep_ns, 9000);
  EXPECT_EQ(c.demand.rate, 12.5);
  EXPECT_EQ(c.demand.window_start_s, 0.5);
  EXPECT_EQ(*c.seed, 4u);
  EXPECT_EQ(c.sweep.rates, (std::vector<double>{1, 2.5}));
  const std::string once = config_to_json(c);
  EXPECT_EQ(config_to_json(parse_config(once)), once);
  EXPECT_EQ(sweep_cells(c).size(), 2u * 2u * 3u);
  EXPECT_EQ(sweep_cells(c)[1].seed, 5u);
}

TEST(Config, ErrorsCarryAPath) {
  auto message = [](const std::string &text) {
    try {
      parse_config(text);
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(R"({"demand": {"rate": "fast"}})").find("/demand/rate"), std::string::npos);
  EXPECT_NE(message(R"({"demand": {"speed": 1}})").find("/demand/speed"), std::string::npos);
  EXPECT_NE(message(R"({"physics": {"swap_success": 2}})").find("/physics/swap_success"), std::string::npos);
  EXPECT_NE(message(R"({"topology": {"kind": "ring"}})").find("/topology/kind"), std::string::npos);
  EXPECT_NE(message(R"({"topology": {"bsm_units": 0}})").find("/topology"), std::string::npos);
  EXPECT_NE(message("{oops").find("not valid JSON"), std::string::npos);
  EXPECT_EQ(code_of([] { sweep_cells(parse_config("{}")); }), ErrorCode::kInvalidConfig);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char *name : {"hub_star.json", "chain.json", "calibration.json"}) {
    const ExperimentConfig c = load_config(fs::path(QUIP_SOURCE_DIR) / "configs" / name);
    EXPECT_TRUE(c.seed.has_value()) << name;
    EXPECT_FALSE(c.topology.programs_dir.empty()) << name;
    Network nw(c.topology, *c.seed);  // programs load from disk
    EXPECT_GE(nw.device_count(), 3u);
  }
}

// ---- sweep -----------------------------------------------------------------

ExperimentConfig small_sweep() {
  ExperimentConfig c = parse_config(R"({
    "topology": {"kind": "hub_and_spoke", "end_nodes": 4, "bsm_units": 1},
    "demand": {"rate": 50, "duration_s": 0.3, "window_s": [0.1, 0.3], "repetitions": 2},
    "seed": 3,
    "sweep": {"bsm_units": [1, 2], "rate": [40, 80]}
  })");
  return c;
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  const fs::path one = scratch("w1");
  const fs::path many = scratch("w3");
  SweepOptions o;
  o.workers = 1;
  const auto a = run_sweep(small_sweep(), one, o);
  o.workers = 3;
  const auto b = run_sweep(small_sweep(), many, o);
  ASSERT_EQ(a.size(), 8u);
  EXPECT_EQ(slurp(one / "summary.csv"), slurp(many / "summary.csv"));
  EXPECT_EQ(slurp(one / "summary_means.csv"), slurp(many / "summary_means.csv"));
  EXPECT_EQ(slurp(one / "cells/u2_r80_s4/run.csv"), slurp(many / "cells/u2_r80_s4/run.csv"));
  EXPECT_TRUE(fs::exists(one / "cdf_u1_r40.csv"));
  fs::remove_all(one);
  fs::remove_all(many);
}

TEST(Sweep, ResumeSkipsFinishedCells) {
  const fs::path out = scratch("resume");
  SweepOptions o;
  const auto first = run_sweep(small_sweep(), out, o);
  const std::string summary = slurp(out / "summary.csv");
  // Simulate an interruption: one cell never finished.
  fs::remove(out / "cells/u1_r80_s3/result.json");
  size_t resumed = 0;
  o.progress = [&](const SweepRow &r) { resumed += r.resumed ? 1 : 0; };
  const auto second = run_sweep(small_sweep(), out, o);
  EXPECT_EQ(resumed, 7u);
  EXPECT_EQ(slurp(out / "summary.csv"), summary);
  fs::remove_all(out);
}

}  // namespace
}  // namespace quip::net
