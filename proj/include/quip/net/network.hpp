// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quip/control/controller.hpp"
#include "quip/fabric/engine.hpp"
#include "quip/fabric/fabric.hpp"
#include "quip/net/demand.hpp"
#include "quip/net/topology.hpp"
#include "quip/protocols/wire.hpp"
#include "quip/v1q/device.hpp"

namespace quip::net {

using fabric::SimTime;

struct RequestRecord {
  uint32_t id = 0;
  uint32_t src = 0;
  uint32_t dst = 0;
  uint32_t pairs = 0;
  SimTime submit = -1;  // demand injection at the endpoints
  SimTime start = -1;   // scheduled by the controller
  SimTime complete = -1;  // second COMPLETE reached the controller
  uint16_t cid = 0;

  bool started() const { return start >= 0; }
  bool completed() const { return complete >= 0; }
};

// One end of a delivered entanglement object, with the fabric's view of the
// local qubit taken just before the host measured it.
struct DeliveryRecord {
  uint32_t request_id = 0;
  uint16_t cid = 0;
  uint32_t seq = 0;
  uint32_t node = 0;
  uint32_t qubit = 0;
  uint8_t bell = 0;
  SimTime time = 0;
  bool has_truth = false;
  fabric::QubitRef partner;
  uint8_t truth_bell = 0;
  uint64_t pair_id = 0;
};

struct DeliveryCheck {
  uint64_t objects = 0;     // (request, seq) with both ends delivered
  uint64_t mismatched = 0;  // partner, Bell index or pair disagree with the fabric
  uint64_t missing = 0;     // pairs of completed requests not delivered at both ends
  std::array<uint64_t, 4> bell_counts{};
  std::vector<std::string> problems;  // first few, for diagnostics

  bool ok() const { return mismatched == 0 && missing == 0; }
};

struct NetworkStats {
  uint64_t classical_packets = 0;
  uint64_t undeliverable = 0;
  uint64_t host_notices = 0;
  uint64_t config_actions = 0;
  uint64_t swap_rejections = 0;
};

// A built topology: devices running their programs, the quantum fabric, the
// classical links and the controller, all on one event engine.
class Network {
 public:
  Network(const TopologySpec &spec, uint64_t seed);
  Network(const Network &) = delete;
  Network &operator=(const Network &) = delete;

  const TopologySpec &spec() const { return spec_; }
  fabric::EventEngine &engine() { return engine_; }
  fabric::QuantumFabric &fabric() { return *fabric_; }
  control::Controller &controller() { return *controller_; }
  const control::Controller &controller() const { return *controller_; }
  size_t device_count() const { return devices_.size(); }
  v1q::DeviceShell &device(uint32_t node) { return *devices_.at(node); }
  uint32_t node_id(const std::string &name) const;
  const std::string &node_name(uint32_t node) const { return spec_.nodes.at(node).name; }
  uint32_t controller_node() const { return controller_node_; }
  std::vector<uint32_t> end_nodes() const;
  uint32_t uplink(uint32_t end_node) const { return uplink_.at(end_node); }

  // Shortest path between two end nodes through hubs and routers.
  std::optional<control::PathPlan> plan(uint32_t src, uint32_t dst) const;
  // One-way classical delay from the controller.
  SimTime control_delay(uint32_t node) const { return ctrl_delay_.at(node); }

  // Both endpoints send their REQUEST at item.time.
  void submit(const DemandItem &item);

  const std::vector<RequestRecord> &requests() const { return requests_; }
  const std::vector<DeliveryRecord> &deliveries() const { return deliveries_; }
  DeliveryCheck check_deliveries() const;
  const NetworkStats &stats() const { return stats_; }
  // Requests not yet completed, including those still waiting for both halves.
  size_t outstanding() const;

 private:
  struct Wire {
    uint32_t peer = 0;
    uint32_t peer_port = 0;
    SimTime delay = 0;
  };

  void process(uint32_t node, const v1q::ShellResult &r);
  void transmit(uint32_t node, uint32_t port, std::vector<uint8_t> bytes);
  void on_cpu(uint32_t node, const std::vector<uint8_t> &bytes);
  void host_notice(uint32_t node, const std::vector<uint8_t> &bytes);
  void controller_message(const std::vector<uint8_t> &bytes);
  void inject(uint32_t node, const protocols::Message &m);
  void configure(uint16_t cid, const control::Request &r, const control::PathPlan &p);
  void teardown(uint16_t cid, const control::Request &r, const control::PathPlan &p);
  SimTime settle_time(const control::PathPlan &p) const;
  void build_routes();

  TopologySpec spec_;
  fabric::EventEngine engine_;
  std::unique_ptr<fabric::QuantumFabric> fabric_;
  std::vector<std::unique_ptr<v1q::DeviceShell>> devices_;
  std::unique_ptr<control::Controller> controller_;
  uint32_t controller_node_ = 0;
  std::map<std::pair<uint32_t, uint32_t>, Wire> wires_;  // (node, port)
  std::map<std::pair<uint32_t, uint32_t>, double> wire_km_;
  std::map<uint32_t, uint32_t> uplink_;
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj_;  // (port, peer) sorted by port
  std::vector<SimTime> ctrl_delay_;
  mutable std::map<std::pair<uint32_t, uint32_t>, std::optional<control::PathPlan>> plans_;

  std::vector<RequestRecord> requests_;
  std::map<uint32_t, size_t> request_index_;
  std::map<uint16_t, uint32_t> cid_request_;
  std::set<std::pair<uint32_t, uint16_t>> completes_sent_;
  std::vector<DeliveryRecord> deliveries_;
  NetworkStats stats_;
};

}  // namespace quip::net
