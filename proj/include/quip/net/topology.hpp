// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quip/fabric/fabric.hpp"
#include "quip/v1q/device.hpp"

namespace quip::net {

struct NodeSpec {
  std::string name;
  v1q::Role role = v1q::Role::kEndNode;
  uint32_t bsm_units = 0;  // hubs only
};

// A fibre plus its classical channel. One end is always a hub. Port 0 means
// "next free port on that node".
struct LinkSpec {
  std::string a;
  uint32_t a_port = 0;
  std::string b;
  uint32_t b_port = 0;
  double length_km = 5.0;
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  fabric::PhysicsParams physics;
  std::string controller;    // hub hosting the controller; empty: first hub
  std::string programs_dir;  // BMv2 JSON files; empty: built-in programs
};

// Fills in ports and the controller, then checks the topology.
// Raises Error(kInvalidTopology) naming the first problem found.
TopologySpec resolve(TopologySpec spec);

// n end nodes e1..en, each on its own fibre to port i of hub "hub".
TopologySpec hub_and_spoke(uint32_t end_nodes, double length_km, uint32_t bsm_units);
// a - hub1 - r - hub2 - b
TopologySpec chain(double length_km, uint32_t bsm_units = 1);

}  // namespace quip::net
