// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/net/topology.hpp"

#include <map>
#include <set>

#include "quip/error.hpp"
#include "quip/protocols/wire.hpp"

namespace quip::net {

namespace {

[[noreturn]] void invalid(const std::string &why) { throw Error(ErrorCode::kInvalidTopology, why); }

}  // namespace

TopologySpec resolve(TopologySpec spec) {
  using v1q::Role;
  if (spec.nodes.empty()) invalid("no nodes");
  if (spec.nodes.size() >= protocols::kHostGroup) invalid("too many nodes");
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < spec.nodes.size(); ++i) {
    const NodeSpec &n = spec.nodes[i];
    if (n.name.empty()) invalid("node " + std::to_string(i) + " has no name");
    if (!index.emplace(n.name, i).second) invalid("duplicate node '" + n.name + "'");
    if (n.role == Role::kHub && n.bsm_units == 0) invalid("hub '" + n.name + "' has no BSM units");
    if (n.role != Role::kHub && n.bsm_units != 0) invalid("'" + n.name + "' is not a hub but has BSM units");
  }

  std::vector<std::set<uint32_t>> used(spec.nodes.size());
  for (const LinkSpec &l : spec.links) {
    for (const auto &[name, port] : {std::pair{l.a, l.a_port}, std::pair{l.b, l.b_port}}) {
      auto it = index.find(name);
      if (it == index.end()) invalid("link endpoint '" + name + "' is not a node");
      if (port == 0) continue;
      if (port >= protocols::kCpuPort) invalid("port " + std::to_string(port) + " on '" + name + "' is reserved");
      if (!used[it->second].insert(port).second) {
        invalid("port " + std::to_string(port) + " on '" + name + "' is used twice");
      }
    }
  }
  auto next_free = [&](size_t node) {
    uint32_t p = 1;
    while (used[node].count(p)) ++p;
    if (p >= protocols::kCpuPort) invalid("'" + spec.nodes[node].name + "' has too many links");
    used[node].insert(p);
    return p;
  };

  std::vector<uint32_t> degree(spec.nodes.size());
  std::vector<std::vector<size_t>> adj(spec.nodes.size());
  for (LinkSpec &l : spec.links) {
    const size_t a = index.at(l.a);
    const size_t b = index.at(l.b);
    if (a == b) invalid("link from '" + l.a + "' to itself");
    if (l.a_port == 0) l.a_port = next_free(a);
    if (l.b_port == 0) l.b_port = next_free(b);
    if (!(l.length_km > 0)) invalid("link " + l.a + "-" + l.b + " has non-positive length");
    const bool hub_a = spec.nodes[a].role == Role::kHub;
    const bool hub_b = spec.nodes[b].role == Role::kHub;
    if (hub_a == hub_b) invalid("link " + l.a + "-" + l.b + " must join a hub to a memory node");
    ++degree[a];
    ++degree[b];
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  size_t hubs = 0;
  for (size_t i = 0; i < spec.nodes.size(); ++i) {
    const NodeSpec &n = spec.nodes[i];
    if (n.role == Role::kHub) ++hubs;
    if (n.role == Role::kEndNode && degree[i] != 1) invalid("end node '" + n.name + "' needs exactly one link");
    if (n.role == Role::kRouter && degree[i] < 2) invalid("router '" + n.name + "' needs at least two links");
  }
  if (hubs == 0) invalid("no hub");

  std::vector<bool> seen(spec.nodes.size());
  std::vector<size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const size_t n = stack.back();
    stack.pop_back();
    for (size_t m : adj[n]) {
      if (!seen[m]) {
        seen[m] = true;
        stack.push_back(m);
      }
    }
  }
  for (size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) invalid("graph is not connected: '" + spec.nodes[i].name + "' is unreachable");
  }

  if (spec.controller.empty()) {
    for (const NodeSpec &n : spec.nodes) {
      if (n.role == Role::kHub) {
        spec.controller = n.name;
        break;
      }
    }
  }
  auto c = index.find(spec.controller);
  if (c == index.end() || spec.nodes[c->second].role != Role::kHub) {
    invalid("controller '" + spec.controller + "' is not a hub");
  }
  return spec;
}

TopologySpec hub_and_spoke(uint32_t end_nodes, double length_km, uint32_t bsm_units) {
  TopologySpec t;
  t.nodes.push_back({"hub", v1q::Role::kHub, bsm_units});
  for (uint32_t i = 1; i <= end_nodes; ++i) {
    const std::string name = "e" + std::to_string(i);
    t.nodes.push_back({name, v1q::Role::kEndNode, 0});
    t.links.push_back({name, 1, "hub", i, length_km});
  }
  return t;
}

TopologySpec chain(double length_km, uint32_t bsm_units) {
  TopologySpec t;
  t.nodes = {{"a", v1q::Role::kEndNode, 0},
             {"hub1", v1q::Role::kHub, bsm_units},
             {"r", v1q::Role::kRouter, 0},
             {"hub2", v1q::Role::kHub, bsm_units},
             {"b", v1q::Role::kEndNode, 0}};
  t.links = {{"a", 1, "hub1", 1, length_km},
             {"r", 1, "hub1", 2, length_km},
             {"r", 2, "hub2", 1, length_km},
             {"b", 1, "hub2", 2, length_km}};
  return t;
}

}  // namespace quip::net
