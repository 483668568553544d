// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/net/network.hpp"

#include <algorithm>
#include <deque>
#include <filesystem>
#include <queue>

#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"
#include "quip/p4/processor.hpp"
#include "quip/protocols/programs.hpp"
#include "quip/protocols/wire.hpp"

namespace quip::net {

using control::PathPlan;
using protocols::kCpuPort;
using v1q::Role;
namespace names = protocols::names;

namespace {

std::shared_ptr<const p4::CompiledProgram> load_role_program(const TopologySpec &spec, Role role) {
  if (spec.programs_dir.empty()) return p4::compile(protocols::build_program(role));
  return p4::compile(bmv2::load_program_file(std::filesystem::path(spec.programs_dir) /
                                             protocols::program_file_name(role)));
}

void reset_slot(p4::Processor &p, const std::vector<std::string> &regs, uint64_t index) {
  for (const std::string &r : regs) p.register_write(r, index, 0);
}

}  // namespace

Network::Network(const TopologySpec &spec, uint64_t seed) : spec_(resolve(spec)) {
  fabric_ = std::make_unique<fabric::QuantumFabric>(engine_, spec_.physics, seed);
  std::map<Role, std::shared_ptr<const p4::CompiledProgram>> programs;
  const size_t n = spec_.nodes.size();
  adj_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const NodeSpec &ns = spec_.nodes[i];
    if (!programs.count(ns.role)) programs[ns.role] = load_role_program(spec_, ns.role);
    fabric_->add_node(ns.name);
    devices_.push_back(std::make_unique<v1q::DeviceShell>(ns.name, ns.role, programs[ns.role], ns.bsm_units));
    if (ns.name == spec_.controller) controller_node_ = static_cast<uint32_t>(i);
  }
  for (const LinkSpec &l : spec_.links) {
    const uint32_t a = node_id(l.a);
    const uint32_t b = node_id(l.b);
    const SimTime delay = fabric_->fibre_delay(l.length_km);
    wires_[{a, l.a_port}] = Wire{b, l.b_port, delay};
    wires_[{b, l.b_port}] = Wire{a, l.a_port, delay};
    wire_km_[{a, l.a_port}] = l.length_km;
    wire_km_[{b, l.b_port}] = l.length_km;
    adj_[a].push_back({l.a_port, b});
    adj_[b].push_back({l.b_port, a});
    const bool a_hub = spec_.nodes[a].role == Role::kHub;
    const uint32_t hub = a_hub ? a : b;
    const uint32_t hub_port = a_hub ? l.a_port : l.b_port;
    const fabric::QubitRef memory = a_hub ? fabric::QubitRef{b, l.b_port} : fabric::QubitRef{a, l.a_port};
    fabric_->add_fibre(hub, hub_port, memory, l.length_km);
    if (spec_.nodes[memory.node].role == Role::kEndNode) uplink_[memory.node] = memory.port;
  }
  for (auto &a : adj_) std::sort(a.begin(), a.end());

  control::ControllerHooks hooks;
  hooks.plan = [this](const control::Request &r) { return plan(r.src, r.dst); };
  hooks.configure = [this](uint16_t cid, const control::Request &r, const PathPlan &p) { configure(cid, r, p); };
  hooks.teardown = [this](uint16_t cid, const control::Request &r, const PathPlan &p) { teardown(cid, r, p); };
  hooks.started = [this](const control::Request &r, uint16_t cid, SimTime t) {
    RequestRecord &rec = requests_.at(request_index_.at(r.id));
    rec.start = t;
    rec.cid = cid;
    cid_request_[cid] = r.id;
    engine_.record(spec_.controller, "req_start", (uint64_t{cid} << 32) | r.id);
  };
  hooks.completed = [this](const control::Request &r, uint16_t cid, SimTime t) {
    requests_.at(request_index_.at(r.id)).complete = t;
    engine_.record(spec_.controller, "req_done", (uint64_t{cid} << 32) | r.id);
  };
  controller_ = std::make_unique<control::Controller>(std::move(hooks));
  controller_->set_deferred_release(true);
  for (size_t i = 0; i < n; ++i) {
    if (spec_.nodes[i].role == Role::kHub) controller_->ledger().add_hub(static_cast<uint32_t>(i), spec_.nodes[i].bsm_units);
  }

  for (size_t i = 0; i < n; ++i) {
    const auto node = static_cast<uint32_t>(i);
    v1q::DeviceShell &dev = *devices_[i];
    if (dev.role() == Role::kHub) {
      dev.set_group_hook([this, node](const v1q::BsmGroup &g, bool installed) {
        if (installed) {
          fabric_->start_generation(node, g.bsm_id, g.entry0, g.entry1);
        } else {
          fabric_->stop_generation(node, g.bsm_id);
        }
      });
    } else if (dev.role() == Role::kEndNode) {
      dev.install_bsm_group({protocols::kHostGroup, uplink_.at(node), kCpuPort});
    }
  }

  fabric_->on_herald([this](uint32_t node, const fabric::HeraldSignal &s) {
    v1q::QControlEvent ev;
    ev.event_type = bmv2::arch::kHeraldingBsmOutcome;
    ev.timestamp = static_cast<uint64_t>(engine_.now());
    ev.bsm_id = s.bsm_id;
    ev.success = s.success;
    ev.bell = s.bell;
    process(node, devices_[node]->on_qcontrol_event(ev));
  });
  fabric_->on_swap_outcome([this](uint32_t node, const fabric::SwapOutcome &o) {
    v1q::QControlEvent ev;
    ev.event_type = bmv2::arch::kSwapBsmOutcome;
    ev.timestamp = static_cast<uint64_t>(engine_.now());
    ev.bsm_id = o.bsm_id;
    ev.success = o.success;
    ev.bell = o.m;
    process(node, devices_[node]->on_qcontrol_event(ev));
  });

  build_routes();
}

uint32_t Network::node_id(const std::string &name) const {
  for (size_t i = 0; i < spec_.nodes.size(); ++i) {
    if (spec_.nodes[i].name == name) return static_cast<uint32_t>(i);
  }
  throw Error(ErrorCode::kInvalidTopology, "unknown node '" + name + "'");
}

std::vector<uint32_t> Network::end_nodes() const {
  std::vector<uint32_t> out;
  for (size_t i = 0; i < spec_.nodes.size(); ++i) {
    if (spec_.nodes[i].role == Role::kEndNode) out.push_back(static_cast<uint32_t>(i));
  }
  return out;
}

// Shortest classical paths from the controller; every device forwards
// control messages for the controller's id one hop along them.
void Network::build_routes() {
  const size_t n = spec_.nodes.size();
  ctrl_delay_.assign(n, std::numeric_limits<SimTime>::max());
  std::vector<uint32_t> next_port(n, 0);
  using Item = std::pair<SimTime, uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  ctrl_delay_[controller_node_] = 0;
  pq.push({0, controller_node_});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d != ctrl_delay_[u]) continue;
    for (const auto &[port, v] : adj_[u]) {
      const Wire &w = wires_.at({u, port});
      if (d + w.delay < ctrl_delay_[v]) {
        ctrl_delay_[v] = d + w.delay;
        next_port[v] = w.peer_port;
        pq.push({ctrl_delay_[v], v});
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    const uint32_t port = i == controller_node_ ? kCpuPort : next_port[i];
    devices_[i]->processor().table_insert({names::kCtrlRoute, {controller_node_}, names::kForward, {port}});
  }
}

std::optional<PathPlan> Network::plan(uint32_t src, uint32_t dst) const {
  auto cached = plans_.find({src, dst});
  if (cached != plans_.end()) return cached->second;
  std::optional<PathPlan> result;
  const size_t n = spec_.nodes.size();
  if (src < n && dst < n && src != dst && spec_.nodes[src].role == Role::kEndNode &&
      spec_.nodes[dst].role == Role::kEndNode) {
    std::vector<int64_t> parent(n, -1);
    std::vector<bool> seen(n);
    std::deque<uint32_t> q{src};
    seen[src] = true;
    while (!q.empty() && !seen[dst]) {
      const uint32_t u = q.front();
      q.pop_front();
      if (u != src && spec_.nodes[u].role == Role::kEndNode) continue;
      for (const auto &[port, v] : adj_[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        parent[v] = u;
        q.push_back(v);
      }
    }
    if (seen[dst]) {
      std::vector<uint32_t> path{dst};
      while (path.back() != src) path.push_back(static_cast<uint32_t>(parent[path.back()]));
      std::reverse(path.begin(), path.end());
      auto port_to = [&](uint32_t from, uint32_t to) {
        for (const auto &[port, v] : adj_[from]) {
          if (v == to) return port;
        }
        return uint32_t{0};
      };
      PathPlan p;
      p.head = src;
      p.tail = dst;
      p.head_port = uplink_.at(src);
      p.tail_port = uplink_.at(dst);
      for (size_t i = 1; i + 1 < path.size(); ++i) {
        const uint32_t u = path[i];
        const uint32_t up = port_to(u, path[i - 1]);
        const uint32_t down = port_to(u, path[i + 1]);
        if (spec_.nodes[u].role == Role::kHub) {
          p.hubs.push_back({u, up, down});
        } else {
          p.routers.push_back({u, up, down});
        }
      }
      result = p;
    }
  }
  plans_[{src, dst}] = result;
  return result;
}

void Network::submit(const DemandItem &item) {
  RequestRecord rec;
  rec.id = item.id;
  rec.src = item.src;
  rec.dst = item.dst;
  rec.pairs = item.pairs;
  rec.submit = item.time;
  if (request_index_.count(item.id)) throw Error(ErrorCode::kInvalidConfig, "duplicate request id");
  request_index_[item.id] = requests_.size();
  requests_.push_back(rec);
  engine_.schedule(item.time, [this, item] {
    for (const bool requester : {true, false}) {
      protocols::Message m;
      m.link.msg_type = protocols::kRequest;
      protocols::CtrlHeader c;
      c.src = static_cast<uint16_t>(requester ? item.src : item.dst);
      c.dst = static_cast<uint16_t>(controller_node_);
      c.peer = static_cast<uint16_t>(requester ? item.dst : item.src);
      c.client_seq = item.id;
      c.num_pairs = static_cast<uint16_t>(item.pairs);
      c.flags = requester ? protocols::kFlagRequester : 0;
      m.ctrl = c;
      inject(c.src, m);
    }
  });
}

void Network::inject(uint32_t node, const protocols::Message &m) {
  const std::vector<uint8_t> bytes = protocols::encode(m);
  process(node, devices_[node]->on_classical_packet(kCpuPort, bytes, static_cast<uint64_t>(engine_.now())));
}

void Network::process(uint32_t node, const v1q::ShellResult &r) {
  const v1q::Directive &d = r.directive;
  if (d.operation == bmv2::arch::kOpRelease) {
    fabric_->release_qubit({node, d.release_qubit});
  } else if (d.operation == bmv2::arch::kOpSwap) {
    try {
      fabric_->swap_bsm(node, d.swap_qubit_0, d.swap_qubit_1, d.swap_bsm_id);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kQubitNotEntangled && e.code() != ErrorCode::kSameQubit) throw;
      // Report the swap as failed, as the hardware would after trying.
      ++stats_.swap_rejections;
      fabric_->release_qubit({node, d.swap_qubit_0});
      fabric_->release_qubit({node, d.swap_qubit_1});
      engine_.record(node_name(node), "swap_reject", d.swap_bsm_id);
      const uint16_t bsm_id = d.swap_bsm_id;
      engine_.schedule_in(spec_.physics.swap_duration_ns, [this, node, bsm_id] {
        v1q::QControlEvent ev;
        ev.event_type = bmv2::arch::kSwapBsmOutcome;
        ev.timestamp = static_cast<uint64_t>(engine_.now());
        ev.bsm_id = bsm_id;
        process(node, devices_[node]->on_qcontrol_event(ev));
      });
    }
  }
  for (const v1q::Emission &e : r.emissions) transmit(node, e.port, e.bytes);
}

void Network::transmit(uint32_t node, uint32_t port, std::vector<uint8_t> bytes) {
  if (port == kCpuPort) {
    engine_.schedule_in(0, [this, node, b = std::move(bytes)] { on_cpu(node, b); });
    return;
  }
  auto it = wires_.find({node, port});
  if (it == wires_.end()) {
    ++stats_.undeliverable;
    return;
  }
  const Wire w = it->second;
  ++stats_.classical_packets;
  engine_.schedule_in(w.delay, [this, w, b = std::move(bytes)] {
    engine_.record(node_name(w.peer), "rx", fabric::fnv1a(b.data(), b.size()));
    process(w.peer, devices_[w.peer]->on_classical_packet(w.peer_port, b, static_cast<uint64_t>(engine_.now())));
  });
}

void Network::on_cpu(uint32_t node, const std::vector<uint8_t> &bytes) {
  if (node == controller_node_) {
    controller_message(bytes);
  } else if (spec_.nodes[node].role == Role::kEndNode) {
    host_notice(node, bytes);
  } else {
    ++stats_.undeliverable;
  }
}

void Network::controller_message(const std::vector<uint8_t> &bytes) {
  const protocols::Message m = protocols::decode(bytes);
  if (!m.ctrl) return;
  const protocols::CtrlHeader &c = *m.ctrl;
  const SimTime now = engine_.now();
  if (m.link.msg_type == protocols::kRequest) {
    const bool requester = (c.flags & protocols::kFlagRequester) != 0;
    controller_->submit(c.src, requester ? c.src : c.peer, requester ? c.peer : c.src, c.client_seq, c.num_pairs,
                        now);
  } else if (m.link.msg_type == protocols::kComplete) {
    controller_->on_complete(c.conn_id, c.src, now);
  }
}

void Network::host_notice(uint32_t node, const std::vector<uint8_t> &bytes) {
  const protocols::Message m = protocols::decode(bytes, true);
  if (!m.net || !m.ctrl) return;
  ++stats_.host_notices;
  const uint16_t cid = m.net->conn_id;
  DeliveryRecord rec;
  rec.cid = cid;
  auto req = cid_request_.find(cid);
  rec.request_id = req == cid_request_.end() ? 0 : req->second;
  rec.seq = m.net->e2e_seq;
  rec.node = node;
  rec.qubit = uplink_.at(node);
  rec.bell = m.net->pauli_acc;
  rec.time = engine_.now();
  if (auto gt = fabric_->ground_truth({node, rec.qubit})) {
    rec.has_truth = true;
    rec.partner = gt->partner;
    rec.truth_bell = gt->bell;
    rec.pair_id = gt->pair_id;
  }
  deliveries_.push_back(rec);
  engine_.record(node_name(node), "deliver", (uint64_t{cid} << 32) | rec.seq);
  fabric_->measure_qubit({node, rec.qubit});
  if (m.ctrl->num_pairs == 0 && completes_sent_.insert({node, cid}).second) {
    protocols::Message done;
    done.link.msg_type = protocols::kComplete;
    protocols::CtrlHeader c;
    c.src = static_cast<uint16_t>(node);
    c.dst = static_cast<uint16_t>(controller_node_);
    c.conn_id = cid;
    done.ctrl = c;
    inject(node, done);
  }
}

SimTime Network::settle_time(const PathPlan &p) const {
  SimTime far = std::max(ctrl_delay_[p.head], ctrl_delay_[p.tail]);
  SimTime fibre = 0;
  for (const auto &h : p.hubs) {
    far = std::max(far, ctrl_delay_[h.hub]);
    fibre = std::max({fibre, wires_.at({h.hub, h.port_head}).delay, wires_.at({h.hub, h.port_tail}).delay});
  }
  for (const auto &r : p.routers) far = std::max(far, ctrl_delay_[r.router]);
  return far + fibre + 1;
}

void Network::configure(uint16_t cid, const control::Request &r, const PathPlan &p) {
  const SimTime now = engine_.now();
  const uint64_t slot = cid & protocols::kSlotMask;
  SimTime latest = 0;
  for (const bool head : {true, false}) {
    const uint32_t node = head ? p.head : p.tail;
    const uint32_t port = head ? p.head_port : p.tail_port;
    latest = std::max(latest, ctrl_delay_[node]);
    const uint16_t pairs = r.num_pairs;
    engine_.schedule(now + ctrl_delay_[node], [this, node, port, cid, head, pairs, slot] {
      p4::Processor &proc = devices_[node]->processor();
      reset_slot(proc, protocols::endnode_conn_registers(), slot);
      proc.table_insert({names::kConn, {port}, names::kSetConn, {cid, head ? 1u : 0u, pairs}});
      stats_.config_actions += 1;
    });
  }
  for (const control::RouterHop &h : p.routers) {
    latest = std::max(latest, ctrl_delay_[h.router]);
    engine_.schedule(now + ctrl_delay_[h.router], [this, h, cid, slot] {
      v1q::DeviceShell &dev = *devices_[h.router];
      p4::Processor &proc = dev.processor();
      reset_slot(proc, protocols::router_conn_registers(), slot);
      reset_slot(proc, protocols::router_port_registers(), h.up_port);
      reset_slot(proc, protocols::router_port_registers(), h.down_port);
      proc.table_insert({names::kPortConn, {h.up_port}, names::kPortCid, {cid}});
      proc.table_insert({names::kPortConn, {h.down_port}, names::kPortCid, {cid}});
      proc.table_insert({names::kCidConn, {cid}, names::kSetConn, {h.up_port, h.down_port}});
      dev.install_bsm_group({cid, h.up_port, h.down_port});
      stats_.config_actions += 4;
    });
  }
  for (const control::HubHop &h : p.hubs) latest = std::max(latest, ctrl_delay_[h.hub]);
  // Generation starts once every memory node on the path knows the connection.
  for (const control::HubHop &h : p.hubs) {
    engine_.schedule(now + latest, [this, h, cid] {
      devices_[h.hub]->install_bsm_group({cid, h.port_head, h.port_tail});
      stats_.config_actions += 1;
    });
  }
}

void Network::teardown(uint16_t cid, const control::Request &, const PathPlan &p) {
  const SimTime now = engine_.now();
  for (const control::HubHop &h : p.hubs) {
    engine_.schedule(now + ctrl_delay_[h.hub], [this, h, cid] {
      devices_[h.hub]->remove_bsm_group(cid);
      stats_.config_actions += 1;
    });
  }
  // Memory nodes are cleared once no herald of this connection can still be
  // on a fibre; only then are the resources handed back.
  engine_.schedule(now + settle_time(p), [this, cid, p] {
    for (const bool head : {true, false}) {
      const uint32_t node = head ? p.head : p.tail;
      const uint32_t port = head ? p.head_port : p.tail_port;
      devices_[node]->processor().table_delete(names::kConn, {port});
      fabric_->release_qubit({node, port});
      stats_.config_actions += 1;
    }
    for (const control::RouterHop &h : p.routers) {
      v1q::DeviceShell &dev = *devices_[h.router];
      p4::Processor &proc = dev.processor();
      proc.table_delete(names::kPortConn, {h.up_port});
      proc.table_delete(names::kPortConn, {h.down_port});
      proc.table_delete(names::kCidConn, {cid});
      dev.remove_bsm_group(cid);
      fabric_->release_qubit({h.router, h.up_port});
      fabric_->release_qubit({h.router, h.down_port});
      stats_.config_actions += 4;
    }
    cid_request_.erase(cid);
    controller_->release(cid, engine_.now());
  });
}

size_t Network::outstanding() const {
  size_t n = 0;
  for (const RequestRecord &r : requests_) n += r.completed() ? 0 : 1;
  return n;
}

DeliveryCheck Network::check_deliveries() const {
  DeliveryCheck out;
  std::map<std::pair<uint32_t, uint32_t>, std::vector<const DeliveryRecord *>> objects;
  for (const DeliveryRecord &d : deliveries_) objects[{d.request_id, d.seq}].push_back(&d);
  auto problem = [&](const std::string &msg) {
    if (out.problems.size() < 10) out.problems.push_back(msg);
  };
  for (const RequestRecord &r : requests_) {
    if (!r.completed()) continue;
    for (uint32_t s = 1; s <= r.pairs; ++s) {
      auto it = objects.find({r.id, s});
      if (it == objects.end() || it->second.size() != 2) {
        ++out.missing;
        problem("request " + std::to_string(r.id) + " seq " + std::to_string(s) + " not delivered at both ends");
      }
    }
  }
  for (const auto &[key, ends] : objects) {
    const std::string where = "request " + std::to_string(key.first) + " seq " + std::to_string(key.second);
    if (ends.size() != 2) {
      if (ends.size() > 2) {
        ++out.mismatched;
        problem(where + " delivered " + std::to_string(ends.size()) + " times");
      }
      continue;
    }
    ++out.objects;
    const DeliveryRecord &x = *ends[0];
    const DeliveryRecord &y = *ends[1];
    auto req = request_index_.find(key.first);
    bool ok = req != request_index_.end() && x.has_truth && y.has_truth;
    if (ok) {
      const RequestRecord &r = requests_[req->second];
      ok = ((x.node == r.src && y.node == r.dst) || (x.node == r.dst && y.node == r.src)) && x.cid == y.cid &&
           x.pair_id == y.pair_id && x.partner == fabric::QubitRef{y.node, y.qubit} &&
           y.partner == fabric::QubitRef{x.node, x.qubit} && x.bell == x.truth_bell && y.bell == y.truth_bell;
    }
    if (!ok) {
      ++out.mismatched;
      problem(where + " disagrees with the fabric");
    } else {
      ++out.bell_counts[x.bell & 3];
    }
  }
  return out;
}

}  // namespace quip::net
