// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "quip/fabric/engine.hpp"

namespace quip::control {

using fabric::SimTime;

struct Request {
  uint32_t id = 0;
  uint16_t src = 0;  // requesting node, head of the connection
  uint16_t dst = 0;
  uint16_t num_pairs = 50;
  SimTime submit_time = 0;  // when the second endpoint's REQUEST reached the controller
};

// Hub ports are the fibres to the neighbours nearer the head / tail.
struct HubHop {
  uint32_t hub = 0;
  uint32_t port_head = 0;
  uint32_t port_tail = 0;
};

struct RouterHop {
  uint32_t router = 0;
  uint32_t up_port = 0;  // towards the head
  uint32_t down_port = 0;
};

struct PathPlan {
  uint32_t head = 0;
  uint32_t tail = 0;
  uint32_t head_port = 0;
  uint32_t tail_port = 0;
  std::vector<HubHop> hubs;  // in path order
  std::vector<RouterHop> routers;
};

// (hub, hub port): a fibre is named by its hub end.
using FibreKey = std::pair<uint32_t, uint32_t>;

class ResourceLedger {
 public:
  void add_hub(uint32_t hub, uint32_t units);

  bool can_assign(const PathPlan &plan) const;
  // Raises Error(kPortBusy) or Error(kNoFreeBsmUnit) on conflict.
  void assign(uint16_t cid, const PathPlan &plan);
  void release(uint16_t cid);

  std::optional<uint16_t> fibre_owner(FibreKey f) const;
  uint32_t units_in_use(uint32_t hub) const;
  uint32_t units(uint32_t hub) const;
  size_t active() const { return held_.size(); }
  // Recounts occupancy from the per-connection holdings; returns the number
  // of fibres or units found assigned twice or over capacity.
  size_t audit() const;

 private:
  struct Hub {
    uint32_t units = 0;
    uint32_t used = 0;
  };
  std::map<FibreKey, uint16_t> fibre_owner_;
  std::map<uint32_t, Hub> hubs_;
  std::map<uint16_t, PathPlan> held_;
};

struct ControllerHooks {
  std::function<std::optional<PathPlan>(const Request &)> plan;
  std::function<void(uint16_t cid, const Request &, const PathPlan &)> configure;
  std::function<void(uint16_t cid, const Request &, const PathPlan &)> teardown;
  std::function<void(const Request &, uint16_t cid, SimTime)> started;
  std::function<void(const Request &, uint16_t cid, SimTime)> completed;
};

// Blocked-skipping first-come-first-served scheduler over fibres and BSM units.
class Controller {
 public:
  explicit Controller(ControllerHooks hooks);

  ResourceLedger &ledger() { return ledger_; }
  const ResourceLedger &ledger() const { return ledger_; }

  // One endpoint's REQUEST. The request is queued once both endpoints have
  // submitted; returns true on that second submission. Repeats are ignored.
  bool submit(uint16_t from, uint16_t requester, uint16_t responder, uint32_t client_seq,
              uint16_t num_pairs, SimTime now);
  // Scans the queue front to back and starts every request whose fibres and
  // units are free. Returns the started request ids in start order.
  std::vector<uint32_t> schedule(SimTime now);
  // COMPLETE from one end; the second one tears the connection down.
  void on_complete(uint16_t cid, uint16_t from, SimTime now);
  // With deferred release the fibres and units of a torn-down connection stay
  // held until release() is called, once the path has gone quiet.
  void set_deferred_release(bool deferred) { deferred_release_ = deferred; }
  void release(uint16_t cid, SimTime now);

  size_t queued() const { return queue_.size(); }
  size_t active() const { return active_.size(); }
  size_t draining() const { return draining_.size(); }
  size_t pending_submissions() const { return halves_.size(); }
  const std::deque<Request> &queue() const { return queue_; }
  uint64_t audits() const { return audits_; }
  uint64_t violations() const { return violations_; }

 private:
  struct Active {
    Request request;
    PathPlan plan;
    std::set<uint16_t> completed_by;
  };

  uint16_t allocate_cid();
  void audit();

  ControllerHooks hooks_;
  ResourceLedger ledger_;
  std::map<std::tuple<uint16_t, uint16_t, uint32_t>, std::pair<uint16_t, SimTime>> halves_;
  std::deque<Request> queue_;
  std::map<uint16_t, Active> active_;
  std::set<uint16_t> draining_;
  bool deferred_release_ = false;
  uint16_t next_cid_ = 1;
  uint64_t audits_ = 0;
  uint64_t violations_ = 0;
};

}  // namespace quip::control
