// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/control/controller.hpp"

#include <string>

#include "quip/error.hpp"
#include "quip/protocols/wire.hpp"

namespace quip::control {

namespace {

std::vector<FibreKey> fibres_of(const PathPlan &plan) {
  std::vector<FibreKey> out;
  for (const HubHop &h : plan.hubs) {
    out.push_back({h.hub, h.port_head});
    out.push_back({h.hub, h.port_tail});
  }
  return out;
}

}  // namespace

void ResourceLedger::add_hub(uint32_t hub, uint32_t units) { hubs_[hub].units = units; }

bool ResourceLedger::can_assign(const PathPlan &plan) const {
  for (const FibreKey &f : fibres_of(plan)) {
    if (fibre_owner_.count(f)) return false;
  }
  std::map<uint32_t, uint32_t> need;
  for (const HubHop &h : plan.hubs) ++need[h.hub];
  for (const auto &[hub, n] : need) {
    auto it = hubs_.find(hub);
    if (it == hubs_.end() || it->second.used + n > it->second.units) return false;
  }
  return true;
}

void ResourceLedger::assign(uint16_t cid, const PathPlan &plan) {
  if (held_.count(cid)) throw Error(ErrorCode::kPortBusy, "connection " + std::to_string(cid) + " already holds resources");
  for (const FibreKey &f : fibres_of(plan)) {
    if (fibre_owner_.count(f)) {
      throw Error(ErrorCode::kPortBusy, "fibre at hub " + std::to_string(f.first) + " port " +
                                            std::to_string(f.second) + " is assigned");
    }
  }
  if (!can_assign(plan)) throw Error(ErrorCode::kNoFreeBsmUnit, "no free BSM unit on the path");
  for (const FibreKey &f : fibres_of(plan)) fibre_owner_[f] = cid;
  for (const HubHop &h : plan.hubs) ++hubs_[h.hub].used;
  held_[cid] = plan;
}

void ResourceLedger::release(uint16_t cid) {
  auto it = held_.find(cid);
  if (it == held_.end()) return;
  for (const FibreKey &f : fibres_of(it->second)) fibre_owner_.erase(f);
  for (const HubHop &h : it->second.hubs) --hubs_[h.hub].used;
  held_.erase(it);
}

std::optional<uint16_t> ResourceLedger::fibre_owner(FibreKey f) const {
  auto it = fibre_owner_.find(f);
  if (it == fibre_owner_.end()) return std::nullopt;
  return it->second;
}

uint32_t ResourceLedger::units_in_use(uint32_t hub) const {
  auto it = hubs_.find(hub);
  return it == hubs_.end() ? 0 : it->second.used;
}

uint32_t ResourceLedger::units(uint32_t hub) const {
  auto it = hubs_.find(hub);
  return it == hubs_.end() ? 0 : it->second.units;
}

size_t ResourceLedger::audit() const {
  size_t violations = 0;
  std::map<FibreKey, int> fibre_count;
  std::map<uint32_t, uint32_t> unit_count;
  for (const auto &[cid, plan] : held_) {
    for (const FibreKey &f : fibres_of(plan)) {
      if (++fibre_count[f] > 1) ++violations;
      auto owner = fibre_owner_.find(f);
      if (owner == fibre_owner_.end() || owner->second != cid) ++violations;
    }
    for (const HubHop &h : plan.hubs) ++unit_count[h.hub];
  }
  if (fibre_count.size() != fibre_owner_.size()) ++violations;
  for (const auto &[hub, h] : hubs_) {
    const uint32_t counted = unit_count.count(hub) ? unit_count.at(hub) : 0;
    if (counted != h.used || counted > h.units) ++violations;
  }
  return violations;
}

Controller::Controller(ControllerHooks hooks) : hooks_(std::move(hooks)) {}

bool Controller::submit(uint16_t from, uint16_t requester, uint16_t responder, uint32_t client_seq,
                        uint16_t num_pairs, SimTime now) {
  const auto key = std::make_tuple(requester, responder, client_seq);
  auto it = halves_.find(key);
  if (it == halves_.end()) {
    for (const Request &r : queue_) {
      if (r.id == client_seq && r.src == requester && r.dst == responder) return false;
    }
    for (const auto &[cid, a] : active_) {
      if (a.request.id == client_seq && a.request.src == requester && a.request.dst == responder) return false;
    }
    halves_[key] = {from, now};
    return false;
  }
  if (it->second.first == from) return false;  // duplicate from the same endpoint
  Request r;
  r.id = client_seq;
  r.src = requester;
  r.dst = responder;
  r.num_pairs = num_pairs;
  r.submit_time = std::max(now, it->second.second);
  halves_.erase(it);
  queue_.push_back(r);
  schedule(now);
  return true;
}

uint16_t Controller::allocate_cid() {
  for (;;) {
    const uint16_t cid = next_cid_;
    next_cid_ = next_cid_ >= protocols::kHostGroup - 1 ? 1 : static_cast<uint16_t>(next_cid_ + 1);
    if (!active_.count(cid) && !draining_.count(cid)) return cid;
  }
}

std::vector<uint32_t> Controller::schedule(SimTime now) {
  std::vector<uint32_t> started;
  for (auto it = queue_.begin(); it != queue_.end();) {
    std::optional<PathPlan> plan = hooks_.plan ? hooks_.plan(*it) : std::nullopt;
    if (!plan || !ledger_.can_assign(*plan)) {
      ++it;
      continue;
    }
    const Request req = *it;
    it = queue_.erase(it);
    const uint16_t cid = allocate_cid();
    ledger_.assign(cid, *plan);
    active_[cid] = Active{req, *plan, {}};
    audit();
    started.push_back(req.id);
    if (hooks_.started) hooks_.started(req, cid, now);
    if (hooks_.configure) hooks_.configure(cid, req, *plan);
  }
  return started;
}

void Controller::on_complete(uint16_t cid, uint16_t from, SimTime now) {
  auto it = active_.find(cid);
  if (it == active_.end()) return;  // late duplicate
  Active &a = it->second;
  if (from != a.request.src && from != a.request.dst) return;
  a.completed_by.insert(from);
  if (a.completed_by.size() < 2) return;
  const Active done = std::move(a);
  active_.erase(it);
  draining_.insert(cid);
  if (hooks_.completed) hooks_.completed(done.request, cid, now);
  if (hooks_.teardown) hooks_.teardown(cid, done.request, done.plan);
  if (!deferred_release_) release(cid, now);
}

void Controller::release(uint16_t cid, SimTime now) {
  if (!draining_.erase(cid)) return;
  ledger_.release(cid);
  audit();
  schedule(now);
}

void Controller::audit() {
  ++audits_;
  violations_ += ledger_.audit();
  if (ledger_.active() != active_.size() + draining_.size()) ++violations_;
}

}  // namespace quip::control
