// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/fabric/fabric.hpp"

#include <algorithm>
#include <cmath>

#include "quip/error.hpp"

namespace quip::fabric {

QuantumFabric::QuantumFabric(EventEngine &engine, PhysicsParams physics, uint64_t seed)
    : engine_(engine), physics_(physics), seed_(seed) {}

uint32_t QuantumFabric::add_node(std::string name) {
  names_.push_back(std::move(name));
  return static_cast<uint32_t>(names_.size() - 1);
}

void QuantumFabric::add_fibre(uint32_t hub, uint32_t hub_port, QubitRef memory, double length_km) {
  if (!(length_km > 0)) throw Error(ErrorCode::kInvalidTopology, "fibre length must be positive");
  fibres_[{hub, hub_port}] = Fibre{memory, length_km, fibre_delay(length_km)};
}

double QuantumFabric::link_efficiency(double length_km) const {
  return std::pow(10.0, -physics_.attenuation_db_per_km * length_km / 10.0) *
         physics_.detector_efficiency;
}

double QuantumFabric::attempt_probability(double length_a_km, double length_b_km) const {
  return physics_.optical_bsm_success * link_efficiency(length_a_km) * link_efficiency(length_b_km);
}

SimTime QuantumFabric::fibre_delay(double length_km) const {
  return static_cast<SimTime>(std::llround(length_km * 1000.0 / physics_.speed_m_per_s * 1e9));
}

SimTime QuantumFabric::cycle_period(double length_a_km, double length_b_km) const {
  return physics_.t_prep_ns + 2 * std::max(fibre_delay(length_a_km), fibre_delay(length_b_km));
}

std::mt19937_64 &QuantumFabric::stream(const std::string &name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) it = streams_.emplace(name, std::mt19937_64(derive_seed(seed_, name))).first;
  return it->second;
}

QubitState QuantumFabric::state(QubitRef q) const {
  auto it = states_.find(key(q));
  return it == states_.end() ? QubitState::kFree : it->second;
}

void QuantumFabric::set_state(QubitRef q, QubitState s) {
  if (s == QubitState::kFree) {
    states_.erase(key(q));
  } else {
    states_[key(q)] = s;
  }
}

void QuantumFabric::start_generation(uint32_t hub, uint16_t bsm_id, uint32_t port_a, uint32_t port_b) {
  auto fa = fibres_.find({hub, port_a});
  auto fb = fibres_.find({hub, port_b});
  if (fa == fibres_.end() || fb == fibres_.end()) {
    throw Error(ErrorCode::kUnitUnbound, "hub port without a fibre for BSM group " + std::to_string(bsm_id));
  }
  if (port_a == port_b) throw Error(ErrorCode::kSameQubit, "BSM group binds one port twice");
  const GenKey k{hub, bsm_id};
  if (generations_.count(k)) stop_generation(hub, bsm_id);
  const uint32_t lo = std::min(port_a, port_b);
  const uint32_t hi = std::max(port_a, port_b);
  Generation g;
  g.hub = hub;
  g.bsm_id = bsm_id;
  g.a = fa->second;
  g.b = fb->second;
  g.epoch = next_epoch_++;
  g.base = engine_.now();
  g.period = cycle_period(g.a.length_km, g.b.length_km);
  g.p = attempt_probability(g.a.length_km, g.b.length_km);
  // The stream follows the fibre pair, not the group, so reinstalling a group
  // continues the sequence instead of replaying it.
  g.rng = &stream("link:" + names_.at(hub) + ":" + std::to_string(lo) + ":" + std::to_string(hi));
  qubit_generation_[key(g.a.memory)] = k;
  qubit_generation_[key(g.b.memory)] = k;
  const uint64_t epoch = g.epoch;
  generations_[k] = g;
  engine_.record(names_.at(hub), "gen_start", bsm_id);
  engine_.schedule(engine_.now(), [this, k, epoch] { attempt(k, epoch); });
}

void QuantumFabric::stop_generation(uint32_t hub, uint16_t bsm_id) {
  auto it = generations_.find({hub, bsm_id});
  if (it == generations_.end()) return;
  for (const QubitRef q : {it->second.a.memory, it->second.b.memory}) {
    auto qi = qubit_generation_.find(key(q));
    if (qi != qubit_generation_.end() && qi->second == it->first) qubit_generation_.erase(qi);
  }
  generations_.erase(it);
  engine_.record(names_.at(hub), "gen_stop", bsm_id);
}

bool QuantumFabric::generating(uint32_t hub, uint16_t bsm_id) const {
  return generations_.count({hub, bsm_id}) != 0;
}

void QuantumFabric::attempt(GenKey k, uint64_t epoch) {
  auto it = generations_.find(k);
  if (it == generations_.end() || it->second.epoch != epoch) return;
  Generation &g = it->second;
  const QubitRef qa = g.a.memory;
  const QubitRef qb = g.b.memory;
  if (state(qa) != QubitState::kFree || state(qb) != QubitState::kFree) {
    g.waiting = true;
    return;
  }
  g.waiting = false;
  set_state(qa, QubitState::kPending);
  set_state(qb, QubitState::kPending);
  ++stats_.attempts;
  const SimTime bsm_at = engine_.now() + physics_.t_prep_ns + std::max(g.a.delay, g.b.delay);
  engine_.schedule(bsm_at, [this, k, epoch, qa, qb] { resolve(k, epoch, qa, qb); });
}

void QuantumFabric::resolve(GenKey k, uint64_t epoch, QubitRef qa, QubitRef qb) {
  auto it = generations_.find(k);
  if (it == generations_.end() || it->second.epoch != epoch) {
    // Group removed while photons were in flight.
    for (const QubitRef q : {qa, qb}) {
      if (state(q) == QubitState::kPending) free_qubit(q);
    }
    return;
  }
  Generation &g = it->second;
  const bool success = uniform01(*g.rng) < g.p;
  BellIndex bell = 0;
  if (success) {
    bell = physics_.herald_all_bell_states ? static_cast<BellIndex>((*g.rng)() & 3u)
                                           : static_cast<BellIndex>(((*g.rng)() & 1u) ? 3 : 1);
    create_pair(qa, qb, bell);
    ++stats_.heralded_pairs;
  }
  const uint16_t bsm_id = g.bsm_id;
  const uint32_t hub = g.hub;
  engine_.record(names_.at(hub), success ? "bsm_ok" : "bsm_fail", bell);
  if (herald_handler_) herald_handler_(hub, HeraldSignal{bsm_id, success, bell, 0});
  for (const Fibre *f : {&g.a, &g.b}) {
    const QubitRef q = f->memory;
    engine_.schedule_in(f->delay, [this, q, bsm_id, success, bell] {
      if (!success && state(q) == QubitState::kPending) free_qubit(q);
      if (herald_handler_) herald_handler_(q.node, HeraldSignal{bsm_id, success, bell, q.port});
    });
  }
  const SimTime next = engine_.now() + std::max(g.a.delay, g.b.delay);
  engine_.schedule(next, [this, k, epoch] { attempt(k, epoch); });
}

void QuantumFabric::wake(QubitRef q) {
  auto qi = qubit_generation_.find(key(q));
  if (qi == qubit_generation_.end()) return;
  auto it = generations_.find(qi->second);
  if (it == generations_.end()) return;
  Generation &g = it->second;
  if (!g.waiting) return;
  if (state(g.a.memory) != QubitState::kFree || state(g.b.memory) != QubitState::kFree) return;
  g.waiting = false;
  const SimTime elapsed = engine_.now() - g.base;
  const SimTime next = g.base + (elapsed + g.period - 1) / g.period * g.period;
  const GenKey k = it->first;
  const uint64_t epoch = g.epoch;
  engine_.schedule(next, [this, k, epoch] { attempt(k, epoch); });
}

void QuantumFabric::free_qubit(QubitRef q) {
  set_state(q, QubitState::kFree);
  wake(q);
}

uint64_t QuantumFabric::create_pair(QubitRef a, QubitRef b, BellIndex bell) {
  const uint64_t id = next_pair_id_++;
  pairs_[id] = PairRecord{id, a, b, bell, engine_.now(), false, false};
  qubit_pair_[key(a)] = id;
  qubit_pair_[key(b)] = id;
  set_state(a, QubitState::kEntangled);
  set_state(b, QubitState::kEntangled);
  return id;
}

void QuantumFabric::destroy_pair(uint64_t id) {
  auto it = pairs_.find(id);
  if (it == pairs_.end()) return;
  for (const auto &[q, measured] : {std::pair{it->second.a, it->second.measured_a},
                                    std::pair{it->second.b, it->second.measured_b}}) {
    if (measured) continue;
    auto qi = qubit_pair_.find(key(q));
    if (qi != qubit_pair_.end() && qi->second == id) qubit_pair_.erase(qi);
  }
  pairs_.erase(it);
}

void QuantumFabric::swap_bsm(uint32_t node, uint32_t qubit_0, uint32_t qubit_1, uint16_t bsm_id) {
  const QubitRef q0{node, qubit_0};
  const QubitRef q1{node, qubit_1};
  if (qubit_0 == qubit_1) throw Error(ErrorCode::kSameQubit, "swap on a single qubit");
  for (const QubitRef q : {q0, q1}) {
    if (state(q) != QubitState::kEntangled || swapping_.count(key(q))) {
      throw Error(ErrorCode::kQubitNotEntangled,
                  names_.at(node) + " qubit " + std::to_string(q.port) + " is not entangled");
    }
  }
  ++stats_.swaps_requested;
  swapping_.insert(key(q0));
  swapping_.insert(key(q1));
  engine_.record(names_.at(node), "swap_req", bsm_id);
  engine_.schedule_in(physics_.swap_duration_ns, [this, node, q0, q1, bsm_id] {
    swapping_.erase(key(q0));
    swapping_.erase(key(q1));
    auto p0 = qubit_pair_.find(key(q0));
    auto p1 = qubit_pair_.find(key(q1));
    SwapOutcome out{bsm_id, false, 0, q0.port, q1.port};
    std::mt19937_64 &rng = stream("node:" + names_.at(node));
    const bool intact = p0 != qubit_pair_.end() && p1 != qubit_pair_.end();
    if (intact && uniform01(rng) < physics_.swap_success) {
      const PairRecord r0 = pairs_.at(p0->second);
      const PairRecord r1 = pairs_.at(p1->second);
      const QubitRef partner0 = r0.a == q0 ? r0.b : r0.a;
      const QubitRef partner1 = r1.a == q1 ? r1.b : r1.a;
      out.success = true;
      out.m = static_cast<BellIndex>(rng() & 3u);
      destroy_pair(r0.id);
      destroy_pair(r1.id);
      create_pair(partner0, partner1, compose_bell(r0.bell, r1.bell, out.m));
      ++stats_.swaps_succeeded;
      free_qubit(q0);
      free_qubit(q1);
    } else {
      ++stats_.swaps_failed;
      release_qubit(q0);
      release_qubit(q1);
    }
    engine_.record(names_.at(node), out.success ? "swap_ok" : "swap_fail", out.m);
    if (swap_handler_) swap_handler_(node, out);
  });
}

void QuantumFabric::release_qubit(QubitRef q) {
  auto qi = qubit_pair_.find(key(q));
  if (qi == qubit_pair_.end()) return;
  ++stats_.releases;
  const PairRecord r = pairs_.at(qi->second);
  destroy_pair(r.id);
  free_qubit(q);
  const bool q_is_a = r.a == q;
  const QubitRef partner = q_is_a ? r.b : r.a;
  const bool partner_measured = q_is_a ? r.measured_b : r.measured_a;
  if (!partner_measured) {
    free_qubit(partner);
    engine_.record(names_.at(partner.node), "partner_released", partner.port);
    if (release_handler_) release_handler_(partner);
  }
}

void QuantumFabric::measure_qubit(QubitRef q) {
  auto qi = qubit_pair_.find(key(q));
  if (qi == qubit_pair_.end()) return;
  ++stats_.measurements;
  PairRecord &r = pairs_.at(qi->second);
  if (r.a == q) {
    r.measured_a = true;
  } else {
    r.measured_b = true;
  }
  qubit_pair_.erase(qi);
  const bool done = r.measured_a && r.measured_b;
  if (done) pairs_.erase(r.id);
  free_qubit(q);
}

std::optional<GroundTruth> QuantumFabric::ground_truth(QubitRef q) const {
  auto qi = qubit_pair_.find(key(q));
  if (qi == qubit_pair_.end()) return std::nullopt;
  const PairRecord &r = pairs_.at(qi->second);
  return GroundTruth{r.a == q ? r.b : r.a, r.bell, r.id};
}

bool QuantumFabric::consistent() const {
  std::unordered_map<uint64_t, int> seen;
  for (const auto &[id, r] : pairs_) {
    if (r.a == r.b) return false;
    if (!r.measured_a && ++seen[key(r.a)] > 1) return false;
    if (!r.measured_b && ++seen[key(r.b)] > 1) return false;
  }
  for (const auto &[k, id] : qubit_pair_) {
    if (!seen.count(k)) return false;
    auto s = states_.find(k);
    if (s == states_.end() || s->second != QubitState::kEntangled) return false;
  }
  return seen.size() == qubit_pair_.size();
}

}  // namespace quip::fabric
