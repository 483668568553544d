// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "quip/fabric/bell.hpp"
#include "quip/fabric/engine.hpp"

namespace quip::fabric {

// One qubit per link: a qubit is named by its node and the port of its fibre.
struct QubitRef {
  uint32_t node = 0;
  uint32_t port = 0;

  auto operator<=>(const QubitRef &) const = default;
};

enum class QubitState { kFree, kPending, kEntangled };

struct PairRecord {
  uint64_t id = 0;
  QubitRef a;
  QubitRef b;
  BellIndex bell = 0;
  SimTime created_at = 0;
  bool measured_a = false;
  bool measured_b = false;
};

struct GroundTruth {
  QubitRef partner;
  BellIndex bell = 0;
  uint64_t pair_id = 0;
};

struct PhysicsParams {
  double attenuation_db_per_km = 0.2;
  double speed_m_per_s = 2.0e8;
  SimTime t_prep_ns = 8'000;
  double optical_bsm_success = 0.5;
  double detector_efficiency = 1.0;
  bool herald_all_bell_states = false;  // default: only Psi+ / Psi- are heralded
  double swap_success = 1.0;
  SimTime swap_duration_ns = 1'000;
};

struct HeraldSignal {
  uint16_t bsm_id = 0;
  bool success = false;
  BellIndex bell = 0;
  uint32_t port = 0;  // receiving node's qubit; 0 for the hub's own copy
};

struct SwapOutcome {
  uint16_t bsm_id = 0;
  bool success = false;
  BellIndex m = 0;
  uint32_t qubit_0 = 0;
  uint32_t qubit_1 = 0;
};

struct FabricStats {
  uint64_t attempts = 0;
  uint64_t heralded_pairs = 0;
  uint64_t swaps_requested = 0;
  uint64_t swaps_succeeded = 0;
  uint64_t swaps_failed = 0;
  uint64_t releases = 0;
  uint64_t measurements = 0;
};

// Physical layer: heralded generation over lossy fibre, swaps at routers and
// the ground-truth pair store.
class QuantumFabric {
 public:
  using HeraldHandler = std::function<void(uint32_t node, const HeraldSignal &)>;
  using SwapHandler = std::function<void(uint32_t node, const SwapOutcome &)>;
  using ReleaseHandler = std::function<void(QubitRef)>;

  QuantumFabric(EventEngine &engine, PhysicsParams physics, uint64_t seed);

  uint32_t add_node(std::string name);
  const std::string &node_name(uint32_t node) const { return names_.at(node); }

  // Fibre from a hub port to a memory qubit.
  void add_fibre(uint32_t hub, uint32_t hub_port, QubitRef memory, double length_km);

  void on_herald(HeraldHandler h) { herald_handler_ = std::move(h); }
  void on_swap_outcome(SwapHandler h) { swap_handler_ = std::move(h); }
  void on_partner_released(ReleaseHandler h) { release_handler_ = std::move(h); }

  // Repeating attempt cycles between the qubits behind two hub ports until
  // stop_generation. Raises Error(kUnitUnbound) if a port has no fibre.
  void start_generation(uint32_t hub, uint16_t bsm_id, uint32_t port_a, uint32_t port_b);
  void stop_generation(uint32_t hub, uint16_t bsm_id);
  bool generating(uint32_t hub, uint16_t bsm_id) const;

  // Raises Error(kSameQubit) or Error(kQubitNotEntangled).
  void swap_bsm(uint32_t node, uint32_t qubit_0, uint32_t qubit_1, uint16_t bsm_id);
  void release_qubit(QubitRef q);
  // Frees the qubit; its pair record stays visible to ground_truth for the
  // other side until that side is measured or released too.
  void measure_qubit(QubitRef q);

  std::optional<GroundTruth> ground_truth(QubitRef q) const;
  QubitState state(QubitRef q) const;
  size_t live_pairs() const { return pairs_.size(); }
  // Every unmeasured qubit appears in at most one record, and states agree.
  bool consistent() const;

  double link_efficiency(double length_km) const;
  double attempt_probability(double length_a_km, double length_b_km) const;
  SimTime fibre_delay(double length_km) const;
  SimTime cycle_period(double length_a_km, double length_b_km) const;

  const PhysicsParams &physics() const { return physics_; }
  const FabricStats &stats() const { return stats_; }

 private:
  struct Fibre {
    QubitRef memory;
    double length_km = 0;
    SimTime delay = 0;
  };
  struct Generation {
    uint32_t hub = 0;
    uint16_t bsm_id = 0;
    Fibre a;
    Fibre b;
    uint64_t epoch = 0;
    SimTime base = 0;
    SimTime period = 0;
    double p = 0;
    bool waiting = false;
    std::mt19937_64 *rng = nullptr;
  };
  using GenKey = std::pair<uint32_t, uint16_t>;

  static uint64_t key(QubitRef q) { return (uint64_t{q.node} << 32) | q.port; }
  void set_state(QubitRef q, QubitState s);
  void attempt(GenKey k, uint64_t epoch);
  void resolve(GenKey k, uint64_t epoch, QubitRef qa, QubitRef qb);
  void wake(QubitRef q);
  uint64_t create_pair(QubitRef a, QubitRef b, BellIndex bell);
  void destroy_pair(uint64_t id);
  void free_qubit(QubitRef q);
  std::mt19937_64 &stream(const std::string &name);

  EventEngine &engine_;
  PhysicsParams physics_;
  uint64_t seed_;
  std::vector<std::string> names_;
  std::map<std::pair<uint32_t, uint32_t>, Fibre> fibres_;  // (hub, port)
  std::map<GenKey, Generation> generations_;
  std::unordered_map<uint64_t, GenKey> qubit_generation_;
  std::unordered_map<uint64_t, QubitState> states_;
  std::unordered_map<uint64_t, uint64_t> qubit_pair_;  // unmeasured qubit -> pair id
  std::map<uint64_t, PairRecord> pairs_;
  std::set<uint64_t> swapping_;
  std::map<std::string, std::mt19937_64> streams_;
  uint64_t next_pair_id_ = 1;
  uint64_t next_epoch_ = 1;
  FabricStats stats_;
  HeraldHandler herald_handler_;
  SwapHandler swap_handler_;
  ReleaseHandler release_handler_;
};

}  // namespace quip::fabric
