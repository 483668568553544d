// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quip/bmv2/loader.hpp"
#include "quip/p4/processor.hpp"

namespace quip::v1q {

enum class Role { kEndNode, kRouter, kHub };

std::string_view to_string(Role role);
// Accepts "end_node", "router", "heralding_hub" (or "hub").
Role parse_role(std::string_view text);

// Binds two ports to a BSM unit (hubs) or to a multicast pair (routers, end
// nodes). The multicast group with the same ID always comes with it.
struct BsmGroup {
  uint16_t bsm_id = 0;
  uint32_t entry0 = 0;
  uint32_t entry1 = 0;

  bool operator==(const BsmGroup &) const = default;
};

struct QControlEvent {
  bmv2::arch::EventType event_type = bmv2::arch::kHeraldingBsmOutcome;
  uint64_t timestamp = 0;
  uint16_t bsm_id = 0;
  bool success = false;
  uint8_t bell = 0;
};

struct Directive {
  bmv2::arch::Operation operation = bmv2::arch::kOpNone;
  uint32_t release_qubit = 0;
  uint16_t swap_bsm_id = 0;
  uint32_t swap_qubit_0 = 0;
  uint32_t swap_qubit_1 = 0;
};

struct Emission {
  uint32_t port = 0;
  std::vector<uint8_t> bytes;
};

struct ShellResult {
  Directive directive;
  std::vector<Emission> emissions;
};

struct DeviceStats {
  uint64_t packets_in = 0;
  uint64_t parse_drops = 0;
  uint64_t diverted = 0;
  uint64_t qcontrol_events = 0;
  uint64_t egress_drops = 0;       // egress_spec == 511 at the end of a path
  uint64_t unknown_group_drops = 0;
  uint64_t emissions = 0;
  uint64_t swap_directives = 0;
  uint64_t release_directives = 0;
};

// Fixed-function V1Quantum device: Parser -> Ingress -> (Egress | QControl)
// with QControl output going through replication, Egress and Deparser.
class DeviceShell {
 public:
  // Called after a group is installed (true) or removed (false). Hubs use it
  // to start and stop entanglement generation; an exception from the hook
  // rolls the installation back.
  using GroupHook = std::function<void(const BsmGroup &, bool installed)>;

  // Sentinel for "no group" in xconnect.bsm_grp; group IDs are nonzero.
  static constexpr uint16_t kNoGroup = 0;

  DeviceShell(std::string name, Role role, std::shared_ptr<const p4::CompiledProgram> program,
              uint32_t bsm_units = 0);

  const std::string &name() const { return name_; }
  Role role() const { return role_; }
  p4::Processor &processor() { return processor_; }
  const p4::Processor &processor() const { return processor_; }

  ShellResult on_classical_packet(uint32_t port, std::span<const uint8_t> raw, uint64_t now_ns);
  // Heralding and swap outcomes; the QControl block starts with no valid headers.
  ShellResult on_qcontrol_event(const QControlEvent &event);

  // Raises Error(kPortBusy), Error(kNoFreeBsmUnit) or Error(kRoleViolation).
  void install_bsm_group(const BsmGroup &group);
  // Raises Error(kUnknownGroup).
  void remove_bsm_group(uint16_t bsm_id);
  const BsmGroup *find_group(uint16_t bsm_id) const;
  std::vector<BsmGroup> groups() const;
  uint32_t bsm_units() const { return bsm_units_; }
  uint32_t units_in_use() const { return units_in_use_; }
  void set_group_hook(GroupHook hook) { hook_ = std::move(hook); }

  // Two copies with egress_port = entry0 / entry1 and xconnect.bsm_info = group.
  // Raises Error(kUnknownGroup).
  std::array<p4::PacketInstance, 2> multicast_replicate(const p4::PacketInstance &pkt,
                                                        uint16_t bsm_grp) const;

  const DeviceStats &stats() const { return stats_; }

 private:
  struct Handles {
    p4::FieldHandle ingress_port, egress_spec, egress_port;
    p4::FieldHandle event_type, event_timestamp, operation, release_qubit, swap_bsm_id,
        swap_qubit_0, swap_qubit_1, bsm_id, bsm_success, bsm_bell_index;
    p4::FieldHandle pathway, x_ingress_port, x_egress_spec, bsm_grp, bsm_info;
  };

  void run_qcontrol(p4::PacketInstance &pkt, ShellResult &out);
  void egress_and_emit(p4::PacketInstance &pkt, ShellResult &out);

  std::string name_;
  Role role_;
  p4::Processor processor_;
  Handles h_;
  uint32_t bsm_units_;
  uint32_t units_in_use_ = 0;
  std::map<uint16_t, BsmGroup> groups_;
  std::map<uint32_t, uint16_t> port_owner_;
  GroupHook hook_;
  DeviceStats stats_;
};

}  // namespace quip::v1q
