// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/v1q/device.hpp"

#include "quip/error.hpp"

namespace quip::v1q {

using namespace bmv2::arch;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kEndNode: return "end_node";
    case Role::kRouter: return "router";
    case Role::kHub: return "heralding_hub";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "end_node") return Role::kEndNode;
  if (text == "router") return Role::kRouter;
  if (text == "heralding_hub" || text == "hub") return Role::kHub;
  throw Error(ErrorCode::kInvalidConfig, "unknown role '" + std::string(text) + "'");
}

DeviceShell::DeviceShell(std::string name, Role role, std::shared_ptr<const p4::CompiledProgram> program,
                         uint32_t bsm_units)
    : name_(std::move(name)), role_(role), processor_(std::move(program)), bsm_units_(bsm_units) {
  if (processor_.program().target != bmv2::Target::kV1Quantum) {
    throw Error(ErrorCode::kInvalidConfig, name_ + ": device programs must target v1quantum");
  }
  if (role_ != Role::kHub && bsm_units_ != 0) {
    throw Error(ErrorCode::kRoleViolation, name_ + ": only heralding hubs carry BSM units");
  }
  auto f = [this](const char *hdr, const char *field) { return processor_.field(hdr, field); };
  h_.ingress_port = f(kStandardMetadata, "ingress_port");
  h_.egress_spec = f(kStandardMetadata, "egress_spec");
  h_.egress_port = f(kStandardMetadata, "egress_port");
  h_.event_type = f(kQControlMetadata, "event_type");
  h_.event_timestamp = f(kQControlMetadata, "event_timestamp");
  h_.operation = f(kQControlMetadata, "operation");
  h_.release_qubit = f(kQControlMetadata, "release_qubit");
  h_.swap_bsm_id = f(kQControlMetadata, "swap_bsm_id");
  h_.swap_qubit_0 = f(kQControlMetadata, "swap_qubit_0");
  h_.swap_qubit_1 = f(kQControlMetadata, "swap_qubit_1");
  h_.bsm_id = f(kQControlMetadata, "bsm_id");
  h_.bsm_success = f(kQControlMetadata, "bsm_success");
  h_.bsm_bell_index = f(kQControlMetadata, "bsm_bell_index");
  h_.pathway = f(kXConnectMetadata, "pathway");
  h_.x_ingress_port = f(kXConnectMetadata, "ingress_port");
  h_.x_egress_spec = f(kXConnectMetadata, "egress_spec");
  h_.bsm_grp = f(kXConnectMetadata, "bsm_grp");
  h_.bsm_info = f(kXConnectMetadata, "bsm_info");
}

ShellResult DeviceShell::on_classical_packet(uint32_t port, std::span<const uint8_t> raw, uint64_t now_ns) {
  using P = p4::Processor;
  ShellResult out;
  ++stats_.packets_in;
  p4::PacketInstance pkt;
  try {
    pkt = processor_.parse(raw);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kParseError) throw;
    ++stats_.parse_drops;
    return out;
  }
  P::set(pkt, h_.ingress_port, port);
  P::set(pkt, h_.x_ingress_port, port);
  P::set(pkt, h_.egress_spec, kDropPort);
  P::set(pkt, h_.event_timestamp, now_ns);
  P::set(pkt, h_.pathway, kPathCNetwork);
  processor_.execute_pipeline(kIngress, pkt);
  if (P::get(pkt, h_.pathway) == kPathQControl) {
    ++stats_.diverted;
    P::set(pkt, h_.event_type, kCNetwork);
    run_qcontrol(pkt, out);
    return out;
  }
  if (P::get(pkt, h_.egress_spec) == kDropPort) {
    ++stats_.egress_drops;
    return out;
  }
  P::set(pkt, h_.egress_port, P::get(pkt, h_.egress_spec));
  egress_and_emit(pkt, out);
  return out;
}

ShellResult DeviceShell::on_qcontrol_event(const QControlEvent &event) {
  using P = p4::Processor;
  if (event.event_type == kCNetwork) {
    throw Error(ErrorCode::kEvaluationError, "cnetwork events come from the Ingress divert");
  }
  ShellResult out;
  p4::PacketInstance pkt = processor_.new_packet();
  P::set(pkt, h_.egress_spec, kDropPort);
  P::set(pkt, h_.pathway, kPathQControl);
  P::set(pkt, h_.event_type, event.event_type);
  P::set(pkt, h_.event_timestamp, event.timestamp);
  P::set(pkt, h_.bsm_id, event.bsm_id);
  P::set(pkt, h_.bsm_success, event.success ? 1 : 0);
  P::set(pkt, h_.bsm_bell_index, event.bell);
  run_qcontrol(pkt, out);
  return out;
}

void DeviceShell::run_qcontrol(p4::PacketInstance &pkt, ShellResult &out) {
  using P = p4::Processor;
  ++stats_.qcontrol_events;
  P::set(pkt, h_.operation, kOpNone);
  P::set(pkt, h_.x_egress_spec, kDropPort);
  P::set(pkt, h_.bsm_grp, kNoGroup);
  P::set(pkt, h_.bsm_info, 0);
  processor_.execute_pipeline(kQControl, pkt);

  Directive &d = out.directive;
  d.operation = static_cast<Operation>(P::get(pkt, h_.operation));
  if (d.operation == kOpSwap) {
    if (role_ != Role::kRouter) {
      throw Error(ErrorCode::kRoleViolation, name_ + ": only routers perform entanglement swaps");
    }
    d.swap_bsm_id = static_cast<uint16_t>(P::get(pkt, h_.swap_bsm_id));
    d.swap_qubit_0 = static_cast<uint32_t>(P::get(pkt, h_.swap_qubit_0));
    d.swap_qubit_1 = static_cast<uint32_t>(P::get(pkt, h_.swap_qubit_1));
    ++stats_.swap_directives;
  } else if (d.operation == kOpRelease) {
    if (role_ == Role::kHub) throw Error(ErrorCode::kRoleViolation, name_ + ": hubs hold no qubits");
    d.release_qubit = static_cast<uint32_t>(P::get(pkt, h_.release_qubit));
    ++stats_.release_directives;
  } else if (d.operation != kOpNone) {
    throw Error(ErrorCode::kEvaluationError, name_ + ": unknown QControl operation");
  }

  const uint64_t spec = P::get(pkt, h_.x_egress_spec);
  const auto grp = static_cast<uint16_t>(P::get(pkt, h_.bsm_grp));
  if (spec != kDropPort && grp != kNoGroup) {
    throw Error(ErrorCode::kConflictingEmission,
                name_ + ": QControl set both xconnect.egress_spec and xconnect.bsm_grp");
  }
  if (grp != kNoGroup) {
    if (groups_.count(grp) == 0) {
      ++stats_.unknown_group_drops;
      return;
    }
    for (p4::PacketInstance &copy : multicast_replicate(pkt, grp)) egress_and_emit(copy, out);
  } else if (spec != kDropPort) {
    P::set(pkt, h_.egress_spec, spec);
    P::set(pkt, h_.egress_port, spec);
    egress_and_emit(pkt, out);
  }
}

void DeviceShell::egress_and_emit(p4::PacketInstance &pkt, ShellResult &out) {
  using P = p4::Processor;
  processor_.execute_pipeline(kEgress, pkt);
  if (P::get(pkt, h_.egress_spec) == kDropPort) {
    ++stats_.egress_drops;
    return;
  }
  ++stats_.emissions;
  out.emissions.push_back({static_cast<uint32_t>(P::get(pkt, h_.egress_port)), processor_.deparse(pkt)});
}

std::array<p4::PacketInstance, 2> DeviceShell::multicast_replicate(const p4::PacketInstance &pkt,
                                                                   uint16_t bsm_grp) const {
  using P = p4::Processor;
  const BsmGroup *g = find_group(bsm_grp);
  if (g == nullptr) {
    throw Error(ErrorCode::kUnknownGroup, name_ + ": no BSM group " + std::to_string(bsm_grp));
  }
  std::array<p4::PacketInstance, 2> copies{pkt, pkt};
  const uint32_t ports[2] = {g->entry0, g->entry1};
  for (int i = 0; i < 2; ++i) {
    P::set(copies[i], h_.egress_spec, ports[i]);
    P::set(copies[i], h_.egress_port, ports[i]);
    P::set(copies[i], h_.bsm_info, bsm_grp);
  }
  return copies;
}

void DeviceShell::install_bsm_group(const BsmGroup &group) {
  if (group.bsm_id == kNoGroup) throw Error(ErrorCode::kInvalidConfig, name_ + ": BSM group id 0 is reserved");
  if (group.entry0 == group.entry1) {
    throw Error(ErrorCode::kPortBusy, name_ + ": BSM group entries must be distinct ports");
  }
  if (groups_.count(group.bsm_id)) {
    throw Error(ErrorCode::kPortBusy, name_ + ": BSM group " + std::to_string(group.bsm_id) + " exists");
  }
  for (uint32_t port : {group.entry0, group.entry1}) {
    auto it = port_owner_.find(port);
    if (it != port_owner_.end()) {
      throw Error(ErrorCode::kPortBusy, name_ + ": port " + std::to_string(port) + " belongs to group " +
                                            std::to_string(it->second));
    }
  }
  if (role_ == Role::kHub && units_in_use_ >= bsm_units_) {
    throw Error(ErrorCode::kNoFreeBsmUnit, name_ + ": all " + std::to_string(bsm_units_) + " BSM units in use");
  }
  groups_[group.bsm_id] = group;
  port_owner_[group.entry0] = group.bsm_id;
  port_owner_[group.entry1] = group.bsm_id;
  if (role_ == Role::kHub) ++units_in_use_;
  if (hook_) {
    try {
      hook_(group, true);
    } catch (...) {
      groups_.erase(group.bsm_id);
      port_owner_.erase(group.entry0);
      port_owner_.erase(group.entry1);
      if (role_ == Role::kHub) --units_in_use_;
      throw;
    }
  }
}

void DeviceShell::remove_bsm_group(uint16_t bsm_id) {
  auto it = groups_.find(bsm_id);
  if (it == groups_.end()) {
    throw Error(ErrorCode::kUnknownGroup, name_ + ": no BSM group " + std::to_string(bsm_id));
  }
  const BsmGroup g = it->second;
  groups_.erase(it);
  port_owner_.erase(g.entry0);
  port_owner_.erase(g.entry1);
  if (role_ == Role::kHub) --units_in_use_;
  if (hook_) hook_(g, false);
}

const BsmGroup *DeviceShell::find_group(uint16_t bsm_id) const {
  auto it = groups_.find(bsm_id);
  return it == groups_.end() ? nullptr : &it->second;
}

std::vector<BsmGroup> DeviceShell::groups() const {
  std::vector<BsmGroup> out;
  for (const auto &[id, g] : groups_) out.push_back(g);
  return out;
}

}  // namespace quip::v1q
