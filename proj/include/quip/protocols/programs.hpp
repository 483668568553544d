// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "quip/bmv2/program.hpp"
#include "quip/v1q/device.hpp"

namespace quip::protocols {

// Builder recipes for the shipped programs/{hub,endnode,router}.json.
bmv2::Program build_hub_program();
bmv2::Program build_endnode_program();
bmv2::Program build_router_program();
bmv2::Program build_program(v1q::Role role);

const char *program_file_name(v1q::Role role);

// Control-plane facing table and register names.
namespace names {
// All roles, ingress: key ctrl.dst -> forward(port).
inline constexpr const char *kCtrlRoute = "ctrl_route";
inline constexpr const char *kForward = "forward";
// End node, qcontrol: key ingress_port -> set_conn(cid, is_head, num_pairs).
inline constexpr const char *kConn = "conn";
inline constexpr const char *kSetConn = "set_conn";
// Router, qcontrol: key ingress_port -> port_cid(cid); key cid -> set_conn(up, down).
inline constexpr const char *kPortConn = "port_conn";
inline constexpr const char *kPortCid = "port_cid";
inline constexpr const char *kCidConn = "cid_conn";
}  // namespace names

// Registers that hold per-connection state on end nodes (indexed by
// cid & kSlotMask) and per-port / per-connection state on routers.
const std::vector<std::string> &endnode_conn_registers();
const std::vector<std::string> &router_conn_registers();
const std::vector<std::string> &router_port_registers();

}  // namespace quip::protocols
