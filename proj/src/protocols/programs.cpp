// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/protocols/programs.hpp"

#include "quip/bmv2/builder.hpp"
#include "quip/protocols/wire.hpp"

namespace quip::protocols {

namespace {

using namespace bmv2::dsl;
using bmv2::apply;
using bmv2::Expr;
using bmv2::if_;
using bmv2::ProgramBuilder;
using bmv2::run;

constexpr const char *kStd = "standard_metadata";
constexpr const char *kQc = "qcontrol_metadata";
constexpr const char *kXc = "xconnect_metadata";

Expr M(const char *field) { return F("meta", field); }
Expr Lt(Expr a, Expr b) { return Expr::op("<", std::move(a), std::move(b)); }
Expr Sub(Expr a, Expr b) { return Expr::op("-", std::move(a), std::move(b)); }
Expr Mask(Expr a) { return Expr::op("&", std::move(a), C(kSlotMask)); }
Expr IsEvent(const char *member) { return Eq(F(kQc, "event_type"), E("QControlEventType", member)); }
Expr IsMsg(MsgType t) { return Eq(F("link", "msg_type"), C(t)); }

// Headers, parser, deparser and the control-message routing shared by all roles.
ProgramBuilder common(std::vector<bmv2::FieldDef> meta_fields) {
  ProgramBuilder b;
  b.header_type("link_t", {{"msg_type", 8}, {"bsm_id", 16}, {"label", 32}, {"bell", 8}});
  b.header_type("net_t", {{"conn_id", 16}, {"e2e_seq", 32}, {"pauli_acc", 8}, {"direction", 8}});
  b.header_type("ctrl_t", {{"src", 16}, {"dst", 16}, {"peer", 16}, {"conn_id", 16},
                           {"client_seq", 32}, {"num_pairs", 16}, {"flags", 8}, {"status", 8}});
  b.header_type("meta_t", std::move(meta_fields));
  b.header("link", "link_t").header("net", "net_t").header("ctrl", "ctrl_t").header("meta", "meta_t", true);

  b.parser_state("start")
      .extract("link")
      .select({{"link", "msg_type"}})
      .on(kHerald, std::nullopt)
      .on(kTrack, "parse_net")
      .on(kTrackAck, "parse_net")
      .on(kRequest, "parse_ctrl")
      .on(kComplete, "parse_ctrl");
  b.parser_state("parse_net").extract("net");
  b.parser_state("parse_ctrl").extract("ctrl");
  b.deparser("deparser", {"link", "net", "ctrl"});

  b.action("NoAction");
  b.action(names::kForward, {{"port", 9}}).assign(F(kStd, "egress_spec"), P(0));
  b.action("drop").mark_to_drop();
  b.action("divert").assign(F(kXc, "pathway"), E("PathWay", "qcontrol"));
  b.table("ingress", names::kCtrlRoute)
      .key("ctrl", "dst")
      .actions({names::kForward, "drop"})
      .default_action("drop")
      .max_size(1024);
  return b;
}

void release_ingress_qubit(ProgramBuilder &b) {
  b.action("release_port")
      .assign(F(kQc, "operation"), E("QControlOperation", "release"))
      .assign(F(kQc, "release_qubit"), F(kStd, "ingress_port"));
}

// delivered[slot] += 1; meta.remaining = num_pairs - delivered.
bmv2::ActionBuilder count_delivery(bmv2::ActionBuilder a) {
  return a.register_read(M("count"), "delivered", M("slot"))
      .assign(M("count"), Add(M("count"), C(1)))
      .register_write("delivered", M("slot"), M("count"))
      .assign(M("remaining"), Sub(M("num_pairs"), M("count")));
}

}  // namespace

bmv2::Program build_hub_program() {
  ProgramBuilder b = common({{"label", 32}});
  b.register_array("labels", 32, 65536);

  b.control("ingress", {if_(Valid("ctrl"), {apply(names::kCtrlRoute)},
                            {if_(Valid("net"), {run("divert")})})});

  // Classical TRACK/TRACK_ACK cross the hub over the link's own BSM group.
  b.action("relay").assign(F(kXc, "bsm_grp"), F("link", "bsm_id"));
  b.action("herald")
      .register_read(M("label"), "labels", F(kQc, "bsm_id"))
      .assign(M("label"), Add(M("label"), C(1)))
      .register_write("labels", F(kQc, "bsm_id"), M("label"))
      .add_header("link")
      .assign(F("link", "msg_type"), C(kHerald))
      .assign(F("link", "bsm_id"), F(kQc, "bsm_id"))
      .assign(F("link", "label"), M("label"))
      .assign(F("link", "bell"), F(kQc, "bsm_bell_index"))
      .assign(F(kXc, "bsm_grp"), F(kQc, "bsm_id"));
  b.control("qcontrol",
            {if_(IsEvent("cnetwork"), {run("relay")},
                 {if_(And(IsEvent("heralding_bsm_outcome"), Eq(F(kQc, "bsm_success"), C(1))), {run("herald")})})});

  // A relayed copy never goes back out of the port it came in on.
  b.control("egress", {if_(Eq(F(kStd, "egress_port"), F(kStd, "ingress_port")), {run("drop")})});
  return b.finalize();
}

bmv2::Program build_endnode_program() {
  ProgramBuilder b = common({{"has_conn", 1}, {"cid", 16}, {"is_head", 1}, {"num_pairs", 16},
                             {"slot", 12}, {"seq", 32}, {"count", 16}, {"remaining", 16},
                             {"v", 1}, {"lbl", 32}, {"sq", 32}});
  for (const auto &[name, width] : std::vector<std::pair<std::string, int>>{
           {"sent", 32}, {"delivered", 16}, {"head_label", 32}, {"head_seq", 32},
           {"tail_valid", 1}, {"tail_label", 32}, {"tail_bell", 8},
           {"trk_valid", 1}, {"trk_label", 32}, {"trk_seq", 32}, {"trk_acc", 8}}) {
    b.register_array(name, width, kConnSlots);
  }

  b.control("ingress", {if_(Valid("ctrl"), {apply(names::kCtrlRoute)}, {run("divert")})});

  b.action(names::kSetConn, {{"cid", 16}, {"is_head", 1}, {"num_pairs", 16}})
      .assign(M("has_conn"), C(1))
      .assign(M("cid"), P(0))
      .assign(M("is_head"), P(1))
      .assign(M("num_pairs"), P(2))
      .assign(M("slot"), Mask(P(0)));
  b.action("no_conn").assign(M("has_conn"), C(0));
  b.table("qcontrol", names::kConn)
      .key(kStd, "ingress_port")
      .actions({names::kSetConn, "no_conn"})
      .default_action("no_conn")
      .max_size(512);
  release_ingress_qubit(b);

  // Head: every heralded pair becomes the next end-to-end sequence number.
  b.action("head_next")
      .register_read(M("seq"), "sent", M("slot"))
      .assign(M("seq"), Add(M("seq"), C(1)));
  b.action("head_track")
      .register_write("sent", M("slot"), M("seq"))
      .register_write("head_label", M("slot"), F("link", "label"))
      .register_write("head_seq", M("slot"), M("seq"))
      .assign(F("link", "msg_type"), C(kTrack))
      .add_header("net")
      .assign(F("net", "conn_id"), M("cid"))
      .assign(F("net", "e2e_seq"), M("seq"))
      .assign(F("net", "pauli_acc"), F("link", "bell"))
      .assign(F("net", "direction"), C(kForward))
      .assign(F(kXc, "egress_spec"), F(kStd, "ingress_port"));
  b.action("head_check")
      .register_read(M("lbl"), "head_label", M("slot"))
      .register_read(M("sq"), "head_seq", M("slot"));
  count_delivery(b.action("head_deliver").register_write("head_seq", M("slot"), C(0)))
      .assign(F(kXc, "egress_spec"), C(kCpuPort));

  // Tail: remember the link pair, match it against TRACK, answer with TRACK_ACK.
  b.action("tail_store")
      .register_write("tail_valid", M("slot"), C(1))
      .register_write("tail_label", M("slot"), F("link", "label"))
      .register_write("tail_bell", M("slot"), F("link", "bell"))
      .register_read(M("v"), "trk_valid", M("slot"))
      .register_read(M("lbl"), "trk_label", M("slot"));
  count_delivery(b.action("tail_flush")
                     .assign(F("link", "msg_type"), C(kTrackAck))
                     .add_header("net")
                     .assign(F("net", "conn_id"), M("cid"))
                     .register_read(F("net", "e2e_seq"), "trk_seq", M("slot"))
                     .register_read(F("net", "pauli_acc"), "trk_acc", M("slot"))
                     .assign(F("net", "direction"), C(kAck))
                     .register_write("trk_valid", M("slot"), C(0))
                     .register_write("tail_valid", M("slot"), C(0)))
      .assign(F(kXc, "bsm_grp"), C(kHostGroup));
  b.action("tail_check")
      .register_read(M("v"), "tail_valid", M("slot"))
      .register_read(M("lbl"), "tail_label", M("slot"));
  count_delivery(b.action("tail_ack")
                     .assign(F("link", "msg_type"), C(kTrackAck))
                     .assign(F("net", "direction"), C(kAck))
                     .register_write("tail_valid", M("slot"), C(0)))
      .assign(F(kXc, "bsm_grp"), C(kHostGroup));
  b.action("tail_buffer")
      .register_write("trk_valid", M("slot"), C(1))
      .register_write("trk_label", M("slot"), F("link", "label"))
      .register_write("trk_seq", M("slot"), F("net", "e2e_seq"))
      .register_write("trk_acc", M("slot"), F("net", "pauli_acc"));

  const Expr label_matches = And(Eq(M("v"), C(1)), Eq(M("lbl"), F("link", "label")));
  b.control(
      "qcontrol",
      {if_(IsEvent("cnetwork"),
           {apply(names::kConn),
            if_(IsMsg(kHerald),
                {if_(Eq(M("has_conn"), C(0)), {run("release_port")},
                     {if_(Eq(M("is_head"), C(1)),
                          {run("head_next"), if_(Ge(M("num_pairs"), M("seq")), {run("head_track")})},
                          {run("tail_store"), if_(label_matches, {run("tail_flush")})})})},
                {if_(And(Eq(M("has_conn"), C(1)), Eq(F("net", "conn_id"), M("cid"))),
                     {if_(IsMsg(kTrack),
                          {if_(Eq(M("is_head"), C(0)),
                               {run("tail_check"), if_(label_matches, {run("tail_ack")}, {run("tail_buffer")})})},
                          {if_(Eq(M("is_head"), C(1)),
                               {run("head_check"),
                                if_(And(Eq(M("lbl"), F("link", "label")), Eq(M("sq"), F("net", "e2e_seq"))),
                                    {run("head_deliver")})})})})})})});

  // Host copies carry the remaining pair count in a ctrl trailer.
  b.action("host_notice")
      .add_header("ctrl")
      .assign(F("ctrl", "conn_id"), F("net", "conn_id"))
      .assign(F("ctrl", "num_pairs"), M("remaining"));
  b.control("egress", {if_(And(Eq(F(kStd, "egress_port"), C(kCpuPort)), Valid("net")), {run("host_notice")})});
  return b.finalize();
}

bmv2::Program build_router_program() {
  ProgramBuilder b = common({{"cid_key", 16}, {"has_conn", 1}, {"cid", 16}, {"up", 9}, {"down", 9},
                             {"slot", 12}, {"v_up", 8}, {"v_down", 8}, {"l_up", 32}, {"l_down", 32},
                             {"b_down", 8}, {"g_up", 16}, {"g_down", 16}, {"t_valid", 1},
                             {"t_label", 32}, {"s_valid", 1}, {"s_lu", 32}, {"s_ld", 32}, {"corr", 8}});
  for (const auto &name : router_port_registers()) {
    b.register_array(name, name == "pair_label" ? 32 : name == "pair_bsm" ? 16 : 8, 512);
  }
  for (const auto &[name, width] : std::vector<std::pair<std::string, int>>{
           {"swp_valid", 1}, {"swp_label_up", 32}, {"swp_label_down", 32}, {"swp_corr", 8},
           {"swp_bell_down", 8}, {"swp_bsm_up", 16}, {"swp_bsm_down", 16},
           {"trk_valid", 1}, {"trk_label", 32}, {"trk_seq", 32}, {"trk_acc", 8}}) {
    b.register_array(name, width, kConnSlots);
  }

  b.control("ingress", {if_(Valid("ctrl"), {apply(names::kCtrlRoute)}, {run("divert")})});

  b.action(names::kPortCid, {{"cid", 16}}).assign(M("cid_key"), P(0));
  b.action("no_port").assign(M("cid_key"), C(0));
  b.table("qcontrol", names::kPortConn)
      .key(kStd, "ingress_port")
      .actions({names::kPortCid, "no_port"})
      .default_action("no_port")
      .max_size(512);
  b.action("key_from_net").assign(M("cid_key"), F("net", "conn_id"));
  b.action("key_from_bsm").assign(M("cid_key"), F(kQc, "bsm_id"));
  b.action(names::kSetConn, {{"up", 9}, {"down", 9}})
      .assign(M("has_conn"), C(1))
      .assign(M("cid"), M("cid_key"))
      .assign(M("up"), P(0))
      .assign(M("down"), P(1))
      .assign(M("slot"), Mask(M("cid_key")));
  b.action("no_conn").assign(M("has_conn"), C(0));
  b.table("qcontrol", names::kCidConn)
      .key("meta", "cid_key")
      .actions({names::kSetConn, "no_conn"})
      .default_action("no_conn")
      .max_size(kConnSlots);
  release_ingress_qubit(b);

  // Link pairs, one slot per port (port == qubit).
  b.action("store_pair")
      .register_write("pair_valid", F(kStd, "ingress_port"), C(1))
      .register_write("pair_label", F(kStd, "ingress_port"), F("link", "label"))
      .register_write("pair_bell", F(kStd, "ingress_port"), F("link", "bell"))
      .register_write("pair_bsm", F(kStd, "ingress_port"), F("link", "bsm_id"))
      .register_read(M("v_up"), "pair_valid", M("up"))
      .register_read(M("v_down"), "pair_valid", M("down"));
  b.action("trigger_swap")
      .assign(F(kQc, "operation"), E("QControlOperation", "swap"))
      .assign(F(kQc, "swap_bsm_id"), M("cid"))
      .assign(F(kQc, "swap_qubit_0"), M("up"))
      .assign(F(kQc, "swap_qubit_1"), M("down"))
      .register_write("pair_valid", M("up"), C(2))
      .register_write("pair_valid", M("down"), C(2));

  b.action("record_swap")
      .register_read(M("l_up"), "pair_label", M("up"))
      .register_read(M("l_down"), "pair_label", M("down"))
      .register_read(M("b_down"), "pair_bell", M("down"))
      .register_read(M("g_up"), "pair_bsm", M("up"))
      .register_read(M("g_down"), "pair_bsm", M("down"))
      .assign(M("corr"), Xor(F(kQc, "bsm_bell_index"), M("b_down")))
      .register_write("swp_valid", M("slot"), C(1))
      .register_write("swp_label_up", M("slot"), M("l_up"))
      .register_write("swp_label_down", M("slot"), M("l_down"))
      .register_write("swp_corr", M("slot"), M("corr"))
      .register_write("swp_bell_down", M("slot"), M("b_down"))
      .register_write("swp_bsm_up", M("slot"), M("g_up"))
      .register_write("swp_bsm_down", M("slot"), M("g_down"))
      .register_write("pair_valid", M("up"), C(0))
      .register_write("pair_valid", M("down"), C(0))
      .register_read(M("t_valid"), "trk_valid", M("slot"))
      .register_read(M("t_label"), "trk_label", M("slot"));
  b.action("flush_track")
      .add_header("link")
      .assign(F("link", "msg_type"), C(kTrack))
      .assign(F("link", "bsm_id"), M("g_down"))
      .assign(F("link", "label"), M("l_down"))
      .assign(F("link", "bell"), M("b_down"))
      .add_header("net")
      .assign(F("net", "conn_id"), M("cid"))
      .register_read(F("net", "e2e_seq"), "trk_seq", M("slot"))
      .register_read(F("net", "pauli_acc"), "trk_acc", M("slot"))
      .assign(F("net", "pauli_acc"), Xor(F("net", "pauli_acc"), M("corr")))
      .assign(F("net", "direction"), C(kForward))
      .register_write("trk_valid", M("slot"), C(0))
      .assign(F(kXc, "egress_spec"), M("down"));
  b.action("clear_pairs")
      .register_write("pair_valid", M("up"), C(0))
      .register_write("pair_valid", M("down"), C(0));

  b.action("load_swap")
      .register_read(M("s_valid"), "swp_valid", M("slot"))
      .register_read(M("s_lu"), "swp_label_up", M("slot"))
      .register_read(M("s_ld"), "swp_label_down", M("slot"));
  b.action("forward_track")
      .register_read(F("link", "label"), "swp_label_down", M("slot"))
      .register_read(F("link", "bsm_id"), "swp_bsm_down", M("slot"))
      .register_read(F("link", "bell"), "swp_bell_down", M("slot"))
      .register_read(M("corr"), "swp_corr", M("slot"))
      .assign(F("net", "pauli_acc"), Xor(F("net", "pauli_acc"), M("corr")))
      .assign(F(kXc, "egress_spec"), M("down"));
  b.action("buffer_track")
      .register_write("trk_valid", M("slot"), C(1))
      .register_write("trk_label", M("slot"), F("link", "label"))
      .register_write("trk_seq", M("slot"), F("net", "e2e_seq"))
      .register_write("trk_acc", M("slot"), F("net", "pauli_acc"));
  b.action("forward_ack")
      .register_read(F("link", "label"), "swp_label_up", M("slot"))
      .register_read(F("link", "bsm_id"), "swp_bsm_up", M("slot"))
      .register_write("swp_valid", M("slot"), C(0))
      .assign(F(kXc, "egress_spec"), M("up"));

  b.control(
      "qcontrol",
      {if_(IsEvent("cnetwork"), {if_(IsMsg(kHerald), {apply(names::kPortConn)}, {run("key_from_net")})},
           {run("key_from_bsm")}),
       apply(names::kCidConn),
       if_(IsEvent("cnetwork"),
           {if_(IsMsg(kHerald),
                {if_(Eq(M("has_conn"), C(0)), {run("release_port")},
                     {run("store_pair"),
                      if_(And(Eq(M("v_up"), C(1)), Eq(M("v_down"), C(1))), {run("trigger_swap")})})},
                {if_(Eq(M("has_conn"), C(1)),
                     {run("load_swap"),
                      if_(IsMsg(kTrack),
                          {if_(And(Eq(M("s_valid"), C(1)), Eq(M("s_lu"), F("link", "label"))),
                               {run("forward_track")}, {run("buffer_track")})},
                          {if_(And(Eq(M("s_valid"), C(1)), Eq(M("s_ld"), F("link", "label"))),
                               {run("forward_ack")})})})})},
           {if_(And(IsEvent("swap_bsm_outcome"), Eq(M("has_conn"), C(1))),
                {if_(Eq(F(kQc, "bsm_success"), C(1)),
                     {run("record_swap"),
                      if_(And(Eq(M("t_valid"), C(1)), Eq(M("t_label"), M("l_up"))), {run("flush_track")})},
                     {run("clear_pairs")})})})});
  return b.finalize();
}

bmv2::Program build_program(v1q::Role role) {
  switch (role) {
    case v1q::Role::kHub: return build_hub_program();
    case v1q::Role::kRouter: return build_router_program();
    case v1q::Role::kEndNode: break;
  }
  return build_endnode_program();
}

const char *program_file_name(v1q::Role role) {
  switch (role) {
    case v1q::Role::kHub: return "hub.json";
    case v1q::Role::kRouter: return "router.json";
    case v1q::Role::kEndNode: break;
  }
  return "endnode.json";
}

const std::vector<std::string> &endnode_conn_registers() {
  static const std::vector<std::string> regs = {"sent", "delivered", "head_label", "head_seq",
                                                "tail_valid", "tail_label", "tail_bell",
                                                "trk_valid", "trk_label", "trk_seq", "trk_acc"};
  return regs;
}

const std::vector<std::string> &router_conn_registers() {
  static const std::vector<std::string> regs = {"swp_valid", "swp_label_up", "swp_label_down", "swp_corr",
                                                "swp_bell_down", "swp_bsm_up", "swp_bsm_down",
                                                "trk_valid", "trk_label", "trk_seq", "trk_acc"};
  return regs;
}

const std::vector<std::string> &router_port_registers() {
  static const std::vector<std::string> regs = {"pair_valid", "pair_label", "pair_bell", "pair_bsm"};
  return regs;
}

}  // namespace quip::protocols
