// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace quip::protocols {

enum MsgType : uint8_t {
  kHerald = 1,
  kTrack = 2,
  kTrackAck = 3,
  kRequest = 4,
  kComplete = 5,
};

enum Direction : uint8_t { kForward = 0, kAck = 1 };

inline constexpr uint32_t kCpuPort = 510;
inline constexpr uint32_t kDropPort = 511;
// End nodes mirror deliveries to the host through this multicast group
// (entries: uplink port and the CPU port).
inline constexpr uint16_t kHostGroup = 0xFFFF;
// Per-connection register slots are indexed by conn_id & kSlotMask.
inline constexpr uint32_t kConnSlots = 4096;
inline constexpr uint64_t kSlotMask = kConnSlots - 1;

// 8 bytes.
struct LinkHeader {
  uint8_t msg_type = 0;
  uint16_t bsm_id = 0;
  uint32_t label = 0;
  uint8_t bell = 0;
  bool operator==(const LinkHeader &) const = default;
};

// 8 bytes; (conn_id, e2e_seq) names the end-to-end entanglement object.
struct NetHeader {
  uint16_t conn_id = 0;
  uint32_t e2e_seq = 0;
  uint8_t pauli_acc = 0;
  uint8_t direction = kForward;
  bool operator==(const NetHeader &) const = default;
};

// 16 bytes; REQUEST / COMPLETE, and delivery notices to the host.
struct CtrlHeader {
  uint16_t src = 0;
  uint16_t dst = 0;
  uint16_t peer = 0;
  uint16_t conn_id = 0;
  uint32_t client_seq = 0;
  uint16_t num_pairs = 0;  // pairs remaining on delivery notices
  uint8_t flags = 0;       // bit 0: sender is the requesting node
  uint8_t status = 0;
  bool operator==(const CtrlHeader &) const = default;
};

inline constexpr uint8_t kFlagRequester = 1;

struct Message {
  LinkHeader link;
  std::optional<NetHeader> net;
  std::optional<CtrlHeader> ctrl;
  std::vector<uint8_t> payload;
  bool operator==(const Message &) const = default;
};

// Emits link, net, ctrl (present ones) and payload, big-endian.
std::vector<uint8_t> encode(const Message &m);
// Mirrors the shipped parsers: TRACK/TRACK_ACK carry a net header, REQUEST/
// COMPLETE a ctrl header, HERALD neither. Host notices (TRACK_ACK with a
// trailing ctrl header) decode with host = true. Raises Error(kParseError).
Message decode(std::span<const uint8_t> bytes, bool host = false);

}  // namespace quip::protocols
