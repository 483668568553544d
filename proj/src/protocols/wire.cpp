// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/protocols/wire.hpp"

#include <string>

#include "quip/error.hpp"

namespace quip::protocols {

namespace {

void put(std::vector<uint8_t> &out, uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> b) : b_(b) {}
  uint64_t take(int bytes) {
    if (pos_ + static_cast<size_t>(bytes) > b_.size()) {
      throw Error(ErrorCode::kParseError, "message truncated at byte " + std::to_string(pos_));
    }
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | b_[pos_++];
    return v;
  }
  size_t remaining() const { return b_.size() - pos_; }
  std::vector<uint8_t> rest() const { return {b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.end()}; }

 private:
  std::span<const uint8_t> b_;
  size_t pos_ = 0;
};

CtrlHeader read_ctrl(Reader &r) {
  CtrlHeader c;
  c.src = static_cast<uint16_t>(r.take(2));
  c.dst = static_cast<uint16_t>(r.take(2));
  c.peer = static_cast<uint16_t>(r.take(2));
  c.conn_id = static_cast<uint16_t>(r.take(2));
  c.client_seq = static_cast<uint32_t>(r.take(4));
  c.num_pairs = static_cast<uint16_t>(r.take(2));
  c.flags = static_cast<uint8_t>(r.take(1));
  c.status = static_cast<uint8_t>(r.take(1));
  return c;
}

}  // namespace

std::vector<uint8_t> encode(const Message &m) {
  std::vector<uint8_t> out;
  out.reserve(32 + m.payload.size());
  put(out, m.link.msg_type, 1);
  put(out, m.link.bsm_id, 2);
  put(out, m.link.label, 4);
  put(out, m.link.bell, 1);
  if (m.net) {
    put(out, m.net->conn_id, 2);
    put(out, m.net->e2e_seq, 4);
    put(out, m.net->pauli_acc, 1);
    put(out, m.net->direction, 1);
  }
  if (m.ctrl) {
    put(out, m.ctrl->src, 2);
    put(out, m.ctrl->dst, 2);
    put(out, m.ctrl->peer, 2);
    put(out, m.ctrl->conn_id, 2);
    put(out, m.ctrl->client_seq, 4);
    put(out, m.ctrl->num_pairs, 2);
    put(out, m.ctrl->flags, 1);
    put(out, m.ctrl->status, 1);
  }
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

Message decode(std::span<const uint8_t> bytes, bool host) {
  Reader r(bytes);
  Message m;
  m.link.msg_type = static_cast<uint8_t>(r.take(1));
  m.link.bsm_id = static_cast<uint16_t>(r.take(2));
  m.link.label = static_cast<uint32_t>(r.take(4));
  m.link.bell = static_cast<uint8_t>(r.take(1));
  switch (m.link.msg_type) {
    case kHerald:
      break;
    case kTrack:
    case kTrackAck: {
      NetHeader n;
      n.conn_id = static_cast<uint16_t>(r.take(2));
      n.e2e_seq = static_cast<uint32_t>(r.take(4));
      n.pauli_acc = static_cast<uint8_t>(r.take(1));
      n.direction = static_cast<uint8_t>(r.take(1));
      m.net = n;
      if (host) m.ctrl = read_ctrl(r);
      break;
    }
    case kRequest:
    case kComplete:
      m.ctrl = read_ctrl(r);
      break;
    default:
      throw Error(ErrorCode::kParseError, "unknown msg_type " + std::to_string(m.link.msg_type));
  }
  m.payload = r.rest();
  return m;
}

}  // namespace quip::protocols
