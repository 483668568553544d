// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>

#include "quip/protocols/wire.hpp"

namespace quip::testing {

// Any well-formed protocol message: every type, random fields and a short payload.
inline protocols::Message random_message(std::mt19937_64 &rng) {
  using namespace protocols;
  static const uint8_t kinds[] = {kHerald, kTrack, kTrackAck, kRequest, kComplete};
  Message m;
  m.link.msg_type = kinds[rng() % 5];
  m.link.bsm_id = static_cast<uint16_t>(rng());
  m.link.label = static_cast<uint32_t>(rng());
  m.link.bell = static_cast<uint8_t>(rng());
  if (m.link.msg_type == kTrack || m.link.msg_type == kTrackAck) {
    m.net = NetHeader{static_cast<uint16_t>(rng()), static_cast<uint32_t>(rng()), static_cast<uint8_t>(rng()),
                      static_cast<uint8_t>(rng())};
  } else if (m.link.msg_type != kHerald) {
    m.ctrl = CtrlHeader{static_cast<uint16_t>(rng()), static_cast<uint16_t>(rng()), static_cast<uint16_t>(rng()),
                        static_cast<uint16_t>(rng()), static_cast<uint32_t>(rng()), static_cast<uint16_t>(rng()),
                        static_cast<uint8_t>(rng()), static_cast<uint8_t>(rng())};
  }
  m.payload.resize(rng() % 6);
  for (auto &b : m.payload) b = static_cast<uint8_t>(rng());
  return m;
}

}  // namespace quip::testing
