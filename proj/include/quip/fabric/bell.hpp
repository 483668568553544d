// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace quip::fabric {

// Bell index 2p+q naming |B_pq> = (I (x) X^q Z^p)|Phi+>:
// 0 = Phi+, 1 = Psi+, 2 = Phi-, 3 = Psi-.
using BellIndex = uint8_t;

// Bell index of the pair left behind when qubits holding halves of pairs
// b1 and b2 are measured in the Bell basis with outcome m.
constexpr BellIndex compose_bell(BellIndex b1, BellIndex b2, BellIndex m) {
  return static_cast<BellIndex>((b1 ^ b2 ^ m) & 3u);
}

}  // namespace quip::fabric
