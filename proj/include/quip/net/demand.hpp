// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "quip/fabric/engine.hpp"

namespace quip::net {

struct DemandSpec {
  double rate = 0;  // requests per second, network-wide
  uint32_t pairs_per_request = 50;
  double duration_s = 2.0;
  double window_start_s = 1.0;
  double window_end_s = 2.0;
  uint32_t repetitions = 10;
  uint64_t base_seed = 1;
  // Keep simulating after the arrivals stop until every request is done,
  // for at most drain_limit_s more seconds.
  bool drain = true;
  double drain_limit_s = 30.0;
};

// Raises Error(kInvalidConfig).
void validate(const DemandSpec &spec);

struct DemandItem {
  uint32_t id = 0;
  fabric::SimTime time = 0;
  uint32_t src = 0;  // requester
  uint32_t dst = 0;
  uint32_t pairs = 50;
};

// Poisson arrivals on [0, duration); endpoints are an ordered pair of
// distinct entries of end_nodes, uniform. Ids count from 1.
std::vector<DemandItem> generate_demand(const DemandSpec &spec, const std::vector<uint32_t> &end_nodes,
                                        uint64_t seed);

}  // namespace quip::net
