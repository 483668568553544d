// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/net/demand.hpp"

#include <cmath>
#include <random>
#include <string>

#include "quip/error.hpp"

namespace quip::net {

void validate(const DemandSpec &s) {
  auto bad = [](const std::string &why) { throw Error(ErrorCode::kInvalidConfig, why); };
  if (!(s.rate >= 0) || !std::isfinite(s.rate)) bad("rate must be a finite number >= 0");
  if (!(s.duration_s > 0)) bad("duration_s must be > 0");
  if (!(s.window_start_s >= 0 && s.window_start_s < s.window_end_s && s.window_end_s <= s.duration_s)) {
    bad("window must lie within [0, duration_s] and be non-empty");
  }
  if (s.pairs_per_request == 0 || s.pairs_per_request > 0xFFFF) bad("pairs_per_request must be in [1, 65535]");
  if (s.repetitions == 0) bad("repetitions must be >= 1");
  if (!(s.drain_limit_s >= 0)) bad("drain_limit_s must be >= 0");
}

std::vector<DemandItem> generate_demand(const DemandSpec &spec, const std::vector<uint32_t> &end_nodes,
                                        uint64_t seed) {
  std::vector<DemandItem> out;
  const size_t n = end_nodes.size();
  if (spec.rate <= 0 || n < 2) return out;
  std::mt19937_64 rng(fabric::derive_seed(seed, "demand"));
  double t = 0;
  for (uint32_t id = 1;; ++id) {
    t += -std::log1p(-fabric::uniform01(rng)) / spec.rate;
    if (t >= spec.duration_s) break;
    const auto i = static_cast<size_t>(fabric::uniform01(rng) * static_cast<double>(n));
    auto j = static_cast<size_t>(fabric::uniform01(rng) * static_cast<double>(n - 1));
    if (j >= i) ++j;
    DemandItem d;
    d.id = id;
    d.time = static_cast<fabric::SimTime>(std::llround(t * 1e9));
    d.src = end_nodes[i];
    d.dst = end_nodes[j];
    d.pairs = spec.pairs_per_request;
    out.push_back(d);
  }
  return out;
}

}  // namespace quip::net
