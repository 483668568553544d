// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quip/net/demand.hpp"
#include "quip/net/topology.hpp"

namespace quip::net {

struct SweepAxes {
  std::vector<uint32_t> bsm_units;  // applied to every hub; empty: as configured
  std::vector<double> rates;        // empty: demand.rate
};

struct ExperimentConfig {
  TopologySpec topology;
  DemandSpec demand;
  std::optional<uint64_t> seed;
  SweepAxes sweep;
};

// Raises Error(kInvalidConfig) with a JSON-pointer prefix ("/demand/rate: ...").
// Relative programs_dir paths are taken relative to base_dir.
ExperimentConfig parse_config(const std::string &text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &path);
// Canonical JSON; parse_config(config_to_json(c)) == c up to formatting.
std::string config_to_json(const ExperimentConfig &config);

// Sets the BSM unit count of every hub.
void set_hub_units(TopologySpec &topology, uint32_t units);

}  // namespace quip::net
