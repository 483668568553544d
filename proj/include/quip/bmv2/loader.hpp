// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "quip/bmv2/program.hpp"

namespace quip::bmv2 {

// Parses a BMv2 JSON document restricted to the supported subset:
// header_types, headers, parsers, deparsers, actions, pipelines (exact-match
// tables and conditionals), register_arrays and enums. Anything else raises
// LoadError(kUnsupportedConstruct) naming the construct and its location.
Program load_program(std::string_view program_text);
Program load_program_file(const std::filesystem::path &path);

// Emits a BMv2 JSON document with dense, name-ordered IDs.
// load_program(serialize_program(p)) == p for every valid p.
std::string serialize_program(const Program &program);

// Completes architecture metadata, folds enum members, sorts name-keyed arrays
// and validates every invariant. Used by both the loader and the builder.
void finalize_program(Program &program);

// Architecture-defined enums (value order defines the integer encoding).
namespace arch {
inline constexpr const char *kEventTypeEnum = "QControlEventType";
inline constexpr const char *kOperationEnum = "QControlOperation";
inline constexpr const char *kPathwayEnum = "PathWay";

enum EventType : uint64_t {
  kHeraldingBsmOutcome = 0,
  kSwapBsmOutcome = 1,
  kCNetwork = 2,
};
enum Operation : uint64_t { kOpNone = 0, kOpSwap = 1, kOpRelease = 2 };
enum Pathway : uint64_t { kPathCNetwork = 0, kPathQControl = 1 };

inline constexpr uint64_t kDropPort = 511;
inline constexpr uint64_t kCpuPort = 510;
}  // namespace arch

}  // namespace quip::bmv2
