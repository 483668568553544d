// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quip/bmv2/program.hpp"

namespace quip::p4 {

struct CompiledProgram;

// Header values live in one flat vector indexed by a per-program slot layout.
// Metadata instances are always valid.
struct PacketInstance {
  std::vector<uint64_t> values;
  std::vector<uint8_t> valid;  // per header instance
  std::vector<uint8_t> payload;

  bool operator==(const PacketInstance &) const = default;
};

struct FieldHandle {
  uint32_t header = 0;
  uint32_t slot = 0;
  int width = 0;
};

struct TableEntry {
  std::string table;
  std::vector<uint64_t> key;
  std::string action;
  std::vector<uint64_t> params;

  bool operator==(const TableEntry &) const = default;
};

struct LookupResult {
  bool hit = false;
  std::string action;
  std::vector<uint64_t> params;
};

// Indexed, immutable form of a program; shared between every processor that
// runs it, including processors in concurrently running simulations.
std::shared_ptr<const CompiledProgram> compile(bmv2::Program program);

// Executes the blocks of one program instance: parser, pipelines, deparser,
// table state and register arrays. Pipeline execution takes zero simulated time.
class Processor {
 public:
  explicit Processor(std::shared_ptr<const CompiledProgram> compiled);
  explicit Processor(bmv2::Program program);

  const bmv2::Program &program() const;
  const std::shared_ptr<const CompiledProgram> &compiled() const { return compiled_; }

  // Zeroed packet: metadata valid, every other header invalid, no payload.
  PacketInstance new_packet() const;

  // Raises Error(kParseError) when the input is shorter than a required
  // extract or no transition matches.
  PacketInstance parse(std::span<const uint8_t> raw) const;
  std::vector<uint8_t> deparse(const PacketInstance &pkt) const;

  void execute_pipeline(std::string_view pipeline, PacketInstance &pkt);

  // Compiles and evaluates a stand-alone expression against `pkt`.
  uint64_t eval_expression(const bmv2::Expr &expr, const PacketInstance &pkt,
                           std::span<const uint64_t> params = {}) const;

  void table_insert(const TableEntry &entry);
  void table_delete(std::string_view table, const std::vector<uint64_t> &key);
  LookupResult table_lookup(std::string_view table, const std::vector<uint64_t> &key) const;
  std::vector<TableEntry> table_entries(std::string_view table) const;
  size_t table_size(std::string_view table) const;
  void table_clear(std::string_view table);

  uint64_t register_read(std::string_view array, uint64_t index) const;
  void register_write(std::string_view array, uint64_t index, uint64_t value);
  void reset_registers();

  FieldHandle field(std::string_view header, std::string_view field) const;
  int header_index(std::string_view header) const;

  static uint64_t get(const PacketInstance &pkt, FieldHandle f) { return pkt.values[f.slot]; }
  static void set(PacketInstance &pkt, FieldHandle f, uint64_t v);
  uint64_t get(const PacketInstance &pkt, std::string_view header, std::string_view field) const;
  void set(PacketInstance &pkt, std::string_view header, std::string_view field, uint64_t v) const;
  bool is_valid(const PacketInstance &pkt, std::string_view header) const;
  // Marking a header valid zeroes its fields.
  void set_valid(PacketInstance &pkt, std::string_view header, bool valid) const;

 private:
  struct KeyHash {
    size_t operator()(const std::vector<uint64_t> &key) const noexcept;
  };
  struct StoredEntry {
    uint32_t action = 0;  // index into CompiledProgram::actions
    std::vector<uint64_t> params;
  };
  using TableMap = std::unordered_map<std::vector<uint64_t>, StoredEntry, KeyHash>;

  friend class Executor;

  size_t table_id(std::string_view table) const;
  size_t register_id(std::string_view array) const;
  uint64_t register_read_at(size_t reg, uint64_t index) const;
  void register_write_at(size_t reg, uint64_t index, uint64_t value);

  std::shared_ptr<const CompiledProgram> compiled_;
  std::vector<TableMap> tables_;
  std::vector<std::vector<uint64_t>> registers_;
};

inline uint64_t width_mask(int width) {
  return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

}  // namespace quip::p4
