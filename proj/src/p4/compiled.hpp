// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "quip/bmv2/program.hpp"
#include "quip/p4/processor.hpp"

namespace quip::p4 {

struct CExpr {
  enum Op : uint8_t {
    kConst, kField, kParam, kValid,
    kAdd, kSub, kMul, kAnd, kOr, kXor, kShl, kShr, kBitNot,
    kEq, kNe, kLt, kLe, kGt, kGe,
    kLAnd, kLOr, kLNot, kTernary, kD2B, kB2D,
  };
  Op op = kConst;
  uint32_t a = 0;  // field slot / param index / header index
  uint32_t b = 0;  // header owning a field
  bool metadata = false;
  uint64_t value = 0;
  std::vector<CExpr> args;
};

struct CHeader {
  std::string name;
  bool metadata = false;
  uint32_t first_slot = 0;
  int total_width = 0;
  std::vector<int> widths;
};

struct CPrimitive {
  enum Kind : uint8_t { kAssign, kRegRead, kRegWrite, kAddHeader, kRemoveHeader, kDrop };
  Kind kind = kAssign;
  FieldHandle dst;
  uint32_t reg = 0;
  uint32_t header = 0;
  CExpr x;  // source value, or register index
  CExpr y;  // register write value
};

struct CAction {
  std::string name;
  std::vector<int> param_widths;
  std::vector<CPrimitive> prims;
};

struct CTable {
  std::string name;
  std::vector<FieldHandle> keys;
  std::vector<bool> key_metadata;
  std::vector<uint32_t> actions;     // global action indices
  std::vector<int32_t> next;         // parallel to actions; -1 ends the pipeline
  bool hit_miss = false;
  int32_t hit_next = -1;
  int32_t miss_next = -1;
  uint32_t default_action = 0;
  std::vector<uint64_t> default_data;
  uint64_t max_size = 0;
};

struct CCond {
  CExpr expr;
  int32_t true_next = -1;
  int32_t false_next = -1;
};

struct CNode {
  bool table = true;
  uint32_t index = 0;  // into CompiledProgram::tables or ::conds
};

struct CPipeline {
  std::string name;
  int32_t init = -1;
  std::vector<CNode> nodes;
};

struct CTransition {
  bool is_default = false;
  uint64_t value = 0;
  int32_t next = -1;  // -1 accepts
};

struct CState {
  std::string name;
  std::vector<uint32_t> extracts;
  std::vector<FieldHandle> key;
  std::vector<CTransition> transitions;
};

struct CRegister {
  std::string name;
  int width = 0;
  uint64_t size = 0;
};

struct CompiledProgram {
  bmv2::Program program;
  std::vector<CHeader> headers;
  uint32_t slot_count = 0;
  std::vector<CAction> actions;
  std::vector<CTable> tables;
  std::vector<CCond> conds;
  std::vector<CPipeline> pipelines;
  std::vector<CState> states;
  int32_t parser_init = -1;  // -1: no parser, everything is payload
  std::vector<uint32_t> deparse_order;
  std::vector<CRegister> registers;
  FieldHandle egress_spec;

  std::unordered_map<std::string, uint32_t> header_ids;
  std::unordered_map<std::string, uint32_t> action_ids;
  std::unordered_map<std::string, uint32_t> table_ids;
  std::unordered_map<std::string, uint32_t> pipeline_ids;
  std::unordered_map<std::string, uint32_t> register_ids;
  std::unordered_map<std::string, FieldHandle> fields;  // "header.field"

  FieldHandle field(const std::string &header, const std::string &name) const;
  CExpr compile_expr(const bmv2::Expr &e) const;
};

}  // namespace quip::p4
