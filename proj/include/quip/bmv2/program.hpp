// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quip::bmv2 {

inline constexpr int kMaxFieldWidth = 64;

// Architecture every program is validated against.
enum class Target {
  kV1Quantum,  // ingress + egress + qcontrol, quantum metadata
  kClassical,  // ingress + egress only (test subset)
};

struct FieldDef {
  std::string name;
  int width = 0;

  bool operator==(const FieldDef &) const = default;
};

struct HeaderTypeDef {
  std::string name;
  std::vector<FieldDef> fields;

  int total_width() const;
  const FieldDef *find(const std::string &field) const;

  bool operator==(const HeaderTypeDef &) const = default;
};

struct HeaderInstance {
  std::string name;
  std::string header_type;
  bool metadata = false;

  bool operator==(const HeaderInstance &) const = default;
};

// Expression tree mirroring the BMv2 expression encoding. Enum members are
// folded into constants when a program is loaded or built.
struct Expr {
  enum class Kind {
    kField,          // header.field
    kConstant,       // hexstr
    kBoolean,        // bool
    kRuntimeData,    // action parameter by index
    kHeader,         // header instance (operand of `valid`, add_header, ...)
    kRegisterArray,  // register array name (primitive operand only)
    kEnumMember,     // transient: Enum.member, removed by normalization
    kOp,             // operator application
  };

  Kind kind = Kind::kConstant;
  std::string name;       // header / register / enum / operator
  std::string member;     // field or enum member
  uint64_t value = 0;     // constant, boolean, runtime data index
  std::vector<Expr> args; // operator operands; ternary is (cond, then, else)

  static Expr field(std::string header, std::string field);
  static Expr constant(uint64_t v);
  static Expr boolean(bool b);
  static Expr runtime_data(uint64_t index);
  static Expr header(std::string header);
  static Expr register_array(std::string name);
  static Expr enum_member(std::string enum_name, std::string member);
  static Expr op(std::string op, Expr left, Expr right);
  static Expr unary(std::string op, Expr operand);
  static Expr ternary(Expr cond, Expr if_true, Expr if_false);

  bool operator==(const Expr &other) const;
};

struct Primitive {
  std::string op;
  std::vector<Expr> params;

  bool operator==(const Primitive &) const = default;
};

struct RuntimeParam {
  std::string name;
  int width = 0;

  bool operator==(const RuntimeParam &) const = default;
};

struct ActionDef {
  std::string name;
  std::vector<RuntimeParam> params;
  std::vector<Primitive> primitives;

  bool operator==(const ActionDef &) const = default;
};

struct KeyField {
  std::string header;
  std::string field;

  bool operator==(const KeyField &) const = default;
};

using NextNode = std::optional<std::string>;

struct TableDef {
  std::string name;
  std::vector<KeyField> keys;  // exact match, in order
  std::vector<std::string> actions;
  // Successor per action name; "__HIT__"/"__MISS__" keys select on hit/miss.
  std::map<std::string, NextNode> next_tables;
  NextNode base_default_next;
  std::string default_action;
  std::vector<uint64_t> default_action_data;
  bool default_action_const = false;
  uint64_t max_size = 1024;

  bool operator==(const TableDef &) const = default;
};

struct ConditionalDef {
  std::string name;
  Expr expression;
  NextNode true_next;
  NextNode false_next;

  bool operator==(const ConditionalDef &) const = default;
};

struct PipelineDef {
  std::string name;
  NextNode init_node;
  std::vector<TableDef> tables;
  std::vector<ConditionalDef> conditionals;

  const TableDef *find_table(const std::string &name) const;
  bool operator==(const PipelineDef &) const = default;
};

struct ParserTransition {
  std::optional<uint64_t> value;  // nullopt: default transition
  NextNode next_state;            // nullopt: accept

  bool operator==(const ParserTransition &) const = default;
};

struct ParserState {
  std::string name;
  std::vector<std::string> extracts;
  std::vector<KeyField> transition_key;
  std::vector<ParserTransition> transitions;

  bool operator==(const ParserState &) const = default;
};

struct ParserDef {
  std::string name;
  std::string init_state;
  std::vector<ParserState> states;

  bool operator==(const ParserDef &) const = default;
};

struct DeparserDef {
  std::string name;
  std::vector<std::string> order;

  bool operator==(const DeparserDef &) const = default;
};

struct RegisterArrayDef {
  std::string name;
  int bitwidth = 0;
  uint64_t size = 0;

  bool operator==(const RegisterArrayDef &) const = default;
};

struct EnumDef {
  std::string name;
  std::vector<std::pair<std::string, uint64_t>> members;

  bool operator==(const EnumDef &) const = default;
};

// Validated in-memory form of a BMv2 program. Instances produced by the loader
// or the builder are normalized: every name-keyed array is sorted by name, so
// structural equality is plain member-wise comparison.
struct Program {
  Target target = Target::kV1Quantum;
  std::vector<HeaderTypeDef> header_types;
  std::vector<HeaderInstance> headers;
  std::vector<ParserDef> parsers;
  std::vector<DeparserDef> deparsers;
  std::vector<ActionDef> actions;
  std::vector<PipelineDef> pipelines;
  std::vector<RegisterArrayDef> register_arrays;
  std::vector<EnumDef> enums;

  const HeaderTypeDef *find_header_type(const std::string &name) const;
  const HeaderInstance *find_header(const std::string &name) const;
  const ActionDef *find_action(const std::string &name) const;
  const PipelineDef *find_pipeline(const std::string &name) const;
  const RegisterArrayDef *find_register(const std::string &name) const;
  const EnumDef *find_enum(const std::string &name) const;
  size_t table_count() const;

  bool operator==(const Program &) const = default;
};

// Names of the architecture-defined metadata instances and pipelines.
namespace arch {
inline constexpr const char *kStandardMetadata = "standard_metadata";
inline constexpr const char *kQControlMetadata = "qcontrol_metadata";
inline constexpr const char *kXConnectMetadata = "xconnect_metadata";
inline constexpr const char *kIngress = "ingress";
inline constexpr const char *kEgress = "egress";
inline constexpr const char *kQControl = "qcontrol";
}  // namespace arch

}  // namespace quip::bmv2
