// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "quip/bmv2/program.hpp"

namespace quip::bmv2 {

// Short expression constructors for hand-written programs.
namespace dsl {
inline Expr F(std::string header, std::string field) {
  return Expr::field(std::move(header), std::move(field));
}
inline Expr C(uint64_t v) { return Expr::constant(v); }
inline Expr P(uint64_t index) { return Expr::runtime_data(index); }
inline Expr E(std::string enum_name, std::string member) {
  return Expr::enum_member(std::move(enum_name), std::move(member));
}
inline Expr Valid(std::string header) {
  return Expr::unary("valid", Expr::header(std::move(header)));
}
inline Expr Eq(Expr a, Expr b) { return Expr::op("==", std::move(a), std::move(b)); }
inline Expr Ne(Expr a, Expr b) { return Expr::op("!=", std::move(a), std::move(b)); }
inline Expr Ge(Expr a, Expr b) { return Expr::op(">=", std::move(a), std::move(b)); }
inline Expr And(Expr a, Expr b) { return Expr::op("and", std::move(a), std::move(b)); }
inline Expr Or(Expr a, Expr b) { return Expr::op("or", std::move(a), std::move(b)); }
inline Expr Not(Expr a) { return Expr::unary("not", std::move(a)); }
inline Expr Add(Expr a, Expr b) { return Expr::op("+", std::move(a), std::move(b)); }
inline Expr Xor(Expr a, Expr b) { return Expr::op("^", std::move(a), std::move(b)); }
}  // namespace dsl

class ActionBuilder {
 public:
  explicit ActionBuilder(ActionDef &def) : def_(&def) {}

  ActionBuilder &assign(Expr dst, Expr src);
  ActionBuilder &register_read(Expr dst, std::string reg, Expr index);
  ActionBuilder &register_write(std::string reg, Expr index, Expr value);
  ActionBuilder &add_header(std::string header);
  ActionBuilder &remove_header(std::string header);
  ActionBuilder &mark_to_drop();

 private:
  ActionDef *def_;
};

class TableBuilder {
 public:
  explicit TableBuilder(TableDef &def) : def_(&def) {}

  TableBuilder &key(std::string header, std::string field);
  TableBuilder &actions(std::vector<std::string> names);
  TableBuilder &default_action(std::string name, std::vector<uint64_t> data = {},
                               bool is_const = false);
  TableBuilder &max_size(uint64_t n);

 private:
  TableDef *def_;
};

// Structured control flow; compiled into the BMv2 table/conditional graph.
struct Stmt {
  enum class Kind { kApply, kRun, kIf };
  Kind kind = Kind::kApply;
  std::string name;  // table (kApply) or action (kRun)
  Expr cond;
  std::vector<Stmt> then_block;
  std::vector<Stmt> else_block;
};
using Block = std::vector<Stmt>;

Stmt apply(std::string table);
// Runs an action unconditionally via a synthesized key-less table.
Stmt run(std::string action);
Stmt if_(Expr cond, Block then_block, Block else_block = {});

class ParserStateBuilder {
 public:
  explicit ParserStateBuilder(ParserState &def) : def_(&def) {}

  ParserStateBuilder &extract(std::string header);
  ParserStateBuilder &select(std::vector<KeyField> key);
  ParserStateBuilder &on(uint64_t value, NextNode next);
  ParserStateBuilder &otherwise(NextNode next);

 private:
  ParserState *def_;
};

class ProgramBuilder {
 public:
  explicit ProgramBuilder(Target target = Target::kV1Quantum);

  ProgramBuilder &header_type(std::string name, std::vector<FieldDef> fields);
  ProgramBuilder &header(std::string name, std::string type, bool metadata = false);
  ProgramBuilder &register_array(std::string name, int bitwidth, uint64_t size);
  ProgramBuilder &enumeration(std::string name, std::vector<std::string> members);
  ProgramBuilder &deparser(std::string name, std::vector<std::string> order);

  // Parser "parser" is created on first use; init state is the first state.
  ParserStateBuilder parser_state(std::string name, std::string parser = "parser");

  ActionBuilder action(std::string name, std::vector<RuntimeParam> params = {});
  TableBuilder table(std::string pipeline, std::string name);
  ProgramBuilder &control(std::string pipeline, Block body);

  // Validates and normalizes; throws LoadError like load_program.
  Program finalize();

 private:
  PipelineDef &pipeline(const std::string &name);
  NextNode compile(PipelineDef &pipe, const Block &block, size_t index, NextNode next);
  std::string fresh_name(const std::string &stem);

  Program program_;
  std::vector<std::pair<std::string, Block>> bodies_;
  std::map<std::string, int> name_counters_;
};

}  // namespace quip::bmv2
