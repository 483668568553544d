// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/bmv2/builder.hpp"

#include <algorithm>
#include <set>

#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"

namespace quip::bmv2 {

ActionBuilder &ActionBuilder::assign(Expr dst, Expr src) {
  def_->primitives.push_back({"assign", {std::move(dst), std::move(src)}});
  return *this;
}

ActionBuilder &ActionBuilder::register_read(Expr dst, std::string reg, Expr index) {
  def_->primitives.push_back(
      {"register_read", {std::move(dst), Expr::register_array(std::move(reg)), std::move(index)}});
  return *this;
}

ActionBuilder &ActionBuilder::register_write(std::string reg, Expr index, Expr value) {
  def_->primitives.push_back(
      {"register_write", {Expr::register_array(std::move(reg)), std::move(index), std::move(value)}});
  return *this;
}

ActionBuilder &ActionBuilder::add_header(std::string header) {
  def_->primitives.push_back({"add_header", {Expr::header(std::move(header))}});
  return *this;
}

ActionBuilder &ActionBuilder::remove_header(std::string header) {
  def_->primitives.push_back({"remove_header", {Expr::header(std::move(header))}});
  return *this;
}

ActionBuilder &ActionBuilder::mark_to_drop() {
  def_->primitives.push_back({"mark_to_drop", {Expr::header(arch::kStandardMetadata)}});
  return *this;
}

TableBuilder &TableBuilder::key(std::string header, std::string field) {
  def_->keys.push_back({std::move(header), std::move(field)});
  return *this;
}

TableBuilder &TableBuilder::actions(std::vector<std::string> names) {
  def_->actions = std::move(names);
  return *this;
}

TableBuilder &TableBuilder::default_action(std::string name, std::vector<uint64_t> data,
                                           bool is_const) {
  def_->default_action = std::move(name);
  def_->default_action_data = std::move(data);
  def_->default_action_const = is_const;
  return *this;
}

TableBuilder &TableBuilder::max_size(uint64_t n) {
  def_->max_size = n;
  return *this;
}

Stmt apply(std::string table) {
  Stmt s;
  s.kind = Stmt::Kind::kApply;
  s.name = std::move(table);
  return s;
}

Stmt run(std::string action) {
  Stmt s;
  s.kind = Stmt::Kind::kRun;
  s.name = std::move(action);
  return s;
}

Stmt if_(Expr cond, Block then_block, Block else_block) {
  Stmt s;
  s.kind = Stmt::Kind::kIf;
  s.cond = std::move(cond);
  s.then_block = std::move(then_block);
  s.else_block = std::move(else_block);
  return s;
}

ParserStateBuilder &ParserStateBuilder::extract(std::string header) {
  def_->extracts.push_back(std::move(header));
  return *this;
}

ParserStateBuilder &ParserStateBuilder::select(std::vector<KeyField> key) {
  def_->transition_key = std::move(key);
  return *this;
}

ParserStateBuilder &ParserStateBuilder::on(uint64_t value, NextNode next) {
  def_->transitions.push_back({value, std::move(next)});
  return *this;
}

ParserStateBuilder &ParserStateBuilder::otherwise(NextNode next) {
  def_->transitions.push_back({std::nullopt, std::move(next)});
  return *this;
}

ProgramBuilder::ProgramBuilder(Target target) { program_.target = target; }

ProgramBuilder &ProgramBuilder::header_type(std::string name, std::vector<FieldDef> fields) {
  program_.header_types.push_back({std::move(name), std::move(fields)});
  return *this;
}

ProgramBuilder &ProgramBuilder::header(std::string name, std::string type, bool metadata) {
  program_.headers.push_back({std::move(name), std::move(type), metadata});
  return *this;
}

ProgramBuilder &ProgramBuilder::register_array(std::string name, int bitwidth, uint64_t size) {
  program_.register_arrays.push_back({std::move(name), bitwidth, size});
  return *this;
}

ProgramBuilder &ProgramBuilder::enumeration(std::string name, std::vector<std::string> members) {
  EnumDef e{std::move(name), {}};
  for (size_t i = 0; i < members.size(); ++i) e.members.emplace_back(std::move(members[i]), i);
  program_.enums.push_back(std::move(e));
  return *this;
}

ProgramBuilder &ProgramBuilder::deparser(std::string name, std::vector<std::string> order) {
  program_.deparsers.push_back({std::move(name), std::move(order)});
  return *this;
}

ParserStateBuilder ProgramBuilder::parser_state(std::string name, std::string parser) {
  auto it = std::find_if(program_.parsers.begin(), program_.parsers.end(),
                         [&](const ParserDef &p) { return p.name == parser; });
  if (it == program_.parsers.end()) {
    program_.parsers.push_back({parser, name, {}});
    it = std::prev(program_.parsers.end());
  }
  it->states.push_back({std::move(name), {}, {}, {}});
  return ParserStateBuilder(it->states.back());
}

ActionBuilder ProgramBuilder::action(std::string name, std::vector<RuntimeParam> params) {
  program_.actions.push_back({std::move(name), std::move(params), {}});
  return ActionBuilder(program_.actions.back());
}

TableBuilder ProgramBuilder::table(std::string pipeline_name, std::string name) {
  PipelineDef &pipe = pipeline(pipeline_name);
  TableDef t;
  t.name = std::move(name);
  pipe.tables.push_back(std::move(t));
  return TableBuilder(pipe.tables.back());
}

ProgramBuilder &ProgramBuilder::control(std::string pipeline_name, Block body) {
  pipeline(pipeline_name);
  bodies_.emplace_back(std::move(pipeline_name), std::move(body));
  return *this;
}

PipelineDef &ProgramBuilder::pipeline(const std::string &name) {
  auto it = std::find_if(program_.pipelines.begin(), program_.pipelines.end(),
                         [&](const PipelineDef &p) { return p.name == name; });
  if (it != program_.pipelines.end()) return *it;
  program_.pipelines.push_back({name, std::nullopt, {}, {}});
  return program_.pipelines.back();
}

std::string ProgramBuilder::fresh_name(const std::string &stem) {
  const int n = name_counters_[stem]++;
  return n == 0 ? stem : stem + "_" + std::to_string(n);
}

// Compiles block[index..] so that control falls through to `next` afterwards;
// returns the entry node.
NextNode ProgramBuilder::compile(PipelineDef &pipe, const Block &block, size_t index,
                                 NextNode next) {
  if (index == block.size()) return next;
  const NextNode after = compile(pipe, block, index + 1, next);
  const Stmt &s = block[index];
  const std::string where = "/pipelines/" + pipe.name;
  switch (s.kind) {
    case Stmt::Kind::kApply: {
      auto it = std::find_if(pipe.tables.begin(), pipe.tables.end(),
                             [&](const TableDef &t) { return t.name == s.name; });
      if (it == pipe.tables.end()) {
        throw LoadError(ErrorCode::kDanglingReference, where, "apply of undefined table '" + s.name + "'");
      }
      if (name_counters_["\x01apply:" + s.name]++ > 0) {
        throw LoadError(ErrorCode::kMalformedDocument, where, "table '" + s.name + "' applied twice");
      }
      for (const auto &a : it->actions) it->next_tables[a] = after;
      it->base_default_next = after;
      return it->name;
    }
    case Stmt::Kind::kRun: {
      TableDef t;
      t.name = fresh_name("tbl_" + s.name);
      t.actions = {s.name};
      t.default_action = s.name;
      t.default_action_const = true;
      t.next_tables[s.name] = after;
      t.base_default_next = after;
      pipe.tables.push_back(std::move(t));
      return pipe.tables.back().name;
    }
    case Stmt::Kind::kIf: {
      ConditionalDef c;
      c.name = fresh_name("node");
      c.expression = s.cond;
      c.true_next = compile(pipe, s.then_block, 0, after);
      c.false_next = compile(pipe, s.else_block, 0, after);
      pipe.conditionals.push_back(std::move(c));
      return pipe.conditionals.back().name;
    }
  }
  return next;
}

Program ProgramBuilder::finalize() {
  pipeline(arch::kIngress);
  pipeline(arch::kEgress);
  if (program_.target == Target::kV1Quantum) pipeline(arch::kQControl);
  std::set<std::string> seen;
  for (const auto &[name, body] : bodies_) {
    if (!seen.insert(name).second) {
      throw LoadError(ErrorCode::kMalformedDocument, "/pipelines/" + name, "control body given twice");
    }
    PipelineDef &pipe = pipeline(name);
    pipe.init_node = compile(pipe, body, 0, std::nullopt);
  }
  bodies_.clear();
  Program out = program_;
  finalize_program(out);
  return out;
}

}  // namespace quip::bmv2
