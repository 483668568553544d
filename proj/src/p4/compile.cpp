// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "compiled.hpp"
#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"

namespace quip::p4 {

namespace {

const std::map<std::string, CExpr::Op> &binary_ops() {
  static const std::map<std::string, CExpr::Op> ops = {
      {"+", CExpr::kAdd}, {"-", CExpr::kSub}, {"*", CExpr::kMul}, {"&", CExpr::kAnd},
      {"|", CExpr::kOr},  {"^", CExpr::kXor}, {"<<", CExpr::kShl}, {">>", CExpr::kShr},
      {"==", CExpr::kEq}, {"!=", CExpr::kNe}, {"<", CExpr::kLt},  {"<=", CExpr::kLe},
      {">", CExpr::kGt},  {">=", CExpr::kGe}, {"and", CExpr::kLAnd}, {"or", CExpr::kLOr},
  };
  return ops;
}

const std::map<std::string, CExpr::Op> &unary_ops() {
  static const std::map<std::string, CExpr::Op> ops = {
      {"~", CExpr::kBitNot}, {"not", CExpr::kLNot}, {"d2b", CExpr::kD2B}, {"b2d", CExpr::kB2D}};
  return ops;
}

}  // namespace

FieldHandle CompiledProgram::field(const std::string &header, const std::string &name) const {
  auto it = fields.find(header + "." + name);
  if (it == fields.end()) {
    throw Error(ErrorCode::kEvaluationError, "unknown field '" + header + "." + name + "'");
  }
  return it->second;
}

CExpr CompiledProgram::compile_expr(const bmv2::Expr &e) const {
  using Kind = bmv2::Expr::Kind;
  CExpr c;
  switch (e.kind) {
    case Kind::kConstant:
    case Kind::kBoolean:
      c.op = CExpr::kConst;
      c.value = e.value;
      return c;
    case Kind::kField: {
      const FieldHandle f = field(e.name, e.member);
      c.op = CExpr::kField;
      c.a = f.slot;
      c.b = f.header;
      c.metadata = headers[f.header].metadata;
      return c;
    }
    case Kind::kRuntimeData:
      c.op = CExpr::kParam;
      c.a = static_cast<uint32_t>(e.value);
      return c;
    case Kind::kOp:
      break;
    default:
      throw Error(ErrorCode::kEvaluationError, "expression kind cannot be evaluated");
  }
  if (e.name == "valid") {
    auto it = header_ids.find(e.args.at(0).name);
    if (it == header_ids.end()) {
      throw Error(ErrorCode::kEvaluationError, "unknown header '" + e.args[0].name + "'");
    }
    c.op = CExpr::kValid;
    c.a = it->second;
    return c;
  }
  if (e.name == "?") {
    c.op = CExpr::kTernary;
  } else if (auto b = binary_ops().find(e.name); b != binary_ops().end() && e.args.size() == 2) {
    c.op = b->second;
  } else if (auto u = unary_ops().find(e.name); u != unary_ops().end() && e.args.size() == 1) {
    c.op = u->second;
  } else {
    throw Error(ErrorCode::kEvaluationError, "unsupported operator '" + e.name + "'");
  }
  for (const auto &arg : e.args) c.args.push_back(compile_expr(arg));
  return c;
}

std::shared_ptr<const CompiledProgram> compile(bmv2::Program program) {
  auto out = std::make_shared<CompiledProgram>();
  CompiledProgram &c = *out;
  c.program = std::move(program);
  const bmv2::Program &p = c.program;

  for (const auto &h : p.headers) {
    const bmv2::HeaderTypeDef *type = p.find_header_type(h.header_type);
    CHeader ch{h.name, h.metadata, c.slot_count, type->total_width(), {}};
    const auto header_id = static_cast<uint32_t>(c.headers.size());
    for (const auto &f : type->fields) {
      c.fields[h.name + "." + f.name] = FieldHandle{header_id, c.slot_count++, f.width};
      ch.widths.push_back(f.width);
    }
    c.header_ids[h.name] = header_id;
    c.headers.push_back(std::move(ch));
  }
  c.egress_spec = c.field(bmv2::arch::kStandardMetadata, "egress_spec");

  for (const auto &r : p.register_arrays) {
    c.register_ids[r.name] = static_cast<uint32_t>(c.registers.size());
    c.registers.push_back({r.name, r.bitwidth, r.size});
  }

  for (const auto &a : p.actions) {
    c.action_ids[a.name] = static_cast<uint32_t>(c.actions.size());
    CAction ca;
    ca.name = a.name;
    for (const auto &param : a.params) ca.param_widths.push_back(param.width);
    for (const auto &prim : a.primitives) {
      CPrimitive cp;
      if (prim.op == "assign") {
        cp.kind = CPrimitive::kAssign;
        cp.dst = c.field(prim.params[0].name, prim.params[0].member);
        cp.x = c.compile_expr(prim.params[1]);
      } else if (prim.op == "register_read") {
        cp.kind = CPrimitive::kRegRead;
        cp.dst = c.field(prim.params[0].name, prim.params[0].member);
        cp.reg = c.register_ids.at(prim.params[1].name);
        cp.x = c.compile_expr(prim.params[2]);
      } else if (prim.op == "register_write") {
        cp.kind = CPrimitive::kRegWrite;
        cp.reg = c.register_ids.at(prim.params[0].name);
        cp.x = c.compile_expr(prim.params[1]);
        cp.y = c.compile_expr(prim.params[2]);
      } else if (prim.op == "add_header" || prim.op == "remove_header") {
        cp.kind = prim.op == "add_header" ? CPrimitive::kAddHeader : CPrimitive::kRemoveHeader;
        cp.header = c.header_ids.at(prim.params[0].name);
      } else {
        cp.kind = CPrimitive::kDrop;
      }
      ca.prims.push_back(std::move(cp));
    }
    c.actions.push_back(std::move(ca));
  }

  for (const auto &pipe : p.pipelines) {
    CPipeline cpipe;
    cpipe.name = pipe.name;
    std::map<std::string, int32_t> node_ids;
    const size_t table_base = c.tables.size();
    for (size_t i = 0; i < pipe.tables.size(); ++i) {
      node_ids[pipe.tables[i].name] = static_cast<int32_t>(cpipe.nodes.size());
      cpipe.nodes.push_back({true, static_cast<uint32_t>(table_base + i)});
    }
    const size_t cond_base = c.conds.size();
    for (size_t i = 0; i < pipe.conditionals.size(); ++i) {
      node_ids[pipe.conditionals[i].name] = static_cast<int32_t>(cpipe.nodes.size());
      cpipe.nodes.push_back({false, static_cast<uint32_t>(cond_base + i)});
    }
    auto resolve = [&](const bmv2::NextNode &n) { return n ? node_ids.at(*n) : -1; };
    cpipe.init = resolve(pipe.init_node);

    for (const auto &t : pipe.tables) {
      CTable ct;
      ct.name = t.name;
      ct.max_size = t.max_size;
      for (const auto &k : t.keys) {
        ct.keys.push_back(c.field(k.header, k.field));
        ct.key_metadata.push_back(c.headers[ct.keys.back().header].metadata);
      }
      const int32_t fallback = resolve(t.base_default_next);
      for (const auto &a : t.actions) {
        ct.actions.push_back(c.action_ids.at(a));
        auto it = t.next_tables.find(a);
        ct.next.push_back(it == t.next_tables.end() ? fallback : resolve(it->second));
      }
      auto hit = t.next_tables.find("__HIT__");
      auto miss = t.next_tables.find("__MISS__");
      if (hit != t.next_tables.end() || miss != t.next_tables.end()) {
        ct.hit_miss = true;
        ct.hit_next = hit == t.next_tables.end() ? fallback : resolve(hit->second);
        ct.miss_next = miss == t.next_tables.end() ? fallback : resolve(miss->second);
      }
      ct.default_action = c.action_ids.at(t.default_action);
      ct.default_data = t.default_action_data;
      c.table_ids[t.name] = static_cast<uint32_t>(c.tables.size());
      c.tables.push_back(std::move(ct));
    }
    for (const auto &cond : pipe.conditionals) {
      c.conds.push_back({c.compile_expr(cond.expression), resolve(cond.true_next), resolve(cond.false_next)});
    }
    c.pipeline_ids[pipe.name] = static_cast<uint32_t>(c.pipelines.size());
    c.pipelines.push_back(std::move(cpipe));
  }

  // One parser and one deparser per device; "parser"/"deparser" win if several exist.
  const bmv2::ParserDef *parser = nullptr;
  for (const auto &candidate : p.parsers) {
    if (parser == nullptr || candidate.name == "parser") parser = &candidate;
  }
  if (parser != nullptr) {
    std::map<std::string, int32_t> state_ids;
    for (const auto &s : parser->states) state_ids[s.name] = static_cast<int32_t>(state_ids.size());
    for (const auto &s : parser->states) {
      CState cs;
      cs.name = s.name;
      for (const auto &h : s.extracts) cs.extracts.push_back(c.header_ids.at(h));
      for (const auto &k : s.transition_key) cs.key.push_back(c.field(k.header, k.field));
      for (const auto &t : s.transitions) {
        cs.transitions.push_back({!t.value.has_value(), t.value.value_or(0),
                                  t.next_state ? state_ids.at(*t.next_state) : -1});
      }
      c.states.push_back(std::move(cs));
    }
    c.parser_init = state_ids.at(parser->init_state);
  }
  const bmv2::DeparserDef *deparser = nullptr;
  for (const auto &candidate : p.deparsers) {
    if (deparser == nullptr || candidate.name == "deparser") deparser = &candidate;
  }
  if (deparser != nullptr) {
    for (const auto &h : deparser->order) c.deparse_order.push_back(c.header_ids.at(h));
  }
  return out;
}

}  // namespace quip::p4
