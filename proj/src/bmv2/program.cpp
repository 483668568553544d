// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/bmv2/program.hpp"

#include <algorithm>

#include "quip/error.hpp"

namespace quip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kUnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kWidthOutOfRange: return "WidthOutOfRange";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEvaluationError: return "EvaluationError";
    case ErrorCode::kUnknownTable: return "UnknownTable";
    case ErrorCode::kKeyArityMismatch: return "KeyArityMismatch";
    case ErrorCode::kUnknownAction: return "UnknownAction";
    case ErrorCode::kActionDataMismatch: return "ActionDataMismatch";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kUnknownPipeline: return "UnknownPipeline";
    case ErrorCode::kPortBusy: return "PortBusy";
    case ErrorCode::kNoFreeBsmUnit: return "NoFreeBsmUnit";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kRoleViolation: return "RoleViolation";
    case ErrorCode::kConflictingEmission: return "ConflictingEmission";
    case ErrorCode::kQubitNotEntangled: return "QubitNotEntangled";
    case ErrorCode::kSameQubit: return "SameQubit";
    case ErrorCode::kUnitUnbound: return "UnitUnbound";
    case ErrorCode::kUnknownQubit: return "UnknownQubit";
    case ErrorCode::kInvalidTopology: return "InvalidTopology";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace quip

namespace quip::bmv2 {

namespace {

template <typename T>
const T *find_by_name(const std::vector<T> &items, const std::string &name) {
  auto it = std::find_if(items.begin(), items.end(),
                         [&](const T &item) { return item.name == name; });
  return it == items.end() ? nullptr : &*it;
}

}  // namespace

int HeaderTypeDef::total_width() const {
  int total = 0;
  for (const auto &f : fields) total += f.width;
  return total;
}

const FieldDef *HeaderTypeDef::find(const std::string &field) const {
  return find_by_name(fields, field);
}

Expr Expr::field(std::string header, std::string field) {
  Expr e;
  e.kind = Kind::kField;
  e.name = std::move(header);
  e.member = std::move(field);
  return e;
}

Expr Expr::constant(uint64_t v) {
  Expr e;
  e.kind = Kind::kConstant;
  e.value = v;
  return e;
}

Expr Expr::boolean(bool b) {
  Expr e;
  e.kind = Kind::kBoolean;
  e.value = b ? 1 : 0;
  return e;
}

Expr Expr::runtime_data(uint64_t index) {
  Expr e;
  e.kind = Kind::kRuntimeData;
  e.value = index;
  return e;
}

Expr Expr::header(std::string header) {
  Expr e;
  e.kind = Kind::kHeader;
  e.name = std::move(header);
  return e;
}

Expr Expr::register_array(std::string name) {
  Expr e;
  e.kind = Kind::kRegisterArray;
  e.name = std::move(name);
  return e;
}

Expr Expr::enum_member(std::string enum_name, std::string member) {
  Expr e;
  e.kind = Kind::kEnumMember;
  e.name = std::move(enum_name);
  e.member = std::move(member);
  return e;
}

Expr Expr::op(std::string op, Expr left, Expr right) {
  Expr e;
  e.kind = Kind::kOp;
  e.name = std::move(op);
  e.args.push_back(std::move(left));
  e.args.push_back(std::move(right));
  return e;
}

Expr Expr::unary(std::string op, Expr operand) {
  Expr e;
  e.kind = Kind::kOp;
  e.name = std::move(op);
  e.args.push_back(std::move(operand));
  return e;
}

Expr Expr::ternary(Expr cond, Expr if_true, Expr if_false) {
  Expr e;
  e.kind = Kind::kOp;
  e.name = "?";
  e.args.push_back(std::move(cond));
  e.args.push_back(std::move(if_true));
  e.args.push_back(std::move(if_false));
  return e;
}

bool Expr::operator==(const Expr &other) const {
  if (kind != other.kind || name != other.name || member != other.member ||
      value != other.value || args.size() != other.args.size()) {
    return false;
  }
  for (size_t i = 0; i < args.size(); ++i) {
    if (!(args[i] == other.args[i])) return false;
  }
  return true;
}

const TableDef *PipelineDef::find_table(const std::string &table) const {
  return find_by_name(tables, table);
}

const HeaderTypeDef *Program::find_header_type(const std::string &name) const {
  return find_by_name(header_types, name);
}
const HeaderInstance *Program::find_header(const std::string &name) const {
  return find_by_name(headers, name);
}
const ActionDef *Program::find_action(const std::string &name) const {
  return find_by_name(actions, name);
}
const PipelineDef *Program::find_pipeline(const std::string &name) const {
  return find_by_name(pipelines, name);
}
const RegisterArrayDef *Program::find_register(const std::string &name) const {
  return find_by_name(register_arrays, name);
}
const EnumDef *Program::find_enum(const std::string &name) const {
  return find_by_name(enums, name);
}

size_t Program::table_count() const {
  size_t n = 0;
  for (const auto &p : pipelines) n += p.tables.size();
  return n;
}

}  // namespace quip::bmv2
