// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/bmv2/loader.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "quip/error.hpp"

namespace quip::bmv2 {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string &path, const std::string &detail) {
  throw LoadError(code, path, detail);
}

std::string at(const std::string &base, const std::string &key) { return base + "/" + key; }
std::string at(const std::string &base, size_t index) {
  return base + "/" + std::to_string(index);
}

// Keys every object may carry that carry no semantics for execution.
bool ignorable(const std::string &key) {
  return key == "id" || key == "source_info" || key == "pi_omit";
}

// Rejects keys outside `known`. Keys listed in `empty_only` are accepted when
// they hold null, false, or an empty array/object; anything else means the
// document relies on a construct outside the subset.
void check_keys(const json &obj, const std::string &path, const std::set<std::string> &known,
                const std::set<std::string> &empty_only = {}) {
  for (const auto &[key, value] : obj.items()) {
    if (known.count(key) || ignorable(key)) continue;
    if (empty_only.count(key)) {
      const bool trivial = value.is_null() || (value.is_boolean() && !value.get<bool>()) ||
                           ((value.is_array() || value.is_object()) && value.empty());
      if (trivial) continue;
      fail(ErrorCode::kUnsupportedConstruct, at(path, key), key);
    }
    fail(ErrorCode::kUnsupportedConstruct, at(path, key), key);
  }
}

const json &member(const json &obj, const std::string &key, const std::string &path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kMalformedDocument, path, "missing '" + key + "'");
  return *it;
}

const json &object(const json &v, const std::string &path) {
  if (!v.is_object()) fail(ErrorCode::kMalformedDocument, path, "expected an object");
  return v;
}

const json &array(const json &v, const std::string &path) {
  if (!v.is_array()) fail(ErrorCode::kMalformedDocument, path, "expected an array");
  return v;
}

std::string str(const json &v, const std::string &path) {
  if (!v.is_string()) fail(ErrorCode::kMalformedDocument, path, "expected a string");
  return v.get<std::string>();
}

NextNode next_node(const json &v, const std::string &path) {
  if (v.is_null()) return std::nullopt;
  return str(v, path);
}

uint64_t unsigned_int(const json &v, const std::string &path) {
  if (!v.is_number_unsigned()) {
    if (v.is_number_integer() && v.get<int64_t>() >= 0) return static_cast<uint64_t>(v.get<int64_t>());
    fail(ErrorCode::kMalformedDocument, path, "expected a non-negative integer");
  }
  return v.get<uint64_t>();
}

int width(const json &v, const std::string &path) {
  if (!v.is_number_integer()) fail(ErrorCode::kMalformedDocument, path, "expected an integer width");
  const int64_t w = v.get<int64_t>();
  if (w < 1 || w > kMaxFieldWidth) {
    fail(ErrorCode::kWidthOutOfRange, path, "width " + std::to_string(w) + " outside [1, 64]");
  }
  return static_cast<int>(w);
}

uint64_t hexstr(const json &v, const std::string &path) {
  if (v.is_number()) return unsigned_int(v, path);
  const std::string s = str(v, path);
  if (!s.empty() && s[0] == '-') fail(ErrorCode::kUnsupportedConstruct, path, "negative constant");
  const bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  const std::string digits = hex ? s.substr(2) : s;
  if (digits.empty()) fail(ErrorCode::kMalformedDocument, path, "empty constant");
  uint64_t value = 0;
  for (char c : digits) {
    int d;
    if (c >= '0' && c <= '9') {
      d = c - '0';
    } else if (hex && c >= 'a' && c <= 'f') {
      d = c - 'a' + 10;
    } else if (hex && c >= 'A' && c <= 'F') {
      d = c - 'A' + 10;
    } else {
      fail(ErrorCode::kMalformedDocument, path, "bad constant '" + s + "'");
    }
    const uint64_t base = hex ? 16 : 10;
    if (value > (UINT64_MAX - d) / base) {
      fail(ErrorCode::kWidthOutOfRange, path, "constant wider than 64 bits");
    }
    value = value * base + d;
  }
  return value;
}

KeyField field_ref(const json &v, const std::string &path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_string() || !v[1].is_string()) {
    fail(ErrorCode::kMalformedDocument, path, "field reference must be [header, field]");
  }
  return {v[0].get<std::string>(), v[1].get<std::string>()};
}

Expr parse_expr(const json &v, const std::string &path);

Expr parse_op(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"op", "left", "right", "cond"});
  const std::string op = str(member(v, "op", path), at(path, "op"));
  const json &left = member(v, "left", path);
  const json &right = member(v, "right", path);
  if (op == "?") {
    return Expr::ternary(parse_expr(member(v, "cond", path), at(path, "cond")),
                         parse_expr(left, at(path, "left")), parse_expr(right, at(path, "right")));
  }
  if (left.is_null()) return Expr::unary(op, parse_expr(right, at(path, "right")));
  return Expr::op(op, parse_expr(left, at(path, "left")), parse_expr(right, at(path, "right")));
}

Expr parse_expr(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"type", "value"});
  const std::string type = str(member(v, "type", path), at(path, "type"));
  const json &value = member(v, "value", path);
  const std::string vpath = at(path, "value");
  if (type == "field") {
    KeyField f = field_ref(value, vpath);
    return Expr::field(f.header, f.field);
  }
  if (type == "hexstr") return Expr::constant(hexstr(value, vpath));
  if (type == "bool") {
    if (!value.is_boolean()) fail(ErrorCode::kMalformedDocument, vpath, "expected a boolean");
    return Expr::boolean(value.get<bool>());
  }
  if (type == "runtime_data") return Expr::runtime_data(unsigned_int(value, vpath));
  if (type == "header") return Expr::header(str(value, vpath));
  if (type == "register_array") return Expr::register_array(str(value, vpath));
  if (type == "enum") {
    KeyField m = field_ref(value, vpath);
    return Expr::enum_member(m.header, m.field);
  }
  if (type == "expression") {
    // p4c sometimes double-wraps: {"type":"expression","value":{"type":"expression",...}}
    if (value.is_object() && value.contains("type")) return parse_expr(value, vpath);
    return parse_op(value, vpath);
  }
  fail(ErrorCode::kUnsupportedConstruct, at(path, "type"), "expression type '" + type + "'");
}

HeaderTypeDef parse_header_type(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "fields"});
  HeaderTypeDef t;
  t.name = str(member(v, "name", path), at(path, "name"));
  const std::string fpath = at(path, "fields");
  const json &fields = array(member(v, "fields", path), fpath);
  for (size_t i = 0; i < fields.size(); ++i) {
    const json &f = fields[i];
    const std::string p = at(fpath, i);
    if (!f.is_array() || f.size() < 2 || f.size() > 3 || !f[0].is_string()) {
      fail(ErrorCode::kMalformedDocument, p, "field must be [name, width, signed]");
    }
    if (f[1].is_string() || (f.size() == 3 && f[2].is_string())) {
      fail(ErrorCode::kUnsupportedConstruct, p, "varbit field");
    }
    if (f.size() == 3 && f[2].is_boolean() && f[2].get<bool>()) {
      fail(ErrorCode::kUnsupportedConstruct, p, "signed field");
    }
    t.fields.push_back({f[0].get<std::string>(), width(f[1], at(p, 1))});
  }
  return t;
}

HeaderInstance parse_header(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "header_type", "metadata"});
  HeaderInstance h;
  h.name = str(member(v, "name", path), at(path, "name"));
  h.header_type = str(member(v, "header_type", path), at(path, "header_type"));
  if (v.contains("metadata")) {
    if (!v["metadata"].is_boolean()) fail(ErrorCode::kMalformedDocument, at(path, "metadata"), "expected a boolean");
    h.metadata = v["metadata"].get<bool>();
  }
  return h;
}

ParserState parse_state(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "parser_ops", "transitions", "transition_key"});
  ParserState s;
  s.name = str(member(v, "name", path), at(path, "name"));
  const std::string opath = at(path, "parser_ops");
  const json &ops = array(member(v, "parser_ops", path), opath);
  for (size_t i = 0; i < ops.size(); ++i) {
    const std::string p = at(opath, i);
    object(ops[i], p);
    check_keys(ops[i], p, {"op", "parameters"});
    const std::string op = str(member(ops[i], "op", p), at(p, "op"));
    if (op != "extract") fail(ErrorCode::kUnsupportedConstruct, at(p, "op"), "parser op '" + op + "'");
    const json &params = array(member(ops[i], "parameters", p), at(p, "parameters"));
    if (params.size() != 1) fail(ErrorCode::kMalformedDocument, at(p, "parameters"), "extract takes one parameter");
    const std::string pp = at(at(p, "parameters"), 0);
    object(params[0], pp);
    const std::string kind = str(member(params[0], "type", pp), at(pp, "type"));
    if (kind != "regular") fail(ErrorCode::kUnsupportedConstruct, at(pp, "type"), "extract of '" + kind + "'");
    s.extracts.push_back(str(member(params[0], "value", pp), at(pp, "value")));
  }
  const std::string kpath = at(path, "transition_key");
  if (v.contains("transition_key")) {
    const json &key = array(v["transition_key"], kpath);
    for (size_t i = 0; i < key.size(); ++i) {
      const std::string p = at(kpath, i);
      object(key[i], p);
      check_keys(key[i], p, {"type", "value"});
      if (str(member(key[i], "type", p), at(p, "type")) != "field") {
        fail(ErrorCode::kUnsupportedConstruct, at(p, "type"), "transition key must be a field");
      }
      s.transition_key.push_back(field_ref(member(key[i], "value", p), at(p, "value")));
    }
  }
  const std::string tpath = at(path, "transitions");
  const json &transitions = array(member(v, "transitions", path), tpath);
  for (size_t i = 0; i < transitions.size(); ++i) {
    const std::string p = at(tpath, i);
    const json &t = object(transitions[i], p);
    check_keys(t, p, {"type", "value", "mask", "next_state"});
    if (t.contains("mask") && !t["mask"].is_null()) {
      fail(ErrorCode::kUnsupportedConstruct, at(p, "mask"), "masked transition");
    }
    const std::string type = t.contains("type") ? str(t["type"], at(p, "type")) : "hexstr";
    ParserTransition tr;
    if (type == "hexstr") {
      tr.value = hexstr(member(t, "value", p), at(p, "value"));
    } else if (type != "default") {
      fail(ErrorCode::kUnsupportedConstruct, at(p, "type"), "transition type '" + type + "'");
    }
    tr.next_state = next_node(member(t, "next_state", p), at(p, "next_state"));
    s.transitions.push_back(tr);
  }
  return s;
}

ParserDef parse_parser(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "init_state", "parse_states"});
  ParserDef p;
  p.name = str(member(v, "name", path), at(path, "name"));
  p.init_state = str(member(v, "init_state", path), at(path, "init_state"));
  const std::string spath = at(path, "parse_states");
  const json &states = array(member(v, "parse_states", path), spath);
  for (size_t i = 0; i < states.size(); ++i) p.states.push_back(parse_state(states[i], at(spath, i)));
  return p;
}

DeparserDef parse_deparser(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "order"}, {"primitives"});
  DeparserDef d;
  d.name = str(member(v, "name", path), at(path, "name"));
  const std::string opath = at(path, "order");
  const json &order = array(member(v, "order", path), opath);
  for (size_t i = 0; i < order.size(); ++i) d.order.push_back(str(order[i], at(opath, i)));
  return d;
}

ActionDef parse_action(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "runtime_data", "primitives"});
  ActionDef a;
  a.name = str(member(v, "name", path), at(path, "name"));
  const std::string rpath = at(path, "runtime_data");
  if (v.contains("runtime_data")) {
    const json &rd = array(v["runtime_data"], rpath);
    for (size_t i = 0; i < rd.size(); ++i) {
      const std::string p = at(rpath, i);
      object(rd[i], p);
      check_keys(rd[i], p, {"name", "bitwidth"});
      a.params.push_back({str(member(rd[i], "name", p), at(p, "name")),
                          width(member(rd[i], "bitwidth", p), at(p, "bitwidth"))});
    }
  }
  const std::string ppath = at(path, "primitives");
  const json &prims = array(member(v, "primitives", path), ppath);
  for (size_t i = 0; i < prims.size(); ++i) {
    const std::string p = at(ppath, i);
    object(prims[i], p);
    check_keys(prims[i], p, {"op", "parameters"});
    Primitive prim;
    prim.op = str(member(prims[i], "op", p), at(p, "op"));
    const std::string pp = at(p, "parameters");
    const json &params = prims[i].contains("parameters") ? array(prims[i]["parameters"], pp) : json::array();
    for (size_t k = 0; k < params.size(); ++k) prim.params.push_back(parse_expr(params[k], at(pp, k)));
    a.primitives.push_back(std::move(prim));
  }
  return a;
}

TableDef parse_table(const json &v, const std::string &path,
                     const std::map<uint64_t, std::string> &action_ids) {
  object(v, path);
  check_keys(v, path,
             {"name", "key", "match_type", "type", "max_size", "actions", "action_ids",
              "next_tables", "base_default_next", "default_entry"},
             {"with_counters", "support_timeout", "direct_meters", "entries"});
  TableDef t;
  t.name = str(member(v, "name", path), at(path, "name"));
  if (v.contains("match_type") && str(v["match_type"], at(path, "match_type")) != "exact") {
    fail(ErrorCode::kUnsupportedConstruct, at(path, "match_type"),
         "match kind '" + v["match_type"].get<std::string>() + "'");
  }
  if (v.contains("type") && str(v["type"], at(path, "type")) != "simple") {
    fail(ErrorCode::kUnsupportedConstruct, at(path, "type"),
         "table implementation '" + v["type"].get<std::string>() + "'");
  }
  if (v.contains("max_size")) t.max_size = unsigned_int(v["max_size"], at(path, "max_size"));
  const std::string kpath = at(path, "key");
  if (v.contains("key")) {
    const json &key = array(v["key"], kpath);
    for (size_t i = 0; i < key.size(); ++i) {
      const std::string p = at(kpath, i);
      object(key[i], p);
      check_keys(key[i], p, {"match_type", "name", "target", "mask"});
      const std::string mt = str(member(key[i], "match_type", p), at(p, "match_type"));
      if (mt != "exact") fail(ErrorCode::kUnsupportedConstruct, at(p, "match_type"), "match kind '" + mt + "'");
      if (key[i].contains("mask") && !key[i]["mask"].is_null()) {
        fail(ErrorCode::kUnsupportedConstruct, at(p, "mask"), "masked key");
      }
      t.keys.push_back(field_ref(member(key[i], "target", p), at(p, "target")));
    }
  }
  const std::string apath = at(path, "actions");
  if (v.contains("actions")) {
    const json &actions = array(v["actions"], apath);
    for (size_t i = 0; i < actions.size(); ++i) t.actions.push_back(str(actions[i], at(apath, i)));
  } else {
    const std::string ipath = at(path, "action_ids");
    const json &ids = array(member(v, "action_ids", path), ipath);
    for (size_t i = 0; i < ids.size(); ++i) {
      auto it = action_ids.find(unsigned_int(ids[i], at(ipath, i)));
      if (it == action_ids.end()) fail(ErrorCode::kDanglingReference, at(ipath, i), "undefined action id");
      t.actions.push_back(it->second);
    }
  }
  if (v.contains("next_tables")) {
    const std::string npath = at(path, "next_tables");
    object(v["next_tables"], npath);
    for (const auto &[action, next] : v["next_tables"].items()) {
      t.next_tables[action] = next_node(next, at(npath, action));
    }
  }
  if (v.contains("base_default_next")) {
    t.base_default_next = next_node(v["base_default_next"], at(path, "base_default_next"));
  }
  const std::string dpath = at(path, "default_entry");
  if (v.contains("default_entry")) {
    const json &d = object(v["default_entry"], dpath);
    check_keys(d, dpath, {"action_id", "action_const", "action_data", "action_entry_const", "action_name"});
    if (d.contains("action_name")) {
      t.default_action = str(d["action_name"], at(dpath, "action_name"));
    } else {
      const uint64_t id = unsigned_int(member(d, "action_id", dpath), at(dpath, "action_id"));
      auto it = action_ids.find(id);
      if (it == action_ids.end()) {
        fail(ErrorCode::kDanglingReference, at(dpath, "action_id"),
             "default action id " + std::to_string(id) + " is undefined");
      }
      t.default_action = it->second;
    }
    if (d.contains("action_const")) {
      if (!d["action_const"].is_boolean()) fail(ErrorCode::kMalformedDocument, at(dpath, "action_const"), "expected a boolean");
      t.default_action_const = d["action_const"].get<bool>();
    }
    if (d.contains("action_data")) {
      const std::string adpath = at(dpath, "action_data");
      const json &data = array(d["action_data"], adpath);
      for (size_t i = 0; i < data.size(); ++i) t.default_action_data.push_back(hexstr(data[i], at(adpath, i)));
    }
  } else if (!t.actions.empty()) {
    t.default_action = t.actions.front();
  } else {
    fail(ErrorCode::kMalformedDocument, path, "table '" + t.name + "' has no actions");
  }
  return t;
}

ConditionalDef parse_conditional(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "expression", "true_next", "false_next"});
  ConditionalDef c;
  c.name = str(member(v, "name", path), at(path, "name"));
  c.expression = parse_expr(member(v, "expression", path), at(path, "expression"));
  c.true_next = next_node(member(v, "true_next", path), at(path, "true_next"));
  c.false_next = next_node(member(v, "false_next", path), at(path, "false_next"));
  return c;
}

PipelineDef parse_pipeline(const json &v, const std::string &path,
                           const std::map<uint64_t, std::string> &action_ids) {
  object(v, path);
  check_keys(v, path, {"name", "init_table", "tables", "conditionals"}, {"action_profiles"});
  PipelineDef p;
  p.name = str(member(v, "name", path), at(path, "name"));
  p.init_node = next_node(member(v, "init_table", path), at(path, "init_table"));
  const std::string tpath = at(path, "tables");
  if (v.contains("tables")) {
    const json &tables = array(v["tables"], tpath);
    for (size_t i = 0; i < tables.size(); ++i) p.tables.push_back(parse_table(tables[i], at(tpath, i), action_ids));
  }
  const std::string cpath = at(path, "conditionals");
  if (v.contains("conditionals")) {
    const json &conds = array(v["conditionals"], cpath);
    for (size_t i = 0; i < conds.size(); ++i) p.conditionals.push_back(parse_conditional(conds[i], at(cpath, i)));
  }
  return p;
}

RegisterArrayDef parse_register(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "size", "bitwidth"});
  return {str(member(v, "name", path), at(path, "name")),
          width(member(v, "bitwidth", path), at(path, "bitwidth")),
          unsigned_int(member(v, "size", path), at(path, "size"))};
}

EnumDef parse_enum(const json &v, const std::string &path) {
  object(v, path);
  check_keys(v, path, {"name", "entries"});
  EnumDef e;
  e.name = str(member(v, "name", path), at(path, "name"));
  const std::string epath = at(path, "entries");
  const json &entries = array(member(v, "entries", path), epath);
  for (size_t i = 0; i < entries.size(); ++i) {
    const json &m = entries[i];
    if (!m.is_array() || m.size() != 2 || !m[0].is_string()) {
      fail(ErrorCode::kMalformedDocument, at(epath, i), "enum entry must be [name, value]");
    }
    e.members.emplace_back(m[0].get<std::string>(), unsigned_int(m[1], at(at(epath, i), 1)));
  }
  return e;
}

Target parse_meta(const json &v) {
  object(v, "/__meta__");
  if (!v.contains("target")) return Target::kV1Quantum;
  const std::string target = str(v["target"], "/__meta__/target");
  if (target == "v1quantum") return Target::kV1Quantum;
  if (target == "classical") return Target::kClassical;
  fail(ErrorCode::kUnsupportedConstruct, "/__meta__/target", "target architecture '" + target + "'");
}

template <typename T, typename Fn>
void parse_array(const json &doc, const char *key, std::vector<T> &out, Fn fn) {
  if (!doc.contains(key)) return;
  const std::string path = std::string("/") + key;
  const json &items = array(doc[key], path);
  for (size_t i = 0; i < items.size(); ++i) out.push_back(fn(items[i], at(path, i)));
}

}  // namespace

Program load_program(std::string_view program_text) {
  json doc;
  try {
    doc = json::parse(program_text.begin(), program_text.end());
  } catch (const json::parse_error &e) {
    fail(ErrorCode::kMalformedDocument, "", e.what());
  }
  object(doc, "");
  check_keys(doc, "",
             {"header_types", "headers", "parsers", "deparsers", "actions", "pipelines",
              "register_arrays", "enums", "__meta__", "program", "errors", "field_aliases"},
             {"header_stacks", "header_union_types", "header_unions", "header_union_stacks",
              "parse_vsets", "meter_arrays", "counter_arrays", "calculations", "learn_lists",
              "checksums", "extern_instances", "field_lists", "action_profiles", "force_arith"});

  Program p;
  if (doc.contains("__meta__")) p.target = parse_meta(doc["__meta__"]);
  parse_array(doc, "header_types", p.header_types, parse_header_type);
  parse_array(doc, "headers", p.headers, parse_header);
  parse_array(doc, "parsers", p.parsers, parse_parser);
  parse_array(doc, "deparsers", p.deparsers, parse_deparser);
  parse_array(doc, "actions", p.actions, parse_action);
  parse_array(doc, "register_arrays", p.register_arrays, parse_register);
  parse_array(doc, "enums", p.enums, parse_enum);

  std::map<uint64_t, std::string> action_ids;
  if (doc.contains("actions")) {
    for (size_t i = 0; i < doc["actions"].size(); ++i) {
      const json &a = doc["actions"][i];
      const uint64_t id = a.contains("id") ? unsigned_int(a["id"], at(at("/actions", i), "id")) : i;
      if (!action_ids.emplace(id, p.actions[i].name).second) {
        fail(ErrorCode::kMalformedDocument, at(at("/actions", i), "id"), "duplicate action id");
      }
    }
  }
  parse_array(doc, "pipelines", p.pipelines, [&](const json &v, const std::string &path) {
    return parse_pipeline(v, path, action_ids);
  });

  finalize_program(p);
  return p;
}

Program load_program_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMalformedDocument, "", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_program(buf.str());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using ojson = nlohmann::ordered_json;

std::string to_hex(uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

ojson next_json(const NextNode &n) { return n ? ojson(*n) : ojson(nullptr); }

ojson expr_json(const Expr &e);

ojson op_json(const Expr &e) {
  ojson o;
  o["op"] = e.name;
  if (e.name == "?") {
    o["left"] = expr_json(e.args[1]);
    o["right"] = expr_json(e.args[2]);
    o["cond"] = expr_json(e.args[0]);
  } else if (e.args.size() == 1) {
    o["left"] = nullptr;
    o["right"] = expr_json(e.args[0]);
  } else {
    o["left"] = expr_json(e.args[0]);
    o["right"] = expr_json(e.args[1]);
  }
  return o;
}

ojson expr_json(const Expr &e) {
  ojson o;
  switch (e.kind) {
    case Expr::Kind::kField:
      o["type"] = "field";
      o["value"] = ojson::array({e.name, e.member});
      break;
    case Expr::Kind::kConstant:
      o["type"] = "hexstr";
      o["value"] = to_hex(e.value);
      break;
    case Expr::Kind::kBoolean:
      o["type"] = "bool";
      o["value"] = e.value != 0;
      break;
    case Expr::Kind::kRuntimeData:
      o["type"] = "runtime_data";
      o["value"] = e.value;
      break;
    case Expr::Kind::kHeader:
      o["type"] = "header";
      o["value"] = e.name;
      break;
    case Expr::Kind::kRegisterArray:
      o["type"] = "register_array";
      o["value"] = e.name;
      break;
    case Expr::Kind::kEnumMember:
      o["type"] = "enum";
      o["value"] = ojson::array({e.name, e.member});
      break;
    case Expr::Kind::kOp:
      o["type"] = "expression";
      o["value"] = op_json(e);
      break;
  }
  return o;
}

ojson field_json(const KeyField &f) { return ojson::array({f.header, f.field}); }

}  // namespace

std::string serialize_program(const Program &p) {
  ojson doc;
  doc["__meta__"] = {{"version", {2, 23}},
                     {"target", p.target == Target::kV1Quantum ? "v1quantum" : "classical"}};

  doc["header_types"] = ojson::array();
  for (size_t i = 0; i < p.header_types.size(); ++i) {
    const auto &t = p.header_types[i];
    ojson fields = ojson::array();
    for (const auto &f : t.fields) fields.push_back({f.name, f.width, false});
    doc["header_types"].push_back({{"name", t.name}, {"id", i}, {"fields", fields}});
  }

  doc["headers"] = ojson::array();
  for (size_t i = 0; i < p.headers.size(); ++i) {
    const auto &h = p.headers[i];
    doc["headers"].push_back(
        {{"name", h.name}, {"id", i}, {"header_type", h.header_type}, {"metadata", h.metadata}});
  }

  doc["parsers"] = ojson::array();
  for (size_t i = 0; i < p.parsers.size(); ++i) {
    const auto &parser = p.parsers[i];
    ojson states = ojson::array();
    for (size_t s = 0; s < parser.states.size(); ++s) {
      const auto &st = parser.states[s];
      ojson ops = ojson::array();
      for (const auto &h : st.extracts) {
        ops.push_back({{"op", "extract"},
                       {"parameters", ojson::array({{{"type", "regular"}, {"value", h}}})}});
      }
      ojson key = ojson::array();
      for (const auto &k : st.transition_key) key.push_back({{"type", "field"}, {"value", field_json(k)}});
      ojson transitions = ojson::array();
      for (const auto &t : st.transitions) {
        ojson tj;
        tj["type"] = t.value ? "hexstr" : "default";
        tj["value"] = t.value ? ojson(to_hex(*t.value)) : ojson(nullptr);
        tj["mask"] = nullptr;
        tj["next_state"] = next_json(t.next_state);
        transitions.push_back(tj);
      }
      states.push_back({{"name", st.name},
                        {"id", s},
                        {"parser_ops", ops},
                        {"transitions", transitions},
                        {"transition_key", key}});
    }
    doc["parsers"].push_back(
        {{"name", parser.name}, {"id", i}, {"init_state", parser.init_state}, {"parse_states", states}});
  }

  doc["deparsers"] = ojson::array();
  for (size_t i = 0; i < p.deparsers.size(); ++i) {
    doc["deparsers"].push_back(
        {{"name", p.deparsers[i].name}, {"id", i}, {"order", p.deparsers[i].order}});
  }

  std::map<std::string, size_t> action_id;
  doc["actions"] = ojson::array();
  for (size_t i = 0; i < p.actions.size(); ++i) {
    const auto &a = p.actions[i];
    action_id[a.name] = i;
    ojson rd = ojson::array();
    for (const auto &param : a.params) rd.push_back({{"name", param.name}, {"bitwidth", param.width}});
    ojson prims = ojson::array();
    for (const auto &prim : a.primitives) {
      ojson params = ojson::array();
      for (const auto &e : prim.params) params.push_back(expr_json(e));
      prims.push_back({{"op", prim.op}, {"parameters", params}});
    }
    doc["actions"].push_back({{"name", a.name}, {"id", i}, {"runtime_data", rd}, {"primitives", prims}});
  }

  doc["pipelines"] = ojson::array();
  size_t table_id = 0;
  size_t cond_id = 0;
  for (size_t i = 0; i < p.pipelines.size(); ++i) {
    const auto &pipe = p.pipelines[i];
    ojson tables = ojson::array();
    for (const auto &t : pipe.tables) {
      ojson key = ojson::array();
      for (const auto &k : t.keys) {
        key.push_back({{"match_type", "exact"},
                       {"name", k.header + "." + k.field},
                       {"target", field_json(k)},
                       {"mask", nullptr}});
      }
      ojson ids = ojson::array();
      for (const auto &a : t.actions) ids.push_back(action_id.at(a));
      ojson next = ojson::object();
      for (const auto &[a, n] : t.next_tables) next[a] = next_json(n);
      ojson data = ojson::array();
      for (uint64_t d : t.default_action_data) data.push_back(to_hex(d));
      tables.push_back({{"name", t.name},
                        {"id", table_id++},
                        {"key", key},
                        {"match_type", "exact"},
                        {"type", "simple"},
                        {"max_size", t.max_size},
                        {"with_counters", false},
                        {"support_timeout", false},
                        {"direct_meters", nullptr},
                        {"action_ids", ids},
                        {"actions", t.actions},
                        {"base_default_next", next_json(t.base_default_next)},
                        {"next_tables", next},
                        {"default_entry",
                         {{"action_id", action_id.at(t.default_action)},
                          {"action_const", t.default_action_const},
                          {"action_data", data},
                          {"action_entry_const", false}}}});
    }
    ojson conds = ojson::array();
    for (const auto &c : pipe.conditionals) {
      conds.push_back({{"name", c.name},
                       {"id", cond_id++},
                       {"expression", expr_json(c.expression)},
                       {"true_next", next_json(c.true_next)},
                       {"false_next", next_json(c.false_next)}});
    }
    doc["pipelines"].push_back({{"name", pipe.name},
                                {"id", i},
                                {"init_table", next_json(pipe.init_node)},
                                {"tables", tables},
                                {"action_profiles", ojson::array()},
                                {"conditionals", conds}});
  }

  doc["register_arrays"] = ojson::array();
  for (size_t i = 0; i < p.register_arrays.size(); ++i) {
    const auto &r = p.register_arrays[i];
    doc["register_arrays"].push_back(
        {{"name", r.name}, {"id", i}, {"size", r.size}, {"bitwidth", r.bitwidth}});
  }

  doc["enums"] = ojson::array();
  for (const auto &e : p.enums) {
    ojson entries = ojson::array();
    for (const auto &[m, v] : e.members) entries.push_back({m, v});
    doc["enums"].push_back({{"name", e.name}, {"entries", entries}});
  }

  return doc.dump(1) + "\n";
}

}  // namespace quip::bmv2
