// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

// Architecture completion, enum folding, invariant checks and normalization
// shared by the JSON loader and the programmatic builder.

#include <algorithm>
#include <functional>
#include <set>
#include <string>

#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"

namespace quip::bmv2 {

namespace {

std::string at(const std::string &base, const std::string &key) {
  return base + "/" + key;
}
std::string at(const std::string &base, size_t index) {
  return base + "/" + std::to_string(index);
}

[[noreturn]] void fail(ErrorCode code, const std::string &path,
                       const std::string &detail) {
  throw LoadError(code, path, detail);
}

HeaderTypeDef standard_metadata_type() {
  return {"standard_metadata_t",
          {{"ingress_port", 9}, {"egress_spec", 9}, {"egress_port", 9}}};
}

HeaderTypeDef qcontrol_metadata_type() {
  return {"qcontrol_metadata_t",
          {{"event_type", 32},
           {"event_timestamp", 64},
           {"operation", 32},
           {"release_qubit", 9},
           {"swap_bsm_id", 16},
           {"swap_qubit_0", 9},
           {"swap_qubit_1", 9},
           {"bsm_id", 16},
           {"bsm_success", 1},
           {"bsm_bell_index", 2}}};
}

HeaderTypeDef xconnect_metadata_type() {
  return {"xconnect_metadata_t",
          {{"pathway", 32},
           {"ingress_port", 9},
           {"egress_spec", 9},
           {"bsm_grp", 16},
           {"bsm_info", 16}}};
}

std::vector<EnumDef> architecture_enums() {
  return {
      {arch::kEventTypeEnum,
       {{"heralding_bsm_outcome", arch::kHeraldingBsmOutcome},
        {"swap_bsm_outcome", arch::kSwapBsmOutcome},
        {"cnetwork", arch::kCNetwork}}},
      {arch::kOperationEnum,
       {{"none", arch::kOpNone}, {"swap", arch::kOpSwap}, {"release", arch::kOpRelease}}},
      {arch::kPathwayEnum,
       {{"cnetwork", arch::kPathCNetwork}, {"qcontrol", arch::kPathQControl}}},
  };
}

// Declares an architecture metadata instance if the program does not, or
// checks that a declared one carries the required fields at the required
// widths (extra fields are allowed, as in compiled V1Model programs).
void complete_metadata(Program &p, const std::string &instance,
                       const HeaderTypeDef &required) {
  const HeaderInstance *inst = p.find_header(instance);
  if (inst == nullptr) {
    if (p.find_header_type(required.name) == nullptr) p.header_types.push_back(required);
    p.headers.push_back({instance, required.name, true});
    inst = p.find_header(instance);
  }
  const HeaderTypeDef *type = p.find_header_type(inst->header_type);
  if (type == nullptr) {
    fail(ErrorCode::kDanglingReference, "/headers",
         "metadata '" + instance + "' uses undefined header type '" + inst->header_type + "'");
  }
  if (!inst->metadata) {
    fail(ErrorCode::kMalformedDocument, "/headers",
         "architecture instance '" + instance + "' must be metadata");
  }
  for (const auto &field : required.fields) {
    const FieldDef *have = type->find(field.name);
    if (have == nullptr || have->width != field.width) {
      fail(ErrorCode::kMalformedDocument, "/header_types",
           "'" + type->name + "." + field.name + "' must be bit<" +
               std::to_string(field.width) + "> for the target architecture");
    }
  }
}

void complete_architecture(Program &p) {
  complete_metadata(p, arch::kStandardMetadata, standard_metadata_type());
  if (p.target != Target::kV1Quantum) return;
  complete_metadata(p, arch::kQControlMetadata, qcontrol_metadata_type());
  complete_metadata(p, arch::kXConnectMetadata, xconnect_metadata_type());
  for (auto &required : architecture_enums()) {
    const EnumDef *have = p.find_enum(required.name);
    if (have == nullptr) {
      p.enums.push_back(required);
      continue;
    }
    for (const auto &[member, value] : required.members) {
      auto it = std::find_if(have->members.begin(), have->members.end(),
                             [&](const auto &m) { return m.first == member; });
      if (it == have->members.end() || it->second != value) {
        fail(ErrorCode::kMalformedDocument, "/enums",
             "enum '" + required.name + "' member '" + member +
                 "' conflicts with the architecture definition");
      }
    }
  }
}

class Validator {
 public:
  explicit Validator(Program &p) : p_(p) {}

  void run() {
    check_unique_names();
    check_header_types();
    check_headers();
    check_registers();
    check_enums();
    for (size_t i = 0; i < p_.actions.size(); ++i) check_action(p_.actions[i], at("/actions", i));
    for (size_t i = 0; i < p_.parsers.size(); ++i) check_parser(p_.parsers[i], at("/parsers", i));
    for (size_t i = 0; i < p_.deparsers.size(); ++i) check_deparser(p_.deparsers[i], at("/deparsers", i));
    check_pipeline_set();
    std::set<std::string> tables;
    for (size_t i = 0; i < p_.pipelines.size(); ++i) {
      for (size_t k = 0; k < p_.pipelines[i].tables.size(); ++k) {
        if (!tables.insert(p_.pipelines[i].tables[k].name).second) {
          fail(ErrorCode::kMalformedDocument, at(at(at("/pipelines", i), "tables"), k),
               "table name '" + p_.pipelines[i].tables[k].name + "' used in two pipelines");
        }
      }
    }
    for (size_t i = 0; i < p_.pipelines.size(); ++i) check_pipeline(p_.pipelines[i], at("/pipelines", i));
  }

 private:
  template <typename T>
  void unique(const std::vector<T> &items, const std::string &path, const char *what) {
    std::set<std::string> seen;
    for (size_t i = 0; i < items.size(); ++i) {
      if (items[i].name.empty()) {
        fail(ErrorCode::kMalformedDocument, at(path, i), std::string(what) + " has no name");
      }
      if (!seen.insert(items[i].name).second) {
        fail(ErrorCode::kMalformedDocument, at(path, i),
             std::string("duplicate ") + what + " '" + items[i].name + "'");
      }
    }
  }

  void check_unique_names() {
    unique(p_.header_types, "/header_types", "header type");
    unique(p_.headers, "/headers", "header instance");
    unique(p_.actions, "/actions", "action");
    unique(p_.pipelines, "/pipelines", "pipeline");
    unique(p_.register_arrays, "/register_arrays", "register array");
    unique(p_.enums, "/enums", "enum");
    unique(p_.parsers, "/parsers", "parser");
    unique(p_.deparsers, "/deparsers", "deparser");
  }

  void check_header_types() {
    for (size_t i = 0; i < p_.header_types.size(); ++i) {
      const auto &t = p_.header_types[i];
      const std::string path = at("/header_types", i);
      unique(t.fields, at(path, "fields"), "field");
      for (size_t f = 0; f < t.fields.size(); ++f) {
        const int w = t.fields[f].width;
        if (w < 1 || w > kMaxFieldWidth) {
          fail(ErrorCode::kWidthOutOfRange, at(at(path, "fields"), f),
               "field '" + t.fields[f].name + "' width " + std::to_string(w) +
                   " outside [1, 64]");
        }
      }
      if (t.total_width() <= 0) {
        fail(ErrorCode::kMalformedDocument, path, "header type '" + t.name + "' has no fields");
      }
    }
  }

  void check_headers() {
    for (size_t i = 0; i < p_.headers.size(); ++i) {
      const HeaderTypeDef *t = p_.find_header_type(p_.headers[i].header_type);
      if (t == nullptr) {
        fail(ErrorCode::kDanglingReference, at(at("/headers", i), "header_type"),
             "undefined header type '" + p_.headers[i].header_type + "'");
      }
      if (!p_.headers[i].metadata && t->total_width() % 8 != 0) {
        fail(ErrorCode::kUnsupportedConstruct, at("/headers", i),
             "header '" + p_.headers[i].name + "' is not a whole number of bytes");
      }
    }
  }

  void check_registers() {
    for (size_t i = 0; i < p_.register_arrays.size(); ++i) {
      const auto &r = p_.register_arrays[i];
      if (r.bitwidth < 1 || r.bitwidth > kMaxFieldWidth) {
        fail(ErrorCode::kWidthOutOfRange, at(at("/register_arrays", i), "bitwidth"),
             "register '" + r.name + "' width outside [1, 64]");
      }
      if (r.size == 0) {
        fail(ErrorCode::kMalformedDocument, at(at("/register_arrays", i), "size"),
             "register '" + r.name + "' has size 0");
      }
    }
  }

  void check_enums() {
    for (size_t i = 0; i < p_.enums.size(); ++i) {
      std::set<std::string> seen;
      for (const auto &m : p_.enums[i].members) {
        if (!seen.insert(m.first).second) {
          fail(ErrorCode::kMalformedDocument, at("/enums", i),
               "duplicate enum member '" + m.first + "'");
        }
      }
    }
  }

  const FieldDef *field_def(const std::string &header, const std::string &field,
                            const std::string &path) {
    const HeaderInstance *h = p_.find_header(header);
    if (h == nullptr) {
      fail(ErrorCode::kDanglingReference, path, "undefined header instance '" + header + "'");
    }
    const FieldDef *f = p_.find_header_type(h->header_type)->find(field);
    if (f == nullptr) {
      fail(ErrorCode::kDanglingReference, path, "undefined field '" + header + "." + field + "'");
    }
    return f;
  }

  // Folds enum members into constants and checks every reference.
  void check_expr(Expr &e, const std::string &path, const ActionDef *action) {
    switch (e.kind) {
      case Expr::Kind::kField:
        field_def(e.name, e.member, path);
        return;
      case Expr::Kind::kConstant:
      case Expr::Kind::kBoolean:
        return;
      case Expr::Kind::kRuntimeData:
        if (action == nullptr || e.value >= action->params.size()) {
          fail(ErrorCode::kDanglingReference, path,
               "runtime_data index " + std::to_string(e.value) + " out of range");
        }
        return;
      case Expr::Kind::kHeader:
        if (p_.find_header(e.name) == nullptr) {
          fail(ErrorCode::kDanglingReference, path, "undefined header instance '" + e.name + "'");
        }
        return;
      case Expr::Kind::kRegisterArray:
        if (p_.find_register(e.name) == nullptr) {
          fail(ErrorCode::kDanglingReference, path, "undefined register array '" + e.name + "'");
        }
        return;
      case Expr::Kind::kEnumMember: {
        const EnumDef *en = p_.find_enum(e.name);
        if (en == nullptr) {
          fail(ErrorCode::kDanglingReference, path, "undefined enum '" + e.name + "'");
        }
        auto it = std::find_if(en->members.begin(), en->members.end(),
                               [&](const auto &m) { return m.first == e.member; });
        if (it == en->members.end()) {
          fail(ErrorCode::kDanglingReference, path,
               "undefined enum member '" + e.name + "." + e.member + "'");
        }
        e = Expr::constant(it->second);
        return;
      }
      case Expr::Kind::kOp:
        check_op(e, path, action);
        return;
    }
  }

  void check_op(Expr &e, const std::string &path, const ActionDef *action) {
    static const std::set<std::string> kBinary = {
        "+", "-", "*", "&", "|", "^", "<<", ">>", "==", "!=", "<", "<=", ">", ">=", "and", "or"};
    static const std::set<std::string> kUnary = {"~", "not", "d2b", "b2d"};
    size_t arity = 0;
    if (kBinary.count(e.name)) {
      arity = 2;
    } else if (kUnary.count(e.name)) {
      arity = 1;
    } else if (e.name == "?") {
      arity = 3;
    } else if (e.name == "valid") {
      if (e.args.size() != 1 || e.args[0].kind != Expr::Kind::kHeader) {
        fail(ErrorCode::kMalformedDocument, path, "'valid' expects one header operand");
      }
      check_expr(e.args[0], path, action);
      return;
    } else {
      fail(ErrorCode::kUnsupportedConstruct, path, "operator '" + e.name + "'");
    }
    if (e.args.size() != arity) {
      fail(ErrorCode::kMalformedDocument, path,
           "operator '" + e.name + "' expects " + std::to_string(arity) + " operands");
    }
    for (size_t i = 0; i < e.args.size(); ++i) {
      if (e.args[i].kind == Expr::Kind::kHeader || e.args[i].kind == Expr::Kind::kRegisterArray) {
        fail(ErrorCode::kMalformedDocument, at(path, i), "operand is not a value");
      }
      check_expr(e.args[i], at(path, i), action);
    }
  }

  void expect_kind(const Primitive &prim, size_t i, Expr::Kind kind, const std::string &path) {
    if (prim.params[i].kind != kind) {
      fail(ErrorCode::kMalformedDocument, at(path, i),
           "unexpected operand kind for primitive '" + prim.op + "'");
    }
  }

  void check_action(ActionDef &a, const std::string &path) {
    for (size_t i = 0; i < a.params.size(); ++i) {
      const int w = a.params[i].width;
      if (w < 1 || w > kMaxFieldWidth) {
        fail(ErrorCode::kWidthOutOfRange, at(at(path, "runtime_data"), i),
             "parameter '" + a.params[i].name + "' width outside [1, 64]");
      }
    }
    for (size_t i = 0; i < a.primitives.size(); ++i) {
      auto &prim = a.primitives[i];
      const std::string ppath = at(at(path, "primitives"), i);
      const std::string params = at(ppath, "parameters");
      auto arity = [&](size_t n) {
        if (prim.params.size() != n) {
          fail(ErrorCode::kMalformedDocument, ppath,
               "primitive '" + prim.op + "' expects " + std::to_string(n) + " parameters");
        }
      };
      if (prim.op == "assign") {
        arity(2);
        expect_kind(prim, 0, Expr::Kind::kField, params);
      } else if (prim.op == "register_read") {
        arity(3);
        expect_kind(prim, 0, Expr::Kind::kField, params);
        expect_kind(prim, 1, Expr::Kind::kRegisterArray, params);
      } else if (prim.op == "register_write") {
        arity(3);
        expect_kind(prim, 0, Expr::Kind::kRegisterArray, params);
      } else if (prim.op == "add_header" || prim.op == "remove_header") {
        arity(1);
        expect_kind(prim, 0, Expr::Kind::kHeader, params);
        const HeaderInstance *h = p_.find_header(prim.params[0].name);
        if (h != nullptr && h->metadata) {
          fail(ErrorCode::kMalformedDocument, params, "cannot change validity of metadata");
        }
      } else if (prim.op == "mark_to_drop") {
        if (prim.params.empty()) prim.params.push_back(Expr::header(arch::kStandardMetadata));
        arity(1);
        expect_kind(prim, 0, Expr::Kind::kHeader, params);
      } else {
        fail(ErrorCode::kUnsupportedConstruct, at(ppath, "op"), "primitive '" + prim.op + "'");
      }
      for (size_t k = 0; k < prim.params.size(); ++k) {
        check_expr(prim.params[k], at(params, k), &a);
      }
    }
  }

  void check_parser(ParserDef &parser, const std::string &path) {
    unique(parser.states, at(path, "parse_states"), "parse state");
    auto find_state = [&](const std::string &name) {
      return std::find_if(parser.states.begin(), parser.states.end(),
                          [&](const ParserState &s) { return s.name == name; });
    };
    if (find_state(parser.init_state) == parser.states.end()) {
      fail(ErrorCode::kDanglingReference, at(path, "init_state"),
           "undefined parse state '" + parser.init_state + "'");
    }
    for (size_t i = 0; i < parser.states.size(); ++i) {
      auto &s = parser.states[i];
      const std::string spath = at(at(path, "parse_states"), i);
      for (size_t k = 0; k < s.extracts.size(); ++k) {
        const HeaderInstance *h = p_.find_header(s.extracts[k]);
        if (h == nullptr) {
          fail(ErrorCode::kDanglingReference, at(at(spath, "parser_ops"), k),
               "undefined header instance '" + s.extracts[k] + "'");
        }
        if (h->metadata) {
          fail(ErrorCode::kMalformedDocument, at(at(spath, "parser_ops"), k),
               "cannot extract metadata '" + h->name + "'");
        }
      }
      int key_width = 0;
      for (size_t k = 0; k < s.transition_key.size(); ++k) {
        const auto *f = field_def(s.transition_key[k].header, s.transition_key[k].field,
                                  at(at(spath, "transition_key"), k));
        key_width += (f->width + 7) / 8 * 8;
      }
      if (key_width > kMaxFieldWidth) {
        fail(ErrorCode::kWidthOutOfRange, at(spath, "transition_key"),
             "transition key wider than 64 bits");
      }
      for (size_t k = 0; k < s.transitions.size(); ++k) {
        const auto &t = s.transitions[k];
        const std::string tpath = at(at(spath, "transitions"), k);
        if (t.next_state && find_state(*t.next_state) == parser.states.end()) {
          fail(ErrorCode::kDanglingReference, at(tpath, "next_state"),
               "undefined parse state '" + *t.next_state + "'");
        }
        if (t.value && s.transition_key.empty()) {
          fail(ErrorCode::kMalformedDocument, tpath, "value transition without a transition key");
        }
      }
    }
    // Every state must be reachable from the start state.
    std::set<std::string> reached;
    std::function<void(const std::string &)> visit = [&](const std::string &name) {
      if (!reached.insert(name).second) return;
      for (const auto &t : find_state(name)->transitions) {
        if (t.next_state) visit(*t.next_state);
      }
    };
    visit(parser.init_state);
    for (size_t i = 0; i < parser.states.size(); ++i) {
      if (!reached.count(parser.states[i].name)) {
        fail(ErrorCode::kMalformedDocument, at(at(path, "parse_states"), i),
             "parse state '" + parser.states[i].name + "' unreachable from start");
      }
    }
  }

  void check_deparser(const DeparserDef &d, const std::string &path) {
    for (size_t i = 0; i < d.order.size(); ++i) {
      const HeaderInstance *h = p_.find_header(d.order[i]);
      if (h == nullptr) {
        fail(ErrorCode::kDanglingReference, at(at(path, "order"), i),
             "undefined header instance '" + d.order[i] + "'");
      }
      if (h->metadata) {
        fail(ErrorCode::kMalformedDocument, at(at(path, "order"), i),
             "cannot emit metadata '" + h->name + "'");
      }
    }
  }

  void check_pipeline_set() {
    std::set<std::string> want = {arch::kIngress, arch::kEgress};
    if (p_.target == Target::kV1Quantum) want.insert(arch::kQControl);
    std::set<std::string> have;
    for (const auto &pipe : p_.pipelines) have.insert(pipe.name);
    if (have != want) {
      std::string names;
      for (const auto &n : want) names += (names.empty() ? "" : ", ") + n;
      fail(ErrorCode::kMalformedDocument, "/pipelines",
           "pipelines must be exactly {" + names + "} for the target");
    }
  }

  void check_pipeline(PipelineDef &pipe, const std::string &path) {
    std::set<std::string> nodes;
    for (size_t i = 0; i < pipe.tables.size(); ++i) {
      if (!nodes.insert(pipe.tables[i].name).second) {
        fail(ErrorCode::kMalformedDocument, at(at(path, "tables"), i),
             "duplicate node '" + pipe.tables[i].name + "'");
      }
    }
    for (size_t i = 0; i < pipe.conditionals.size(); ++i) {
      if (!nodes.insert(pipe.conditionals[i].name).second) {
        fail(ErrorCode::kMalformedDocument, at(at(path, "conditionals"), i),
             "duplicate node '" + pipe.conditionals[i].name + "'");
      }
    }
    auto check_next = [&](const NextNode &next, const std::string &npath) {
      if (next && !nodes.count(*next)) {
        fail(ErrorCode::kDanglingReference, npath, "undefined pipeline node '" + *next + "'");
      }
    };
    check_next(pipe.init_node, at(path, "init_table"));
    for (size_t i = 0; i < pipe.tables.size(); ++i) {
      check_table(pipe.tables[i], at(at(path, "tables"), i), check_next);
    }
    for (size_t i = 0; i < pipe.conditionals.size(); ++i) {
      auto &c = pipe.conditionals[i];
      const std::string cpath = at(at(path, "conditionals"), i);
      check_expr(c.expression, at(cpath, "expression"), nullptr);
      check_next(c.true_next, at(cpath, "true_next"));
      check_next(c.false_next, at(cpath, "false_next"));
    }
    check_acyclic(pipe, path);
  }

  template <typename CheckNext>
  void check_table(TableDef &t, const std::string &path, CheckNext &check_next) {
    for (size_t k = 0; k < t.keys.size(); ++k) {
      field_def(t.keys[k].header, t.keys[k].field, at(at(path, "key"), k));
    }
    for (size_t k = 0; k < t.actions.size(); ++k) {
      if (p_.find_action(t.actions[k]) == nullptr) {
        fail(ErrorCode::kDanglingReference, at(at(path, "actions"), k),
             "undefined action '" + t.actions[k] + "'");
      }
    }
    const std::string dpath = at(path, "default_entry");
    if (std::find(t.actions.begin(), t.actions.end(), t.default_action) == t.actions.end()) {
      fail(ErrorCode::kDanglingReference, dpath,
           "default action '" + t.default_action + "' is not in the action list of table '" +
               t.name + "'");
    }
    const ActionDef *def = p_.find_action(t.default_action);
    if (def->params.size() != t.default_action_data.size()) {
      fail(ErrorCode::kMalformedDocument, at(dpath, "action_data"),
           "default action data arity mismatch");
    }
    for (size_t k = 0; k < def->params.size(); ++k) {
      const int w = def->params[k].width;
      if (w < 64 && (t.default_action_data[k] >> w) != 0) {
        fail(ErrorCode::kWidthOutOfRange, at(at(dpath, "action_data"), k),
             "default action data exceeds parameter width");
      }
    }
    for (const auto &[action, next] : t.next_tables) {
      if (action != "__HIT__" && action != "__MISS__" &&
          std::find(t.actions.begin(), t.actions.end(), action) == t.actions.end()) {
        fail(ErrorCode::kDanglingReference, at(at(path, "next_tables"), action),
             "next_tables names unknown action '" + action + "'");
      }
      check_next(next, at(at(path, "next_tables"), action));
    }
    check_next(t.base_default_next, at(path, "base_default_next"));
  }

  void check_acyclic(const PipelineDef &pipe, const std::string &path) {
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto &t : pipe.tables) {
      auto &out = succ[t.name];
      for (const auto &[_, next] : t.next_tables) {
        if (next) out.push_back(*next);
      }
      if (t.base_default_next) out.push_back(*t.base_default_next);
    }
    for (const auto &c : pipe.conditionals) {
      auto &out = succ[c.name];
      if (c.true_next) out.push_back(*c.true_next);
      if (c.false_next) out.push_back(*c.false_next);
    }
    std::map<std::string, int> color;
    std::function<void(const std::string &)> dfs = [&](const std::string &n) {
      color[n] = 1;
      for (const auto &m : succ[n]) {
        if (color[m] == 1) {
          fail(ErrorCode::kMalformedDocument, path, "control graph has a cycle through '" + m + "'");
        }
        if (color[m] == 0) dfs(m);
      }
      color[n] = 2;
    };
    for (const auto &[n, _] : succ) {
      if (color[n] == 0) dfs(n);
    }
  }

  Program &p_;
};

template <typename T>
void sort_by_name(std::vector<T> &items) {
  std::sort(items.begin(), items.end(),
            [](const T &a, const T &b) { return a.name < b.name; });
}

void normalize(Program &p) {
  sort_by_name(p.header_types);
  sort_by_name(p.headers);
  sort_by_name(p.actions);
  sort_by_name(p.register_arrays);
  sort_by_name(p.enums);
  sort_by_name(p.parsers);
  sort_by_name(p.deparsers);
  sort_by_name(p.pipelines);
  for (auto &e : p.enums) {
    std::sort(e.members.begin(), e.members.end(),
              [](const auto &a, const auto &b) { return a.second < b.second; });
  }
  for (auto &parser : p.parsers) sort_by_name(parser.states);
  for (auto &pipe : p.pipelines) {
    sort_by_name(pipe.tables);
    sort_by_name(pipe.conditionals);
  }
}

}  // namespace

void finalize_program(Program &program) {
  complete_architecture(program);
  Validator(program).run();
  normalize(program);
}

}  // namespace quip::bmv2
