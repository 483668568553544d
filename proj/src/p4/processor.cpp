// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/p4/processor.hpp"

#include <algorithm>

#include "compiled.hpp"
#include "quip/error.hpp"

namespace quip::p4 {

namespace {

constexpr int kMaxParseSteps = 256;

struct EvalContext {
  const CompiledProgram &prog;
  const PacketInstance &pkt;
  std::span<const uint64_t> params;
};

uint64_t eval(const CExpr &e, const EvalContext &ctx) {
  switch (e.op) {
    case CExpr::kConst:
      return e.value;
    case CExpr::kField:
      if (!e.metadata && !ctx.pkt.valid[e.b]) {
        throw Error(ErrorCode::kEvaluationError,
                    "read of a field of invalid header '" + ctx.prog.headers[e.b].name + "'");
      }
      return ctx.pkt.values[e.a];
    case CExpr::kParam:
      if (e.a >= ctx.params.size()) {
        throw Error(ErrorCode::kEvaluationError, "runtime parameter out of range");
      }
      return ctx.params[e.a];
    case CExpr::kValid:
      return ctx.prog.headers[e.a].metadata || ctx.pkt.valid[e.a] ? 1 : 0;
    case CExpr::kLAnd:
      return eval(e.args[0], ctx) != 0 && eval(e.args[1], ctx) != 0 ? 1 : 0;
    case CExpr::kLOr:
      return eval(e.args[0], ctx) != 0 || eval(e.args[1], ctx) != 0 ? 1 : 0;
    case CExpr::kTernary:
      return eval(e.args[0], ctx) != 0 ? eval(e.args[1], ctx) : eval(e.args[2], ctx);
    case CExpr::kLNot:
    case CExpr::kD2B:
    case CExpr::kB2D:
    case CExpr::kBitNot: {
      const uint64_t v = eval(e.args[0], ctx);
      if (e.op == CExpr::kBitNot) return ~v;
      if (e.op == CExpr::kLNot) return v == 0 ? 1 : 0;
      return v != 0 ? 1 : 0;
    }
    default:
      break;
  }
  const uint64_t l = eval(e.args[0], ctx);
  const uint64_t r = eval(e.args[1], ctx);
  switch (e.op) {
    case CExpr::kAdd: return l + r;
    case CExpr::kSub: return l - r;
    case CExpr::kMul: return l * r;
    case CExpr::kAnd: return l & r;
    case CExpr::kOr: return l | r;
    case CExpr::kXor: return l ^ r;
    case CExpr::kShl: return r >= 64 ? 0 : l << r;
    case CExpr::kShr: return r >= 64 ? 0 : l >> r;
    case CExpr::kEq: return l == r;
    case CExpr::kNe: return l != r;
    case CExpr::kLt: return l < r;
    case CExpr::kLe: return l <= r;
    case CExpr::kGt: return l > r;
    case CExpr::kGe: return l >= r;
    default:
      throw Error(ErrorCode::kEvaluationError, "bad operator");
  }
}

uint64_t read_bits(std::span<const uint8_t> data, size_t bit, int width) {
  uint64_t v = 0;
  for (int i = 0; i < width; ++i, ++bit) {
    v = (v << 1) | ((data[bit / 8] >> (7 - bit % 8)) & 1u);
  }
  return v;
}

void write_bits(std::vector<uint8_t> &out, size_t bit, int width, uint64_t v) {
  for (int i = width - 1; i >= 0; --i, ++bit) {
    if ((v >> i) & 1u) out[bit / 8] |= static_cast<uint8_t>(0x80u >> (bit % 8));
  }
}

}  // namespace

size_t Processor::KeyHash::operator()(const std::vector<uint64_t> &key) const noexcept {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint64_t k : key) {
    h ^= k + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<size_t>(h);
}

// Pipeline interpreter with friend access to the processor's table and
// register state.
class Executor {
 public:
  Executor(Processor &proc, PacketInstance &pkt)
      : proc_(proc), prog_(*proc.compiled_), pkt_(pkt) {}

  void run_pipeline(const CPipeline &pipe) {
    int32_t node = pipe.init;
    // The graph is acyclic, so the number of steps is bounded by its size.
    while (node >= 0) {
      const CNode &n = pipe.nodes[static_cast<size_t>(node)];
      if (n.table) {
        node = apply_table(n.index);
      } else {
        const CCond &c = prog_.conds[n.index];
        node = eval(c.expr, {prog_, pkt_, {}}) != 0 ? c.true_next : c.false_next;
      }
    }
  }

  void run_action(const CAction &a, std::span<const uint64_t> params) {
    const EvalContext ctx{prog_, pkt_, params};
    for (const auto &p : a.prims) {
      switch (p.kind) {
        case CPrimitive::kAssign:
          pkt_.values[p.dst.slot] = eval(p.x, ctx) & width_mask(p.dst.width);
          break;
        case CPrimitive::kRegRead: {
          const uint64_t idx = eval(p.x, ctx);
          pkt_.values[p.dst.slot] = proc_.register_read_at(p.reg, idx) & width_mask(p.dst.width);
          break;
        }
        case CPrimitive::kRegWrite: {
          const uint64_t idx = eval(p.x, ctx);
          proc_.register_write_at(p.reg, idx, eval(p.y, ctx));
          break;
        }
        case CPrimitive::kAddHeader:
          if (!pkt_.valid[p.header]) {
            const CHeader &h = prog_.headers[p.header];
            std::fill_n(pkt_.values.begin() + h.first_slot, h.widths.size(), 0);
            pkt_.valid[p.header] = 1;
          }
          break;
        case CPrimitive::kRemoveHeader:
          pkt_.valid[p.header] = 0;
          break;
        case CPrimitive::kDrop:
          pkt_.values[prog_.egress_spec.slot] = width_mask(prog_.egress_spec.width);
          break;
      }
    }
  }

 private:
  int32_t apply_table(uint32_t index) {
    const CTable &t = prog_.tables[index];
    std::vector<uint64_t> key(t.keys.size());
    for (size_t i = 0; i < t.keys.size(); ++i) {
      if (!t.key_metadata[i] && !pkt_.valid[t.keys[i].header]) {
        throw Error(ErrorCode::kEvaluationError,
                    "table '" + t.name + "' key reads invalid header '" +
                        prog_.headers[t.keys[i].header].name + "'");
      }
      key[i] = pkt_.values[t.keys[i].slot];
    }
    const auto &entries = proc_.tables_[index];
    auto it = entries.find(key);
    const bool hit = it != entries.end();
    const uint32_t action = hit ? it->second.action : t.default_action;
    const std::vector<uint64_t> &params = hit ? it->second.params : t.default_data;
    run_action(prog_.actions[action], params);
    if (t.hit_miss) return hit ? t.hit_next : t.miss_next;
    const size_t pos = static_cast<size_t>(
        std::find(t.actions.begin(), t.actions.end(), action) - t.actions.begin());
    return t.next[pos];
  }

  Processor &proc_;
  const CompiledProgram &prog_;
  PacketInstance &pkt_;
};

Processor::Processor(std::shared_ptr<const CompiledProgram> compiled)
    : compiled_(std::move(compiled)) {
  tables_.resize(compiled_->tables.size());
  reset_registers();
}

Processor::Processor(bmv2::Program program) : Processor(compile(std::move(program))) {}

const bmv2::Program &Processor::program() const { return compiled_->program; }

PacketInstance Processor::new_packet() const {
  PacketInstance pkt;
  pkt.values.assign(compiled_->slot_count, 0);
  pkt.valid.resize(compiled_->headers.size());
  for (size_t i = 0; i < compiled_->headers.size(); ++i) pkt.valid[i] = compiled_->headers[i].metadata;
  return pkt;
}

PacketInstance Processor::parse(std::span<const uint8_t> raw) const {
  const CompiledProgram &c = *compiled_;
  PacketInstance pkt = new_packet();
  size_t offset = 0;  // bytes
  int32_t state = c.parser_init;
  for (int step = 0; state >= 0; ++step) {
    const CState &s = c.states[static_cast<size_t>(state)];
    if (step >= kMaxParseSteps) {
      throw Error(ErrorCode::kParseError, "state '" + s.name + "': parser loop limit exceeded");
    }
    for (uint32_t h : s.extracts) {
      const CHeader &hdr = c.headers[h];
      const size_t bytes = static_cast<size_t>(hdr.total_width / 8);
      if (raw.size() - offset < bytes) {
        throw Error(ErrorCode::kParseError, "state '" + s.name + "': packet too short for '" +
                                                hdr.name + "'");
      }
      size_t bit = offset * 8;
      for (size_t f = 0; f < hdr.widths.size(); ++f) {
        pkt.values[hdr.first_slot + f] = read_bits(raw, bit, hdr.widths[f]);
        bit += static_cast<size_t>(hdr.widths[f]);
      }
      pkt.valid[h] = 1;
      offset += bytes;
    }
    uint64_t key = 0;
    for (const auto &k : s.key) {
      const int padded = (k.width + 7) / 8 * 8;
      key = (padded >= 64 ? 0 : key << padded) | pkt.values[k.slot];
    }
    int32_t next = -2;
    for (const auto &t : s.transitions) {
      if (t.is_default || t.value == key) {
        next = t.next;
        break;
      }
    }
    if (next == -2) {
      if (!s.transitions.empty() || !s.key.empty()) {
        throw Error(ErrorCode::kParseError, "state '" + s.name + "': no transition matches");
      }
      next = -1;
    }
    state = next;
  }
  pkt.payload.assign(raw.begin() + static_cast<std::ptrdiff_t>(offset), raw.end());
  return pkt;
}

std::vector<uint8_t> Processor::deparse(const PacketInstance &pkt) const {
  const CompiledProgram &c = *compiled_;
  size_t bytes = 0;
  for (uint32_t h : c.deparse_order) {
    if (pkt.valid[h]) bytes += static_cast<size_t>(c.headers[h].total_width / 8);
  }
  std::vector<uint8_t> out(bytes, 0);
  size_t bit = 0;
  for (uint32_t h : c.deparse_order) {
    if (!pkt.valid[h]) continue;
    const CHeader &hdr = c.headers[h];
    for (size_t f = 0; f < hdr.widths.size(); ++f) {
      write_bits(out, bit, hdr.widths[f], pkt.values[hdr.first_slot + f]);
      bit += static_cast<size_t>(hdr.widths[f]);
    }
  }
  out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
  return out;
}

void Processor::execute_pipeline(std::string_view pipeline, PacketInstance &pkt) {
  auto it = compiled_->pipeline_ids.find(std::string(pipeline));
  if (it == compiled_->pipeline_ids.end()) {
    throw Error(ErrorCode::kUnknownPipeline, "no pipeline '" + std::string(pipeline) + "'");
  }
  Executor(*this, pkt).run_pipeline(compiled_->pipelines[it->second]);
}

uint64_t Processor::eval_expression(const bmv2::Expr &expr, const PacketInstance &pkt,
                                    std::span<const uint64_t> params) const {
  return eval(compiled_->compile_expr(expr), {*compiled_, pkt, params});
}

size_t Processor::table_id(std::string_view table) const {
  auto it = compiled_->table_ids.find(std::string(table));
  if (it == compiled_->table_ids.end()) {
    throw Error(ErrorCode::kUnknownTable, "no table '" + std::string(table) + "'");
  }
  return it->second;
}

void Processor::table_insert(const TableEntry &entry) {
  const size_t id = table_id(entry.table);
  const CTable &t = compiled_->tables[id];
  if (entry.key.size() != t.keys.size()) {
    throw Error(ErrorCode::kKeyArityMismatch,
                "table '" + t.name + "' takes " + std::to_string(t.keys.size()) + " key fields");
  }
  for (size_t i = 0; i < t.keys.size(); ++i) {
    if ((entry.key[i] & ~width_mask(t.keys[i].width)) != 0) {
      throw Error(ErrorCode::kKeyArityMismatch, "key field " + std::to_string(i) + " of table '" +
                                                    t.name + "' exceeds its width");
    }
  }
  auto a = compiled_->action_ids.find(entry.action);
  if (a == compiled_->action_ids.end() ||
      std::find(t.actions.begin(), t.actions.end(), a->second) == t.actions.end()) {
    throw Error(ErrorCode::kUnknownAction,
                "action '" + entry.action + "' is not available in table '" + t.name + "'");
  }
  const CAction &action = compiled_->actions[a->second];
  if (entry.params.size() != action.param_widths.size()) {
    throw Error(ErrorCode::kActionDataMismatch,
                "action '" + action.name + "' takes " + std::to_string(action.param_widths.size()) +
                    " parameters");
  }
  for (size_t i = 0; i < entry.params.size(); ++i) {
    if ((entry.params[i] & ~width_mask(action.param_widths[i])) != 0) {
      throw Error(ErrorCode::kActionDataMismatch,
                  "parameter " + std::to_string(i) + " of action '" + action.name + "' exceeds its width");
    }
  }
  tables_[id][entry.key] = StoredEntry{a->second, entry.params};
}

void Processor::table_delete(std::string_view table, const std::vector<uint64_t> &key) {
  const size_t id = table_id(table);
  if (key.size() != compiled_->tables[id].keys.size()) {
    throw Error(ErrorCode::kKeyArityMismatch, "wrong key arity for table '" + std::string(table) + "'");
  }
  tables_[id].erase(key);
}

LookupResult Processor::table_lookup(std::string_view table, const std::vector<uint64_t> &key) const {
  const size_t id = table_id(table);
  const CTable &t = compiled_->tables[id];
  if (key.size() != t.keys.size()) {
    throw Error(ErrorCode::kKeyArityMismatch, "wrong key arity for table '" + t.name + "'");
  }
  auto it = tables_[id].find(key);
  if (it == tables_[id].end()) {
    return {false, compiled_->actions[t.default_action].name, t.default_data};
  }
  return {true, compiled_->actions[it->second.action].name, it->second.params};
}

std::vector<TableEntry> Processor::table_entries(std::string_view table) const {
  const size_t id = table_id(table);
  std::vector<TableEntry> out;
  for (const auto &[key, e] : tables_[id]) {
    out.push_back({std::string(table), key, compiled_->actions[e.action].name, e.params});
  }
  std::sort(out.begin(), out.end(), [](const TableEntry &a, const TableEntry &b) { return a.key < b.key; });
  return out;
}

size_t Processor::table_size(std::string_view table) const { return tables_[table_id(table)].size(); }

void Processor::table_clear(std::string_view table) { tables_[table_id(table)].clear(); }

size_t Processor::register_id(std::string_view array) const {
  auto it = compiled_->register_ids.find(std::string(array));
  if (it == compiled_->register_ids.end()) {
    throw Error(ErrorCode::kIndexOutOfRange, "no register array '" + std::string(array) + "'");
  }
  return it->second;
}

uint64_t Processor::register_read_at(size_t reg, uint64_t index) const {
  const auto &cells = registers_[reg];
  if (index >= cells.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "register '" + compiled_->registers[reg].name +
                                                 "' index " + std::to_string(index) + " >= size " +
                                                 std::to_string(cells.size()));
  }
  return cells[index];
}

void Processor::register_write_at(size_t reg, uint64_t index, uint64_t value) {
  auto &cells = registers_[reg];
  if (index >= cells.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "register '" + compiled_->registers[reg].name +
                                                 "' index " + std::to_string(index) + " >= size " +
                                                 std::to_string(cells.size()));
  }
  cells[index] = value & width_mask(compiled_->registers[reg].width);
}

uint64_t Processor::register_read(std::string_view array, uint64_t index) const {
  return register_read_at(register_id(array), index);
}

void Processor::register_write(std::string_view array, uint64_t index, uint64_t value) {
  register_write_at(register_id(array), index, value);
}

void Processor::reset_registers() {
  registers_.clear();
  for (const auto &r : compiled_->registers) registers_.emplace_back(r.size, 0);
}

FieldHandle Processor::field(std::string_view header, std::string_view name) const {
  return compiled_->field(std::string(header), std::string(name));
}

int Processor::header_index(std::string_view header) const {
  auto it = compiled_->header_ids.find(std::string(header));
  if (it == compiled_->header_ids.end()) {
    throw Error(ErrorCode::kEvaluationError, "unknown header '" + std::string(header) + "'");
  }
  return static_cast<int>(it->second);
}

void Processor::set(PacketInstance &pkt, FieldHandle f, uint64_t v) {
  pkt.values[f.slot] = v & width_mask(f.width);
}

uint64_t Processor::get(const PacketInstance &pkt, std::string_view header, std::string_view name) const {
  return get(pkt, field(header, name));
}

void Processor::set(PacketInstance &pkt, std::string_view header, std::string_view name, uint64_t v) const {
  set(pkt, field(header, name), v);
}

bool Processor::is_valid(const PacketInstance &pkt, std::string_view header) const {
  return pkt.valid[static_cast<size_t>(header_index(header))] != 0;
}

void Processor::set_valid(PacketInstance &pkt, std::string_view header, bool valid) const {
  const auto h = static_cast<size_t>(header_index(header));
  const CHeader &hdr = compiled_->headers[h];
  if (hdr.metadata) return;
  if (valid && !pkt.valid[h]) std::fill_n(pkt.values.begin() + hdr.first_slot, hdr.widths.size(), 0);
  pkt.valid[h] = valid ? 1 : 0;
}

}  // namespace quip::p4
