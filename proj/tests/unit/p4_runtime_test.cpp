// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

#include "quip/bmv2/builder.hpp"
#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"
#include "quip/p4/processor.hpp"

namespace quip::p4 {
namespace {

using namespace bmv2::dsl;
using bmv2::apply;
using bmv2::Expr;
using bmv2::ProgramBuilder;
using bmv2::run;
using bmv2::Target;
using boost::multiprecision::cpp_int;

std::vector<uint8_t> bytes(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidConfig;
}

TEST(Parse, EmptyParserLeavesEverythingInPayload) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  b.parser_state("start");
  Processor proc(b.finalize());
  PacketInstance pkt = proc.parse(bytes({1, 2, 3, 4}));
  EXPECT_FALSE(proc.is_valid(pkt, "h"));
  EXPECT_EQ(pkt.payload, bytes({1, 2, 3, 4}));
}

TEST(Parse, SelectOnTypeField) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"type", 8}}).header("h", "h_t");
  b.parser_state("start").extract("h").select({{"h", "type"}}).on(1, std::nullopt);
  Processor proc(b.finalize());
  PacketInstance pkt = proc.parse(bytes({0x01, 0xAB}));
  EXPECT_TRUE(proc.is_valid(pkt, "h"));
  EXPECT_EQ(proc.get(pkt, "h", "type"), 1u);
  EXPECT_EQ(pkt.payload, bytes({0xAB}));
  EXPECT_EQ(code_of([&] { proc.parse(bytes({0x02, 0xAB})); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([&] { proc.parse({}); }), ErrorCode::kParseError);
}

TEST(Deparse, BigEndianFieldOrder) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"x", 16}}).header("h", "h_t").deparser("deparser", {"h"});
  Processor proc(b.finalize());
  PacketInstance pkt = proc.new_packet();
  EXPECT_TRUE(proc.deparse(pkt).empty());
  pkt.payload = bytes({9});
  EXPECT_EQ(proc.deparse(pkt), bytes({9}));
  proc.set_valid(pkt, "h", true);
  proc.set(pkt, "h", "x", 0x0102);
  EXPECT_EQ(proc.deparse(pkt), bytes({0x01, 0x02, 9}));
}

TEST(Deparse, SubByteFieldsPackMsbFirst) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"a", 3}, {"b", 9}, {"c", 4}}).header("h", "h_t").deparser("deparser", {"h"});
  b.parser_state("start").extract("h");
  Processor proc(b.finalize());
  PacketInstance pkt = proc.new_packet();
  proc.set_valid(pkt, "h", true);
  proc.set(pkt, "h", "a", 0b101);
  proc.set(pkt, "h", "b", 0b110000001);
  proc.set(pkt, "h", "c", 0b0110);
  // 101 110000001 0110 -> 1011 1000 0001 0110
  EXPECT_EQ(proc.deparse(pkt), bytes({0xB8, 0x16}));
  EXPECT_EQ(proc.parse(proc.deparse(pkt)), pkt);
}

Processor one_table_processor() {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"f", 16}, {"x", 8}}).header("h", "h_t");
  b.action("NoAction");
  b.action("set_x", {{"v", 8}}).assign(F("h", "x"), P(0));
  b.table("ingress", "t").key("h", "f").actions({"set_x", "NoAction"}).default_action("NoAction");
  b.control("ingress", {apply("t")});
  return Processor(b.finalize());
}

TEST(ExecutePipeline, EmptyPipelineIsIdentity) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"f", 16}}).header("h", "h_t");
  Processor proc(b.finalize());
  PacketInstance pkt = proc.new_packet();
  proc.set_valid(pkt, "h", true);
  proc.set(pkt, "h", "f", 77);
  PacketInstance before = pkt;
  proc.execute_pipeline("ingress", pkt);
  EXPECT_EQ(pkt, before);
  EXPECT_EQ(code_of([&] { proc.execute_pipeline("qcontrol", pkt); }), ErrorCode::kUnknownPipeline);
}

TEST(ExecutePipeline, ExactMatchHitAndMiss) {
  Processor proc = one_table_processor();
  proc.table_insert({"t", {7}, "set_x", {42}});
  PacketInstance pkt = proc.new_packet();
  proc.set_valid(pkt, "h", true);
  proc.set(pkt, "h", "f", 7);
  proc.execute_pipeline("ingress", pkt);
  EXPECT_EQ(proc.get(pkt, "h", "x"), 42u);

  PacketInstance miss = proc.new_packet();
  proc.set_valid(miss, "h", true);
  proc.set(miss, "h", "f", 8);
  proc.set(miss, "h", "x", 5);
  proc.execute_pipeline("ingress", miss);
  EXPECT_EQ(proc.get(miss, "h", "x"), 5u);
}

TEST(ExecutePipeline, InvalidHeaderReadIsEvaluationError) {
  Processor proc = one_table_processor();
  PacketInstance pkt = proc.new_packet();
  EXPECT_EQ(code_of([&] { proc.execute_pipeline("ingress", pkt); }), ErrorCode::kEvaluationError);
}

TEST(TableApi, InsertDeleteLookup) {
  Processor proc = one_table_processor();
  proc.table_insert({"t", {3}, "set_x", {1}});
  EXPECT_TRUE(proc.table_lookup("t", {3}).hit);
  EXPECT_EQ(proc.table_lookup("t", {3}).action, "set_x");
  proc.table_insert({"t", {3}, "set_x", {2}});
  EXPECT_EQ(proc.table_lookup("t", {3}).params, std::vector<uint64_t>{2});
  EXPECT_EQ(proc.table_size("t"), 1u);
  proc.table_delete("t", {3});
  LookupResult r = proc.table_lookup("t", {3});
  EXPECT_FALSE(r.hit);
  EXPECT_EQ(r.action, "NoAction");
}

TEST(TableApi, Errors) {
  Processor proc = one_table_processor();
  EXPECT_EQ(code_of([&] { proc.table_insert({"nope", {1}, "set_x", {1}}); }), ErrorCode::kUnknownTable);
  EXPECT_EQ(code_of([&] { proc.table_insert({"t", {1, 2}, "set_x", {1}}); }), ErrorCode::kKeyArityMismatch);
  EXPECT_EQ(code_of([&] { proc.table_insert({"t", {1 << 16}, "set_x", {1}}); }), ErrorCode::kKeyArityMismatch);
  EXPECT_EQ(code_of([&] { proc.table_insert({"t", {1}, "other", {}}); }), ErrorCode::kUnknownAction);
  EXPECT_EQ(code_of([&] { proc.table_insert({"t", {1}, "set_x", {}}); }), ErrorCode::kActionDataMismatch);
  EXPECT_EQ(code_of([&] { proc.table_insert({"t", {1}, "set_x", {256}}); }), ErrorCode::kActionDataMismatch);
}

// Naive oracle: a list of entries scanned front to back, later inserts replace.
struct LinearTable {
  std::vector<TableEntry> entries;
  void insert(const TableEntry &e) {
    for (auto &x : entries) {
      if (x.key == e.key) {
        x = e;
        return;
      }
    }
    entries.push_back(e);
  }
  void erase(const std::vector<uint64_t> &key) {
    std::erase_if(entries, [&](const TableEntry &x) { return x.key == key; });
  }
  std::optional<TableEntry> find(const std::vector<uint64_t> &key) const {
    for (const auto &x : entries) {
      if (x.key == key) return x;
    }
    return std::nullopt;
  }
};

TEST(TableApi, MatchesLinearScanOracle) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"a", 4}, {"b", 4}}).header("h", "h_t");
  b.action("NoAction");
  b.action("act", {{"v", 12}});
  b.table("ingress", "t").key("h", "a").key("h", "b").actions({"act", "NoAction"}).default_action("NoAction");
  b.control("ingress", {apply("t")});
  Processor proc(b.finalize());
  LinearTable oracle;
  std::mt19937_64 rng(5);
  for (int step = 0; step < 20000; ++step) {
    std::vector<uint64_t> key = {rng() % 16, rng() % 16};
    const int op = static_cast<int>(rng() % 3);
    if (op == 0) {
      TableEntry e{"t", key, "act", {rng() % 4096}};
      proc.table_insert(e);
      oracle.insert(e);
    } else if (op == 1) {
      proc.table_delete("t", key);
      oracle.erase(key);
    }
    const auto want = oracle.find(key);
    const LookupResult got = proc.table_lookup("t", key);
    ASSERT_EQ(got.hit, want.has_value());
    if (want) {
      ASSERT_EQ(got.params, want->params);
    } else {
      ASSERT_EQ(got.action, "NoAction");
    }
    ASSERT_EQ(proc.table_size("t"), oracle.entries.size());
  }
}

TEST(Registers, ReadWriteAndTruncation) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t").register_array("r", 8, 4);
  Processor proc(b.finalize());
  EXPECT_EQ(proc.register_read("r", 2), 0u);
  proc.register_write("r", 2, 300);
  EXPECT_EQ(proc.register_read("r", 2), 44u);
  EXPECT_EQ(code_of([&] { proc.register_read("r", 4); }), ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(code_of([&] { proc.register_write("r", 9, 1); }), ErrorCode::kIndexOutOfRange);
}

TEST(Expressions, Examples) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("m_t", {{"x8", 8}, {"acc", 2}, {"m", 2}}).header("m", "m_t", true);
  b.action("wrap").assign(F("m", "x8"), Add(C(0xFF), C(1)));
  b.action("acc").assign(F("m", "acc"), Xor(F("m", "acc"), F("m", "m")));
  b.control("ingress", {run("wrap"), run("acc")});
  Processor proc(b.finalize());
  PacketInstance pkt = proc.new_packet();
  EXPECT_EQ(proc.eval_expression(Add(C(5), C(7)), pkt), 12u);
  proc.set(pkt, "m", "acc", 0b10);
  proc.set(pkt, "m", "m", 0b11);
  proc.set(pkt, "m", "x8", 9);
  proc.execute_pipeline("ingress", pkt);
  EXPECT_EQ(proc.get(pkt, "m", "x8"), 0u);
  EXPECT_EQ(proc.get(pkt, "m", "acc"), 0b01u);
}

TEST(Expressions, ModularArithmeticMatchesBigIntegerOracle) {
  const std::vector<std::string> ops = {"+", "-", "*", "&", "|", "^", "<<", ">>"};
  std::mt19937_64 rng(17);
  for (int width : {1, 2, 7, 8, 9, 16, 31, 32, 33, 48, 63, 64}) {
    ProgramBuilder b(Target::kClassical);
    b.header_type("m_t", {{"a", width}, {"b", width}, {"d", width}}).header("m", "m_t", true);
    for (const auto &op : ops) {
      b.action("do" + std::to_string(&op - ops.data()))
          .assign(F("m", "d"), Expr::op(op, F("m", "a"), F("m", "b")));
    }
    b.action("do_not").assign(F("m", "d"), Expr::unary("~", F("m", "a")));
    Processor proc(b.finalize());
    const uint64_t mask = width_mask(width);
    const cpp_int modulus = cpp_int(1) << width;
    for (int trial = 0; trial < 200; ++trial) {
      const uint64_t a = rng() & mask;
      const uint64_t bv = ((trial % 4 == 0) ? rng() % 70 : rng()) & mask;
      for (size_t k = 0; k <= ops.size(); ++k) {
        cpp_int A = a, B = bv, want;
        const std::string op = k < ops.size() ? ops[k] : "~";
        if (op == "+") want = A + B;
        if (op == "-") want = A - B;
        if (op == "*") want = A * B;
        if (op == "&") want = A & B;
        if (op == "|") want = A | B;
        if (op == "^") want = A ^ B;
        if (op == "<<") want = bv >= 64 ? cpp_int(0) : A << static_cast<unsigned>(bv);
        if (op == ">>") want = bv >= 64 ? cpp_int(0) : A >> static_cast<unsigned>(bv);
        if (op == "~") want = modulus - 1 - A;
        want %= modulus;
        if (want < 0) want += modulus;
        const std::string action = k < ops.size() ? "do" + std::to_string(k) : "do_not";
        // Run the action through a single-table ingress added to a copy.
        bmv2::Program prog = proc.program();
        auto &ingress = *std::find_if(prog.pipelines.begin(), prog.pipelines.end(),
                                      [](const auto &p) { return p.name == "ingress"; });
        bmv2::TableDef t;
        t.name = "tbl";
        t.actions = {action};
        t.default_action = action;
        t.next_tables[action] = std::nullopt;
        ingress.tables.push_back(t);
        ingress.init_node = "tbl";
        Processor runner(prog);
        PacketInstance p2 = runner.new_packet();
        runner.set(p2, "m", "a", a);
        runner.set(p2, "m", "b", bv);
        runner.execute_pipeline("ingress", p2);
        ASSERT_EQ(cpp_int(runner.get(p2, "m", "d")), want)
            << "width " << width << " op " << op << " a=" << a << " b=" << (bv);
      }
    }
  }
}

TEST(Expressions, ComparisonsAndLogic) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  Processor proc(b.finalize());
  PacketInstance pkt = proc.new_packet();
  EXPECT_EQ(proc.eval_expression(Expr::op("<", C(3), C(200)), pkt), 1u);
  EXPECT_EQ(proc.eval_expression(Expr::op(">=", C(3), C(200)), pkt), 0u);
  EXPECT_EQ(proc.eval_expression(And(Expr::boolean(true), Not(Expr::boolean(false))), pkt), 1u);
  EXPECT_EQ(proc.eval_expression(Expr::ternary(Eq(C(1), C(2)), C(10), C(20)), pkt), 20u);
  EXPECT_EQ(proc.eval_expression(Valid("h"), pkt), 0u);
  // Short-circuit: the invalid-header read on the right is never evaluated.
  EXPECT_EQ(proc.eval_expression(And(Valid("h"), Eq(F("h", "a"), C(0))), pkt), 0u);
  EXPECT_EQ(code_of([&] { proc.eval_expression(Eq(F("h", "a"), C(0)), pkt); }), ErrorCode::kEvaluationError);
}

TEST(Properties, RandomPacketsRoundTrip) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("a_t", {{"kind", 8}, {"x", 13}, {"y", 3}}).header("a", "a_t");
  b.header_type("b_t", {{"z", 64}, {"w", 32}}).header("bh", "b_t");
  b.header_type("c_t", {{"u", 1}, {"v", 7}}).header("c", "c_t");
  b.parser_state("start").extract("a").select({{"a", "kind"}}).on(1, "parse_b").on(2, "parse_c").otherwise(std::nullopt);
  b.parser_state("parse_b").extract("bh").select({}).otherwise("parse_c");
  b.parser_state("parse_c").extract("c");
  b.deparser("deparser", {"a", "bh", "c"});
  Processor proc(b.finalize());
  std::mt19937_64 rng(99);
  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<uint8_t> raw(rng() % 24);
    for (auto &x : raw) x = static_cast<uint8_t>(rng());
    if (!raw.empty()) raw[0] = static_cast<uint8_t>(rng() % 4);
    PacketInstance pkt;
    try {
      pkt = proc.parse(raw);
    } catch (const Error &e) {
      ASSERT_EQ(e.code(), ErrorCode::kParseError);
      continue;
    }
    ++accepted;
    ASSERT_EQ(proc.deparse(pkt), raw);
  }
  EXPECT_GT(accepted, 5000);
}

TEST(Properties, ExecutionTouchesOnlyPacketAndRegisters) {
  ProgramBuilder b(Target::kClassical);
  b.header_type("h_t", {{"f", 16}, {"x", 8}}).header("h", "h_t").register_array("r", 8, 4);
  b.action("NoAction");
  b.action("bump", {{"v", 8}}).assign(F("h", "x"), P(0)).register_write("r", C(1), P(0));
  b.table("ingress", "t").key("h", "f").actions({"bump", "NoAction"}).default_action("NoAction");
  b.control("ingress", {apply("t")});
  Processor proc(b.finalize());
  proc.table_insert({"t", {1}, "bump", {9}});
  const auto entries_before = proc.table_entries("t");
  PacketInstance pkt = proc.new_packet();
  proc.set_valid(pkt, "h", true);
  proc.set(pkt, "h", "f", 1);
  proc.execute_pipeline("ingress", pkt);
  EXPECT_EQ(proc.table_entries("t"), entries_before);
  EXPECT_EQ(proc.register_read("r", 1), 9u);
  for (uint64_t i : {0, 2, 3}) EXPECT_EQ(proc.register_read("r", i), 0u);
  EXPECT_EQ(proc.get(pkt, "h", "x"), 9u);
}

}  // namespace
}  // namespace quip::p4
