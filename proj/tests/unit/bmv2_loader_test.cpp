// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "json.hpp"
#include "quip/bmv2/builder.hpp"
#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"

namespace quip::bmv2 {
namespace {

using json = nlohmann::json;
using namespace dsl;

const char *kMinimal = R"({
  "header_types": [{"name": "h_t", "id": 0, "fields": [["a", 8, false]]}],
  "headers": [{"name": "h", "id": 0, "header_type": "h_t", "metadata": false}],
  "pipelines": [
    {"name": "ingress", "id": 0, "init_table": null, "tables": [], "conditionals": []},
    {"name": "egress", "id": 1, "init_table": null, "tables": [], "conditionals": []},
    {"name": "qcontrol", "id": 2, "init_table": null, "tables": [], "conditionals": []}
  ]
})";

ErrorCode load_error(const std::string &text, std::string *path = nullptr) {
  try {
    load_program(text);
  } catch (const LoadError &e) {
    if (path) *path = e.path();
    return e.code();
  }
  ADD_FAILURE() << "document accepted";
  return ErrorCode::kInvalidConfig;
}

json one_table_doc() {
  json doc = json::parse(kMinimal);
  doc["actions"] = json::parse(R"([
    {"name": "NoAction", "id": 0, "runtime_data": [], "primitives": []},
    {"name": "set_a", "id": 1, "runtime_data": [{"name": "v", "bitwidth": 8}],
     "primitives": [{"op": "assign", "parameters": [
        {"type": "field", "value": ["h", "a"]}, {"type": "runtime_data", "value": 0}]}]}
  ])");
  doc["pipelines"][0]["init_table"] = "t";
  doc["pipelines"][0]["tables"] = json::parse(R"([
    {"name": "t", "id": 0, "key": [{"match_type": "exact", "name": "h.a", "target": ["h", "a"], "mask": null}],
     "match_type": "exact", "type": "simple", "max_size": 64, "with_counters": false,
     "support_timeout": false, "direct_meters": null, "action_ids": [1, 0], "actions": ["set_a", "NoAction"],
     "base_default_next": null, "next_tables": {"set_a": null, "NoAction": null},
     "default_entry": {"action_id": 0, "action_const": false, "action_data": [], "action_entry_const": false}}
  ])");
  return doc;
}

TEST(LoadProgram, MinimalDocumentHasThreePipelinesAndNoTables) {
  Program p = load_program(kMinimal);
  EXPECT_EQ(p.pipelines.size(), 3u);
  EXPECT_EQ(p.table_count(), 0u);
  EXPECT_NE(p.find_header(arch::kQControlMetadata), nullptr);
  EXPECT_NE(p.find_header(arch::kXConnectMetadata), nullptr);
  EXPECT_NE(p.find_enum(arch::kEventTypeEnum), nullptr);
}

TEST(LoadProgram, ArchitectureMetadataWidths) {
  Program p = load_program(kMinimal);
  const auto *q = p.find_header_type(p.find_header(arch::kQControlMetadata)->header_type);
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->find("event_timestamp")->width, 64);
  EXPECT_EQ(q->find("bsm_bell_index")->width, 2);
  EXPECT_EQ(q->find("swap_qubit_0")->width, 9);
  const auto *x = p.find_header_type(p.find_header(arch::kXConnectMetadata)->header_type);
  EXPECT_EQ(x->find("bsm_grp")->width, 16);
  EXPECT_EQ(x->find("egress_spec")->width, 9);
}

TEST(LoadProgram, DefaultActionMustBeDefined) {
  json doc = one_table_doc();
  doc["pipelines"][0]["tables"][0]["default_entry"]["action_id"] = 7;
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kDanglingReference);
}

TEST(LoadProgram, DefaultActionMustBeInActionList) {
  json doc = one_table_doc();
  doc["actions"].push_back(json::parse(R"({"name": "other", "id": 2, "runtime_data": [], "primitives": []})"));
  doc["pipelines"][0]["tables"][0]["default_entry"]["action_id"] = 2;
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kDanglingReference);
}

TEST(LoadProgram, DanglingFieldReferenceReportsPath) {
  json doc = one_table_doc();
  doc["actions"][1]["primitives"][0]["parameters"][0]["value"] = json::array({"h", "zz"});
  std::string path;
  EXPECT_EQ(load_error(doc.dump(), &path), ErrorCode::kDanglingReference);
  EXPECT_EQ(path, "/actions/1/primitives/0/parameters/0");
}

TEST(LoadProgram, WidthsOutsideRange) {
  json doc = json::parse(kMinimal);
  doc["header_types"][0]["fields"][0][1] = 65;
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kWidthOutOfRange);
  doc["header_types"][0]["fields"][0][1] = 0;
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kWidthOutOfRange);
  doc = json::parse(kMinimal);
  doc["register_arrays"] = json::parse(R"([{"name": "r", "id": 0, "size": 4, "bitwidth": 128}])");
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kWidthOutOfRange);
}

TEST(LoadProgram, RejectsUnsupportedConstructs) {
  struct Case {
    const char *pointer;
    json value;
  };
  const std::vector<Case> cases = {
      {"/checksums", json::parse(R"([{"name": "c"}])")},
      {"/meter_arrays", json::parse(R"([{"name": "m"}])")},
      {"/counter_arrays", json::parse(R"([{"name": "c"}])")},
      {"/learn_lists", json::parse(R"([{"name": "l"}])")},
      {"/header_stacks", json::parse(R"([{"name": "s"}])")},
      {"/pipelines/0/tables/0/match_type", "lpm"},
      {"/pipelines/0/tables/0/key/0/match_type", "ternary"},
      {"/pipelines/0/tables/0/type", "indirect"},
      {"/pipelines/0/tables/0/with_counters", true},
      {"/pipelines/0/tables/0/entries", json::parse(R"([{"match_key": []}])")},
      {"/pipelines/0/action_profiles", json::parse(R"([{"name": "ap"}])")},
      {"/header_types/0/fields/0", json::parse(R"(["a", "*"])")},
      {"/header_types/0/fields/0/2", true},
      {"/actions/1/primitives/0/op", "modify_field_with_hash_based_offset"},
      {"/something_new", 1},
  };
  for (const auto &c : cases) {
    json doc = one_table_doc();
    doc[json::json_pointer(c.pointer)] = c.value;
    EXPECT_EQ(load_error(doc.dump()), ErrorCode::kUnsupportedConstruct) << c.pointer;
  }
}

TEST(LoadProgram, RejectsWrongPipelineSet) {
  json doc = json::parse(kMinimal);
  doc["pipelines"].erase(2);
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kMalformedDocument);
  doc["__meta__"] = {{"target", "classical"}};
  EXPECT_NO_THROW(load_program(doc.dump()));
}

TEST(LoadProgram, RejectsMalformedJson) {
  EXPECT_EQ(load_error("{\"headers\": ["), ErrorCode::kMalformedDocument);
  EXPECT_EQ(load_error("[]"), ErrorCode::kMalformedDocument);
}

TEST(LoadProgram, RejectsUnreachableParserState) {
  json doc = json::parse(kMinimal);
  doc["parsers"] = json::parse(R"([{"name": "parser", "id": 0, "init_state": "start", "parse_states": [
    {"name": "start", "id": 0, "parser_ops": [], "transitions": [{"type": "default", "value": null, "mask": null, "next_state": null}], "transition_key": []},
    {"name": "orphan", "id": 1, "parser_ops": [], "transitions": [{"type": "default", "value": null, "mask": null, "next_state": null}], "transition_key": []}
  ]}])");
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kMalformedDocument);
  doc["parsers"][0]["parse_states"][0]["transitions"][0]["next_state"] = "missing";
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kDanglingReference);
}

TEST(LoadProgram, RejectsConflictingArchitectureMetadata) {
  json doc = json::parse(kMinimal);
  doc["header_types"].push_back(json::parse(R"({"name": "q_t", "id": 1, "fields": [["bsm_id", 8, false]]})"));
  doc["headers"].push_back(json::parse(R"({"name": "qcontrol_metadata", "id": 1, "header_type": "q_t", "metadata": true})"));
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kMalformedDocument);
}

TEST(LoadProgram, RejectsControlCycle) {
  json doc = one_table_doc();
  doc["pipelines"][0]["tables"][0]["base_default_next"] = "t";
  EXPECT_EQ(load_error(doc.dump()), ErrorCode::kMalformedDocument);
}

TEST(LoadProgram, EnumMembersFoldToIntegers) {
  json doc = one_table_doc();
  doc["actions"][1]["primitives"][0]["parameters"][1] =
      json::parse(R"({"type": "enum", "value": ["QControlOperation", "release"]})");
  Program p = load_program(doc.dump());
  const Expr &src = p.find_action("set_a")->primitives[0].params[1];
  EXPECT_EQ(src.kind, Expr::Kind::kConstant);
  EXPECT_EQ(src.value, arch::kOpRelease);
}

TEST(SerializeProgram, EmptyProgramHasEmptyTables) {
  json doc = json::parse(serialize_program(load_program(kMinimal)));
  ASSERT_EQ(doc["pipelines"].size(), 3u);
  for (const auto &pipe : doc["pipelines"]) EXPECT_TRUE(pipe["tables"].empty());
}

TEST(SerializeProgram, RegisterArrayIsEmitted) {
  json doc = json::parse(kMinimal);
  doc["register_arrays"] = json::parse(R"([{"name": "r", "id": 3, "size": 8, "bitwidth": 16}])");
  json out = json::parse(serialize_program(load_program(doc.dump())));
  ASSERT_EQ(out["register_arrays"].size(), 1u);
  EXPECT_EQ(out["register_arrays"][0]["name"], "r");
  EXPECT_EQ(out["register_arrays"][0]["bitwidth"], 16);
  EXPECT_EQ(out["register_arrays"][0]["size"], 8);
  EXPECT_EQ(out["register_arrays"][0]["id"], 0);
}

TEST(SerializeProgram, RoundTripIsIdentity) {
  Program p = load_program(one_table_doc().dump());
  const std::string once = serialize_program(p);
  Program q = load_program(once);
  EXPECT_EQ(p, q);
  EXPECT_EQ(once, serialize_program(q));
}

TEST(LoadProgram, AcceptanceIsOrderIndependent) {
  json doc = one_table_doc();
  doc["register_arrays"] = json::parse(R"([{"name": "r1", "id": 0, "size": 4, "bitwidth": 8},
                                           {"name": "r2", "id": 1, "size": 4, "bitwidth": 8}])");
  const Program reference = load_program(doc.dump());
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    json shuffled = doc;
    for (const char *key : {"header_types", "headers", "actions", "pipelines", "register_arrays"}) {
      std::vector<json> items(shuffled[key].begin(), shuffled[key].end());
      std::shuffle(items.begin(), items.end(), rng);
      shuffled[key] = items;
    }
    EXPECT_EQ(load_program(shuffled.dump()), reference);
  }
}

TEST(BuildProgram, EmptyEqualsMinimalDocument) {
  ProgramBuilder b;
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  EXPECT_EQ(b.finalize(), load_program(kMinimal));
}

TEST(BuildProgram, OneTableRoundTrip) {
  ProgramBuilder b;
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  b.action("NoAction");
  b.action("set_a", {{"v", 8}}).assign(F("h", "a"), P(0));
  b.table("ingress", "t").key("h", "a").actions({"set_a", "NoAction"}).default_action("NoAction").max_size(64);
  b.control("ingress", {apply("t")});
  Program built = b.finalize();
  EXPECT_EQ(built, load_program(one_table_doc().dump()));
  EXPECT_EQ(load_program(serialize_program(built)), built);
}

TEST(BuildProgram, ControlFlowCompilesToGraph) {
  ProgramBuilder b;
  b.header_type("h_t", {{"a", 8}, {"b", 8}}).header("h", "h_t");
  b.action("one").assign(F("h", "b"), C(1));
  b.action("two").assign(F("h", "b"), C(2));
  b.control("ingress", {if_(Eq(F("h", "a"), C(0)), {run("one")}, {run("two")})});
  Program p = b.finalize();
  const PipelineDef *in = p.find_pipeline("ingress");
  ASSERT_EQ(in->conditionals.size(), 1u);
  ASSERT_EQ(in->tables.size(), 2u);
  EXPECT_EQ(in->init_node, in->conditionals[0].name);
  EXPECT_EQ(in->conditionals[0].true_next, std::optional<std::string>("tbl_one"));
  EXPECT_EQ(in->conditionals[0].false_next, std::optional<std::string>("tbl_two"));
}

TEST(BuildProgram, ValidationErrorsAtFinalize) {
  ProgramBuilder b;
  b.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  b.action("bad").assign(F("h", "nope"), C(1));
  EXPECT_THROW(b.finalize(), LoadError);

  ProgramBuilder twice;
  twice.header_type("h_t", {{"a", 8}}).header("h", "h_t");
  twice.action("a");
  twice.table("ingress", "t").actions({"a"}).default_action("a");
  twice.control("ingress", {apply("t"), apply("t")});
  EXPECT_THROW(twice.finalize(), LoadError);
}

}  // namespace
}  // namespace quip::bmv2
