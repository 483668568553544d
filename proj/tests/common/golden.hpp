// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

// Runner for the hand-built interpreter corpus in tests/golden. Each file holds
// a BMv2 program, table entries to install, and packet cases whose expected
// results were worked out by hand. Cases run in order on one processor, so
// register state carries from case to case.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quip/bmv2/loader.hpp"
#include "quip/error.hpp"
#include "quip/p4/processor.hpp"

namespace quip::testing {

struct GoldenResult {
  std::string name;
  int cases = 0;
  std::vector<std::string> failures;
};

inline std::filesystem::path golden_dir() {
  return std::filesystem::path(QUIP_SOURCE_DIR) / "tests" / "golden";
}

inline std::vector<uint8_t> from_hex(const std::string &hex) {
  std::vector<uint8_t> out;
  for (size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

inline std::string to_hex(const std::vector<uint8_t> &bytes) {
  static const char *digits = "0123456789abcdef";
  std::string out;
  for (uint8_t b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

inline std::pair<std::string, std::string> split_field(const std::string &dotted) {
  const auto dot = dotted.find('.');
  return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

inline GoldenResult run_golden_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  const auto doc = nlohmann::json::parse(in);
  GoldenResult r;
  r.name = doc.at("name").get<std::string>();
  auto fail = [&](int c, const std::string &msg) {
    r.failures.push_back(r.name + " case " + std::to_string(c) + ": " + msg);
  };

  p4::Processor proc(bmv2::load_program(doc.at("program").dump()));
  for (const auto &e : doc.at("entries")) {
    proc.table_insert({e.at("table"), e.at("key").get<std::vector<uint64_t>>(), e.at("action"),
                       e.at("params").get<std::vector<uint64_t>>()});
  }

  int c = 0;
  for (const auto &tc : doc.at("cases")) {
    ++c;
    ++r.cases;
    const auto &expect = tc.at("expect");
    const std::string want_error = expect.value("error", "");
    std::string got_error;
    p4::PacketInstance pkt;
    try {
      const auto raw = from_hex(tc.at("input").get<std::string>());
      pkt = proc.parse(raw);
      if (tc.contains("set")) {
        for (const auto &[k, v] : tc.at("set").items()) {
          const auto [h, f] = split_field(k);
          proc.set(pkt, h, f, v.get<uint64_t>());
        }
      }
      const std::vector<std::string> pipes =
          tc.value("pipelines", std::vector<std::string>{"ingress", "egress"});
      for (const auto &p : pipes) proc.execute_pipeline(p, pkt);
    } catch (const Error &e) {
      got_error = std::string(to_string(e.code()));
    }
    if (got_error != want_error) {
      fail(c, "error '" + got_error + "', expected '" + want_error + "'");
      continue;
    }
    if (!want_error.empty()) continue;

    if (expect.contains("output")) {
      const std::string got = to_hex(proc.deparse(pkt));
      if (got != expect.at("output").get<std::string>()) {
        fail(c, "output " + got + ", expected " + expect.at("output").get<std::string>());
      }
    }
    if (expect.contains("fields")) {
      for (const auto &[k, v] : expect.at("fields").items()) {
        const auto [h, f] = split_field(k);
        const uint64_t got = proc.get(pkt, h, f);
        if (got != v.get<uint64_t>()) {
          fail(c, k + " = " + std::to_string(got) + ", expected " + std::to_string(v.get<uint64_t>()));
        }
      }
    }
    if (expect.contains("valid")) {
      for (const auto &[h, v] : expect.at("valid").items()) {
        if (proc.is_valid(pkt, h) != v.get<bool>()) fail(c, "validity of " + h);
      }
    }
    if (expect.contains("registers")) {
      for (const auto &reg : expect.at("registers")) {
        const uint64_t got = proc.register_read(reg.at(0).get<std::string>(), reg.at(1).get<uint64_t>());
        if (got != reg.at(2).get<uint64_t>()) {
          fail(c, reg.dump() + " read " + std::to_string(got));
        }
      }
    }
  }
  return r;
}

inline std::vector<std::filesystem::path> golden_files() {
  std::vector<std::filesystem::path> out;
  for (const auto &e : std::filesystem::directory_iterator(golden_dir())) {
    if (e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace quip::testing
