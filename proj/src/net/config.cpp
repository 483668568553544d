// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/net/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "quip/error.hpp"

namespace quip::net {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string &where, const std::string &why) {
  throw Error(ErrorCode::kInvalidConfig, where + ": " + why);
}

// Message of a nested error without its code prefix.
std::string detail(const Error &e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

void only_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[k, v] : j.items()) {
    if (!ok.count(k)) fail(where + "/" + k, "unknown key");
  }
}

template <typename T>
T get(const json &j, const std::string &where, const char *key, T fallback) {
  if (!j.contains(key)) return fallback;
  const json &v = j.at(key);
  const std::string path = where + "/" + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail(path, "expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) fail(path, "expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<int64_t>() < 0 && !v.is_number_unsigned())) {
      fail(path, "expected a non-negative integer");
    }
  } else {
    if (!v.is_number()) fail(path, "expected a number");
  }
  return v.get<T>();
}

fabric::PhysicsParams parse_physics(const json &j, const std::string &where) {
  only_keys(j, where,
            {"attenuation_db_per_km", "speed_m_per_s", "t_prep_ns", "optical_bsm_success", "detector_efficiency",
             "herald_all_bell_states", "swap_success", "swap_duration_ns"});
  fabric::PhysicsParams p;
  p.attenuation_db_per_km = get(j, where, "attenuation_db_per_km", p.attenuation_db_per_km);
  p.speed_m_per_s = get(j, where, "speed_m_per_s", p.speed_m_per_s);
  p.t_prep_ns = get<int64_t>(j, where, "t_prep_ns", p.t_prep_ns);
  p.optical_bsm_success = get(j, where, "optical_bsm_success", p.optical_bsm_success);
  p.detector_efficiency = get(j, where, "detector_efficiency", p.detector_efficiency);
  p.herald_all_bell_states = get(j, where, "herald_all_bell_states", p.herald_all_bell_states);
  p.swap_success = get(j, where, "swap_success", p.swap_success);
  p.swap_duration_ns = get<int64_t>(j, where, "swap_duration_ns", p.swap_duration_ns);
  auto prob = [&](double v, const char *k) {
    if (!(v >= 0 && v <= 1)) fail(where + "/" + k, "must be within [0, 1]");
  };
  prob(p.optical_bsm_success, "optical_bsm_success");
  prob(p.detector_efficiency, "detector_efficiency");
  prob(p.swap_success, "swap_success");
  if (!(p.attenuation_db_per_km >= 0)) fail(where + "/attenuation_db_per_km", "must be >= 0");
  if (!(p.speed_m_per_s > 0)) fail(where + "/speed_m_per_s", "must be > 0");
  if (p.t_prep_ns < 0) fail(where + "/t_prep_ns", "must be >= 0");
  if (p.swap_duration_ns < 0) fail(where + "/swap_duration_ns", "must be >= 0");
  return p;
}

TopologySpec parse_topology(const json &j, const std::string &where, const std::filesystem::path &base) {
  only_keys(j, where,
            {"kind", "end_nodes", "length_km", "bsm_units", "nodes", "links", "controller", "programs_dir"});
  const std::string kind = get<std::string>(j, where, "kind", "hub_and_spoke");
  const double km = get(j, where, "length_km", 5.0);
  const auto units = get<uint32_t>(j, where, "bsm_units", 1);
  TopologySpec t;
  if (kind == "hub_and_spoke") {
    t = hub_and_spoke(get<uint32_t>(j, where, "end_nodes", 16), km, units);
  } else if (kind == "chain") {
    t = chain(km, units);
  } else if (kind == "custom") {
    if (!j.contains("nodes") || !j["nodes"].is_array()) fail(where + "/nodes", "expected an array");
    if (!j.contains("links") || !j["links"].is_array()) fail(where + "/links", "expected an array");
    for (size_t i = 0; i < j["nodes"].size(); ++i) {
      const json &n = j["nodes"][i];
      const std::string w = where + "/nodes/" + std::to_string(i);
      only_keys(n, w, {"name", "role", "bsm_units"});
      NodeSpec ns;
      ns.name = get<std::string>(n, w, "name", "");
      try {
        ns.role = v1q::parse_role(get<std::string>(n, w, "role", ""));
      } catch (const Error &e) {
        fail(w + "/role", detail(e));
      }
      ns.bsm_units = get<uint32_t>(n, w, "bsm_units", ns.role == v1q::Role::kHub ? units : 0);
      t.nodes.push_back(ns);
    }
    for (size_t i = 0; i < j["links"].size(); ++i) {
      const json &l = j["links"][i];
      const std::string w = where + "/links/" + std::to_string(i);
      only_keys(l, w, {"a", "a_port", "b", "b_port", "length_km"});
      t.links.push_back({get<std::string>(l, w, "a", ""), get<uint32_t>(l, w, "a_port", 0),
                         get<std::string>(l, w, "b", ""), get<uint32_t>(l, w, "b_port", 0),
                         get(l, w, "length_km", km)});
    }
  } else {
    fail(where + "/kind", "expected hub_and_spoke, chain or custom");
  }
  t.controller = get<std::string>(j, where, "controller", "");
  std::string dir = get<std::string>(j, where, "programs_dir", "");
  if (!dir.empty() && std::filesystem::path(dir).is_relative()) {
    dir = std::filesystem::absolute(base / dir).lexically_normal().string();
  }
  t.programs_dir = dir;
  return t;
}

DemandSpec parse_demand(const json &j, const std::string &where) {
  only_keys(j, where, {"rate", "pairs_per_request", "duration_s", "window_s", "repetitions", "drain", "drain_limit_s"});
  DemandSpec d;
  d.rate = get(j, where, "rate", d.rate);
  d.pairs_per_request = get(j, where, "pairs_per_request", d.pairs_per_request);
  d.duration_s = get(j, where, "duration_s", d.duration_s);
  if (j.contains("window_s")) {
    const json &w = j["window_s"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      fail(where + "/window_s", "expected [start, end]");
    }
    d.window_start_s = w[0].get<double>();
    d.window_end_s = w[1].get<double>();
  }
  d.repetitions = get(j, where, "repetitions", d.repetitions);
  d.drain = get(j, where, "drain", d.drain);
  d.drain_limit_s = get(j, where, "drain_limit_s", d.drain_limit_s);
  try {
    validate(d);
  } catch (const Error &e) {
    fail(where, detail(e));
  }
  return d;
}

}  // namespace

void set_hub_units(TopologySpec &topology, uint32_t units) {
  for (NodeSpec &n : topology.nodes) {
    if (n.role == v1q::Role::kHub) n.bsm_units = units;
  }
}

ExperimentConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    fail("", std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"topology", "physics", "demand", "seed", "sweep"});
  ExperimentConfig c;
  c.topology = parse_topology(j.value("topology", json::object()), "/topology", base_dir);
  c.topology.physics = parse_physics(j.value("physics", json::object()), "/physics");
  c.demand = parse_demand(j.value("demand", json::object()), "/demand");
  if (j.contains("seed")) {
    c.seed = get<uint64_t>(j, "", "seed", 0);
    c.demand.base_seed = *c.seed;
  }
  if (j.contains("sweep")) {
    const json &s = j["sweep"];
    only_keys(s, "/sweep", {"bsm_units", "rate"});
    if (s.contains("bsm_units")) {
      if (!s["bsm_units"].is_array()) fail("/sweep/bsm_units", "expected an array");
      for (size_t i = 0; i < s["bsm_units"].size(); ++i) {
        const json &v = s["bsm_units"][i];
        if (!v.is_number_unsigned() || v.get<uint64_t>() == 0) fail("/sweep/bsm_units/" + std::to_string(i), "expected a positive integer");
        c.sweep.bsm_units.push_back(v.get<uint32_t>());
      }
    }
    if (s.contains("rate")) {
      if (!s["rate"].is_array()) fail("/sweep/rate", "expected an array");
      for (size_t i = 0; i < s["rate"].size(); ++i) {
        const json &v = s["rate"][i];
        if (!v.is_number() || !(v.get<double>() >= 0)) fail("/sweep/rate/" + std::to_string(i), "expected a rate >= 0");
        c.sweep.rates.push_back(v.get<double>());
      }
    }
  }
  try {
    c.topology = resolve(c.topology);
  } catch (const Error &e) {
    fail("/topology", detail(e));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) fail(path.string(), "cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig &c) {
  json j;
  json topo;
  topo["kind"] = "custom";
  topo["nodes"] = json::array();
  for (const NodeSpec &n : c.topology.nodes) {
    topo["nodes"].push_back({{"name", n.name}, {"role", std::string(v1q::to_string(n.role))}, {"bsm_units", n.bsm_units}});
  }
  topo["links"] = json::array();
  for (const LinkSpec &l : c.topology.links) {
    topo["links"].push_back(
        {{"a", l.a}, {"a_port", l.a_port}, {"b", l.b}, {"b_port", l.b_port}, {"length_km", l.length_km}});
  }
  topo["controller"] = c.topology.controller;
  if (!c.topology.programs_dir.empty()) topo["programs_dir"] = c.topology.programs_dir;
  j["topology"] = topo;
  const fabric::PhysicsParams &p = c.topology.physics;
  j["physics"] = {{"attenuation_db_per_km", p.attenuation_db_per_km},
                  {"speed_m_per_s", p.speed_m_per_s},
                  {"t_prep_ns", p.t_prep_ns},
                  {"optical_bsm_success", p.optical_bsm_success},
                  {"detector_efficiency", p.detector_efficiency},
                  {"herald_all_bell_states", p.herald_all_bell_states},
                  {"swap_success", p.swap_success},
                  {"swap_duration_ns", p.swap_duration_ns}};
  const DemandSpec &d = c.demand;
  j["demand"] = {{"rate", d.rate},
                 {"pairs_per_request", d.pairs_per_request},
                 {"duration_s", d.duration_s},
                 {"window_s", {d.window_start_s, d.window_end_s}},
                 {"repetitions", d.repetitions},
                 {"drain", d.drain},
                 {"drain_limit_s", d.drain_limit_s}};
  if (c.seed) j["seed"] = *c.seed;
  if (!c.sweep.bsm_units.empty() || !c.sweep.rates.empty()) {
    json s = json::object();
    if (!c.sweep.bsm_units.empty()) s["bsm_units"] = c.sweep.bsm_units;
    if (!c.sweep.rates.empty()) s["rate"] = c.sweep.rates;
    j["sweep"] = s;
  }
  return j.dump(2) + "\n";
}

}  // namespace quip::net
