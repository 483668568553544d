// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <queue>
#include <string_view>
#include <vector>

namespace quip::fabric {

using SimTime = int64_t;  // nanoseconds

inline constexpr SimTime kNsPerSecond = 1'000'000'000;

// Discrete-event core: events run in (timestamp, sequence) order, and the
// trace hash folds in every recorded observation so two runs can be compared
// without keeping their logs.
class EventEngine {
 public:
  using Handler = std::function<void()>;

  EventEngine() = default;
  EventEngine(const EventEngine &) = delete;
  EventEngine &operator=(const EventEngine &) = delete;

  SimTime now() const { return now_; }

  // `at` earlier than now() is clamped to now().
  void schedule(SimTime at, Handler fn);
  void schedule_in(SimTime delay, Handler fn) { schedule(now_ + delay, std::move(fn)); }

  // Processes every event with timestamp <= t_end; returns how many ran.
  uint64_t run_until(SimTime t_end);
  uint64_t run();

  bool empty() const { return queue_.empty(); }
  size_t pending() const { return queue_.size(); }
  uint64_t processed() const { return processed_; }

  void record(std::string_view node, std::string_view kind, uint64_t payload);
  uint64_t trace_hash() const { return hash_; }
  void set_log(std::ostream *log) { log_ = log; }

 private:
  struct Event {
    SimTime at;
    uint64_t seq;
    Handler fn;
  };
  struct Later {
    bool operator()(const Event &a, const Event &b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  SimTime now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t processed_ = 0;
  uint64_t hash_ = 0xcbf29ce484222325ull;
  std::ostream *log_ = nullptr;
};

// FNV-1a, used for trace and payload hashing.
uint64_t fnv1a(const void *data, size_t size, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t fnv1a(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull);

// Independent 64-bit stream seeds derived from a base seed and a stable name.
uint64_t derive_seed(uint64_t base, std::string_view name);

// Uniform double in [0, 1) from one draw of a 64-bit generator.
template <typename Rng>
double uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace quip::fabric
