// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "quip/fabric/engine.hpp"

#include <ostream>

namespace quip::fabric {

uint64_t fnv1a(const void *data, size_t size, uint64_t seed) {
  const auto *p = static_cast<const uint8_t *>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a(std::string_view s, uint64_t seed) { return fnv1a(s.data(), s.size(), seed); }

uint64_t derive_seed(uint64_t base, std::string_view name) {
  // splitmix64 finalizer over the base seed mixed with the name hash
  uint64_t z = base + 0x9e3779b97f4a7c15ull * (fnv1a(name) | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void EventEngine::schedule(SimTime at, Handler fn) {
  queue_.push({at < now_ ? now_ : at, next_seq_++, std::move(fn)});
}

uint64_t EventEngine::run_until(SimTime t_end) {
  uint64_t n = 0;
  while (!queue_.empty() && queue_.top().at <= t_end) {
    // Move the handler out before popping; the handler may schedule more.
    Event ev = std::move(const_cast<Event &>(queue_.top()));
    queue_.pop();
    now_ = ev.at;
    ev.fn();
    ++n;
    ++processed_;
  }
  return n;
}

uint64_t EventEngine::run() {
  uint64_t n = 0;
  while (!queue_.empty()) n += run_until(queue_.top().at);
  return n;
}

void EventEngine::record(std::string_view node, std::string_view kind, uint64_t payload) {
  uint64_t h = fnv1a(&now_, sizeof now_, hash_);
  h = fnv1a(node, h);
  h = fnv1a(kind, h);
  hash_ = fnv1a(&payload, sizeof payload, h);
  if (log_ != nullptr) {
    *log_ << now_ << ' ' << node << ' ' << kind << ' ' << std::hex << payload << std::dec << '\n';
  }
}

}  // namespace quip::fabric
