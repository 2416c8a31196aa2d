#pragma once

#include <atomic>

#include "sequela/ehr/time.hpp"

namespace sequela::api {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual ehr::Timestamp now() = 0;
};

class SystemClock : public Clock {
 public:
  ehr::Timestamp now() override;
};

/// Starts at `start` and advances one second per reading, so request
/// sequences replayed in a fresh process produce identical bodies.
class LogicalClock : public Clock {
 public:
  explicit LogicalClock(ehr::Timestamp start = 1704067200) : next_(start) {}  // 2024-01-01T00:00:00Z
  ehr::Timestamp now() override { return next_++; }

 private:
  std::atomic<ehr::Timestamp> next_;
};

}  // namespace sequela::api
