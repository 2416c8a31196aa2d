#include "sequela/api/clock.hpp"

#include <chrono>

namespace sequela::api {

ehr::Timestamp SystemClock::now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace sequela::api
