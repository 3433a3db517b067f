#include <cstdio>
#include <ctime>

#include "flowclass/game/types.hpp"

namespace flowclass::game {

std::string format_utc(Timestamp t) {
  using namespace std::chrono;
  const auto ms_total = t.time_since_epoch().count();
  auto seconds = static_cast<std::time_t>(ms_total / 1000);
  auto millis = static_cast<int>(ms_total % 1000);
  if (millis < 0) {
    millis += 1000;
    --seconds;
  }
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

}  // namespace flowclass::game
