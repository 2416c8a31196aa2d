#include "sequela/ehr/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace sequela::ehr {

namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
  if (ec != std::errc{} || ptr != text.data() + pos + count) {
    throw std::invalid_argument("bad timestamp digits: " + std::string(text));
  }
  return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    throw std::invalid_argument("timestamp must be YYYY-MM-DDTHH:MM:SSZ: " + std::string(text));
  }
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4);
  const int mo = read_digits(text, 5, 2);
  const int d = read_digits(text, 8, 2);
  const int h = read_digits(text, 11, 2);
  const int mi = read_digits(text, 14, 2);
  const int s = read_digits(text, 17, 2);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw std::invalid_argument("timestamp out of range: " + std::string(text));
  }
  const auto date = sys_days{ymd};
  return date.time_since_epoch().count() * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  Timestamp day_index = t / kSecondsPerDay;
  Timestamp rem = t % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --day_index;
  }
  const year_month_day ymd{sys_days{days{day_index}}};
  const int year = static_cast<int>(ymd.year());
  if (year < 0 || year > 9999) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", year, static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
    return buf;
  }
  std::string out = "0000-00-00T00:00:00Z";
  auto put2 = [&out](std::size_t at, int v) {
    out[at] = static_cast<char>('0' + v / 10);
    out[at + 1] = static_cast<char>('0' + v % 10);
  };
  put2(0, year / 100);
  put2(2, year % 100);
  put2(5, static_cast<int>(static_cast<unsigned>(ymd.month())));
  put2(8, static_cast<int>(static_cast<unsigned>(ymd.day())));
  put2(11, static_cast<int>(rem / 3600));
  put2(14, static_cast<int>((rem / 60) % 60));
  put2(17, static_cast<int>(rem % 60));
  return out;
}

}  // namespace sequela::ehr
