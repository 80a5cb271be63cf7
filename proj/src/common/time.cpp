#include "postforge/time.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace postforge {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad timestamp: " + std::string(whole));
  }
  return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("bad timestamp: " + std::string(text));
  }
  const year_month_day date{year{parse_int(text.substr(0, 4), text)},
                            month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                            day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
  if (!date.ok()) throw std::invalid_argument("bad timestamp: " + std::string(text));
  std::chrono::seconds time_of_day{0};
  if (text.size() > 10) {
    if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
        text[16] != ':') {
      throw std::invalid_argument("bad timestamp: " + std::string(text));
    }
    const std::string_view rest = text.substr(19);
    if (!rest.empty() && rest != "Z") {
      throw std::invalid_argument("bad timestamp: " + std::string(text));
    }
    const int h = parse_int(text.substr(11, 2), text);
    const int m = parse_int(text.substr(14, 2), text);
    const int s = parse_int(text.substr(17, 2), text);
    if (h < 0 || m < 0 || s < 0 || h > 23 || m > 59 || s > 59) throw std::invalid_argument("bad timestamp: " + std::string(text));
    time_of_day = std::chrono::hours{h} + std::chrono::minutes{m} + std::chrono::seconds{s};
  }
  return Timestamp{sys_days{date}.time_since_epoch() + time_of_day};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<std::chrono::days>(t);
  const year_month_day date{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::chrono::seconds parse_duration(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty duration");
  std::int64_t scale = 1;
  switch (text.back()) {
    case 'd': scale = 86400; break;
    case 'h': scale = 3600; break;
    case 'm': scale = 60; break;
    case 's': scale = 1; break;
    default:
      if (text.back() < '0' || text.back() > '9') throw std::invalid_argument("bad duration unit: " + std::string(text));
  }
  const std::string_view digits =
      (text.back() >= '0' && text.back() <= '9') ? text : text.substr(0, text.size() - 1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || value < 0) {
    throw std::invalid_argument("bad duration: " + std::string(text));
  }
  return std::chrono::seconds{value * scale};
}

}  // namespace postforge
