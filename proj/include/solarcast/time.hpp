/*
 * Copyright 2026 The solarcast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SOLARCAST_TIME_HPP_
#define SOLARCAST_TIME_HPP_

#include <cstdint>

#include "solarcast/common.hpp"

// UTC-only civil time on top of an epoch-seconds integer. The calendar
// conversions are the well-known days/civil algorithms; the C++20 chrono
// calendar types are not complete enough on the toolchains we target.

namespace solarcast {

struct civil_date {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

struct civil_datetime {
  civil_date date;
  int hour;    // 0..23
  int minute;  // 0..59
  int second;  // 0..59
};

inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

inline civil_date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe + era * 400);
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  const int d = doy - (153 * mp + 2) / 5 + 1;
  const int m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

inline std::int64_t to_epoch(const civil_datetime& t) {
  return days_from_civil(t.date.year, t.date.month, t.date.day) * 86400ll +
         t.hour * 3600ll + t.minute * 60ll + t.second;
}

inline civil_datetime from_epoch(std::int64_t sec) {
  std::int64_t days = sec / 86400;
  std::int64_t rem = sec % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  civil_datetime out;
  out.date = civil_from_days(days);
  out.hour = static_cast<int>(rem / 3600);
  out.minute = static_cast<int>((rem % 3600) / 60);
  out.second = static_cast<int>(rem % 60);
  return out;
}

inline int day_of_year(std::int64_t sec) {
  civil_date d = from_epoch(sec).date;
  return static_cast<int>(days_from_civil(d.year, d.month, d.day) -
                          days_from_civil(d.year, 1, 1)) +
         1;
}

namespace detail {
inline bool parse_int_field(std::string_view s, size_t pos, size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}
}  // namespace detail

// Accepts exactly "YYYY-MM-DDTHH:MM:SSZ".
inline bool parse_utc(std::string_view s, std::int64_t& out) {
  civil_datetime t{{0, 0, 0}, 0, 0, 0};
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' ||
      s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    return false;
  if (!detail::parse_int_field(s, 0, 4, t.date.year)) return false;
  if (!detail::parse_int_field(s, 5, 2, t.date.month)) return false;
  if (!detail::parse_int_field(s, 8, 2, t.date.day)) return false;
  if (t.date.month < 1 || t.date.month > 12 || t.date.day < 1 || t.date.day > 31)
    return false;
  if (!detail::parse_int_field(s, 11, 2, t.hour)) return false;
  if (!detail::parse_int_field(s, 14, 2, t.minute)) return false;
  if (!detail::parse_int_field(s, 17, 2, t.second)) return false;
  if (t.hour > 23 || t.minute > 59 || t.second > 59) return false;
  out = to_epoch(t);
  return true;
}

inline std::string format_utc(std::int64_t sec) {
  civil_datetime t = from_epoch(sec);
  char buf[21];
  auto two = [](char* p, int v) {
    p[0] = static_cast<char>('0' + v / 10);
    p[1] = static_cast<char>('0' + v % 10);
  };
  int y = t.date.year;
  buf[0] = static_cast<char>('0' + y / 1000);
  buf[1] = static_cast<char>('0' + (y / 100) % 10);
  buf[2] = static_cast<char>('0' + (y / 10) % 10);
  buf[3] = static_cast<char>('0' + y % 10);
  buf[4] = '-';
  two(buf + 5, t.date.month);
  buf[7] = '-';
  two(buf + 8, t.date.day);
  buf[10] = 'T';
  two(buf + 11, t.hour);
  buf[13] = ':';
  two(buf + 14, t.minute);
  buf[16] = ':';
  two(buf + 17, t.second);
  buf[19] = 'Z';
  buf[20] = 0;
  return std::string(buf, 20);
}

}  // namespace solarcast

#endif  // SOLARCAST_TIME_HPP_
