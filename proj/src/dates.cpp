// Apache License, Version 2.0, refer to LICENSE.txt

#include "richfit/dates.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

#include "richfit/errors.hpp"

namespace richfit {

namespace {

int parse_int(std::string_view s) {
  if (s.empty()) throw DataError("empty date component");
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw DataError("bad date component '" + std::string(s) + "'");
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

constexpr std::array<std::string_view, 7> kNames{"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

}  // namespace

Date Date::parse(std::string_view text) {
  auto cut = text.find_first_of("T ");
  if (cut != std::string_view::npos) text = text.substr(0, cut);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("date '" + std::string(text) + "' is not ISO-8601 (YYYY-MM-DD)");
  }
  const int y = parse_int(text.substr(0, 4));
  const int m = parse_int(text.substr(5, 2));
  const int d = parse_int(text.substr(8, 2));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

unsigned Date::weekday() const { return std::chrono::weekday{days_}.c_encoding(); }

Weekday parse_weekday(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (unsigned i = 0; i < kNames.size(); ++i) {
    std::string key(kNames[i]);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower.size() >= 3 && lower.compare(0, 3, key) == 0) return static_cast<Weekday>(i);
  }
  throw InvalidParameter("unknown weekday '" + std::string(name) + "'");
}

std::string_view weekday_name(Weekday w) { return kNames.at(static_cast<unsigned>(w)); }

}  // namespace richfit
