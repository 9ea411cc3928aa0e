// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace richfit {

/// Calendar day. Thin wrapper over sys_days so it can be stored, compared and
/// offset by whole days.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : days_(d) {}
  Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}) {}

  /// Parses "YYYY-MM-DD", tolerating a trailing "T..." or " ..." time suffix.
  static Date parse(std::string_view text);

  [[nodiscard]] std::string iso() const;
  /// 0 = Sunday ... 6 = Saturday.
  [[nodiscard]] unsigned weekday() const;
  [[nodiscard]] std::chrono::sys_days days() const { return days_; }

  Date operator+(long n) const { return Date(days_ + std::chrono::days{n}); }
  Date operator-(long n) const { return Date(days_ - std::chrono::days{n}); }
  long operator-(const Date& o) const { return (days_ - o.days_).count(); }
  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

enum class Weekday : unsigned { Sun = 0, Mon, Tue, Wed, Thu, Fri, Sat };

/// Accepts "mon", "Monday", "MON" ... ; throws InvalidParameter otherwise.
Weekday parse_weekday(std::string_view name);
std::string_view weekday_name(Weekday w);

}  // namespace richfit
