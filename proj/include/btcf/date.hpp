#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace btcf {

/// A calendar date (UTC day), stored as days since 1970-01-01.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d)
      : days_(static_cast<std::int32_t>(d.time_since_epoch().count())) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  static std::optional<Date> parse_iso(std::string_view text);  // "YYYY-MM-DD"
  static Date from_unix_seconds(std::int64_t seconds);          // UTC midnight floor

  std::string iso() const;
  std::int32_t day_number() const { return days_; }

  Date operator+(int days) const;
  Date operator-(int days) const { return *this + (-days); }
  int operator-(Date other) const { return days_ - other.days_; }
  Date& operator++() { ++days_; return *this; }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int32_t days_ = 0;
};

}  // namespace btcf
