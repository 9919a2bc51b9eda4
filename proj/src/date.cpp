#include "btcf/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace btcf {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) throw std::runtime_error("invalid calendar date");
  return Date{std::chrono::sys_days{ymd}};
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  // YYYY-MM-DD, strict.
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  int yi = std::stoi(std::string(y));
  unsigned mi = static_cast<unsigned>(std::stoi(std::string(m)));
  unsigned di = static_cast<unsigned>(std::stoi(std::string(d)));
  std::chrono::year_month_day ymd{std::chrono::year{yi}, std::chrono::month{mi},
                                  std::chrono::day{di}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::from_unix_seconds(std::int64_t seconds) {
  // Floor toward -inf so pre-1970 stamps would still map to the right day.
  std::int64_t days = seconds / 86400;
  if (seconds % 86400 < 0) --days;
  Date d;
  d.days_ = static_cast<std::int32_t>(days);
  return d;
}

std::string Date::iso() const {
  std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days_}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

Date Date::operator+(int days) const {
  Date d;
  d.days_ = days_ + days;
  return d;
}

}  // namespace btcf
