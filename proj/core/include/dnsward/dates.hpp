#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dnsward {

// UTC calendar day stored as days since 1970-01-01. All daily analytics use
// UTC day boundaries; a fixed offset can be applied at ingest if needed.
class Date {
 public:
  Date() = default;
  explicit Date(int32_t days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  static std::optional<Date> parse(std::string_view s);  // "YYYY-MM-DD"

  int32_t days() const { return days_; }
  std::string to_string() const;

  int weekday() const;  // 0 = Monday .. 6 = Sunday
  bool is_weekend() const { return weekday() >= 5; }

  Date operator+(int d) const { return Date(days_ + d); }
  Date operator-(int d) const { return Date(days_ - d); }
  int32_t operator-(Date other) const { return days_ - other.days_; }
  Date& operator++() { ++days_; return *this; }
  auto operator<=>(const Date&) const = default;

 private:
  int32_t days_ = 0;
};

int64_t to_epoch_seconds(Date d, int hour = 0, int minute = 0, int second = 0);
Date date_of_epoch(int64_t epoch_seconds);

// "2018-09-17T09:00:00Z"
std::string format_timestamp(int64_t epoch_seconds);
// Accepts ISO-8601 with 'T' or ' ' separator and 'Z' suffix, a bare date,
// or integer epoch seconds.
std::optional<int64_t> parse_timestamp(std::string_view s);

}  // namespace dnsward
