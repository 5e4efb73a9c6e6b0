#include "dnsward/dates.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace dnsward {

namespace {

using days_t = std::chrono::days;
using sys_days = std::chrono::sys_days;

std::optional<int> parse_int_field(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
  return Date(static_cast<int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

std::optional<Date> Date::parse(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  const auto y = parse_int_field(s.substr(0, 4));
  const auto m = parse_int_field(s.substr(5, 2));
  const auto d = parse_int_field(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date(static_cast<int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

std::string Date::to_string() const {
  const std::chrono::year_month_day ymd{sys_days{days_t{days_}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int Date::weekday() const {
  const std::chrono::weekday wd{sys_days{days_t{days_}}};
  // c_encoding: 0 = Sunday; shift so 0 = Monday
  return static_cast<int>((wd.c_encoding() + 6) % 7);
}

int64_t to_epoch_seconds(Date d, int hour, int minute, int second) {
  return static_cast<int64_t>(d.days()) * 86400 + hour * 3600 + minute * 60 + second;
}

Date date_of_epoch(int64_t epoch_seconds) {
  int64_t days = epoch_seconds / 86400;
  if (epoch_seconds < 0 && epoch_seconds % 86400 != 0) --days;
  return Date(static_cast<int32_t>(days));
}

std::string format_timestamp(int64_t epoch_seconds) {
  const Date d = date_of_epoch(epoch_seconds);
  int64_t rem = epoch_seconds - to_epoch_seconds(d);
  const int h = static_cast<int>(rem / 3600);
  const int m = static_cast<int>((rem % 3600) / 60);
  const int s = static_cast<int>(rem % 60);
  return d.to_string() + "T" + (h < 10 ? "0" : "") + std::to_string(h) + ":" +
         (m < 10 ? "0" : "") + std::to_string(m) + ":" + (s < 10 ? "0" : "") +
         std::to_string(s) + "Z";
}

std::optional<int64_t> parse_timestamp(std::string_view s) {
  if (s.empty()) return std::nullopt;
  // integer epoch seconds
  {
    int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  if (s.size() < 10) return std::nullopt;
  const auto date = Date::parse(s.substr(0, 10));
  if (!date) return std::nullopt;
  if (s.size() == 10) return to_epoch_seconds(*date);
  if (s.size() < 19) return std::nullopt;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  if (s[13] != ':' || s[16] != ':') return std::nullopt;
  const auto h = parse_int_field(s.substr(11, 2));
  const auto m = parse_int_field(s.substr(14, 2));
  const auto sec = parse_int_field(s.substr(17, 2));
  if (!h || !m || !sec) return std::nullopt;
  if (*h > 23 || *m > 59 || *sec > 60) return std::nullopt;
  // anything after seconds must be 'Z' or a fractional part we ignore
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest != "Z") {
    if (rest[0] == '.') {
      size_t i = 1;
      while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
      rest = rest.substr(i);
      if (!rest.empty() && rest != "Z") return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  return to_epoch_seconds(*date, *h, *m, *sec);
}

}  // namespace dnsward
