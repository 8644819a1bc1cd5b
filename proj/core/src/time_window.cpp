#include "odmwatch/time_window.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace odmwatch {

namespace {

template <typename Int>
bool parse_fixed(std::string_view text, Int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

TimeWindow::TimeWindow(Date date, std::chrono::seconds start, std::chrono::seconds end)
    : date_(date), start_(start), end_(end) {
  if (start_.count() < 0 || end_ >= kDaySeconds || !(start_ < end_)) {
    throw std::invalid_argument("time window must satisfy 00:00:00 <= start < end <= 23:59:59, got " +
                                format_time_of_day(start) + "-" + format_time_of_day(end));
  }
}

TimeWindow TimeWindow::full_day(Date date) {
  return TimeWindow(date, std::chrono::seconds{0}, kDaySeconds - std::chrono::seconds{1});
}

bool TimeWindow::is_full_day() const noexcept {
  return start_.count() == 0 && end_ == kDaySeconds - std::chrono::seconds{1};
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
      !parse_fixed(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::optional<std::chrono::seconds> parse_time_of_day(std::string_view text) {
  if (text.size() != 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
  int h = 0, m = 0, s = 0;
  if (!parse_fixed(text.substr(0, 2), h) || !parse_fixed(text.substr(3, 2), m) ||
      !parse_fixed(text.substr(6, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || m > 59 || s > 59) return std::nullopt;
  return std::chrono::seconds{h * 3600 + m * 60 + s};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time_of_day(std::chrono::seconds t) {
  const auto s = t.count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(s / 3600),
                static_cast<long long>((s / 60) % 60), static_cast<long long>(s % 60));
  return buf;
}

std::string to_string(const TimeWindow& window) {
  return format_date(window.date()) + " " + format_time_of_day(window.start()) + "-" +
         format_time_of_day(window.end());
}

}  // namespace odmwatch
