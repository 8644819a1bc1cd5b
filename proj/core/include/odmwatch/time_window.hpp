#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace odmwatch {

using Date = std::chrono::sys_days;

inline constexpr std::chrono::seconds kDaySeconds{86400};

// Sampling window of one ODM: calendar date plus [start, end] time of day.
// A whole-day matrix uses 00:00:00-23:59:59.
class TimeWindow {
 public:
  TimeWindow() = default;

  // Throws std::invalid_argument unless start < end < 24h.
  TimeWindow(Date date, std::chrono::seconds start, std::chrono::seconds end);

  static TimeWindow full_day(Date date);

  Date date() const noexcept { return date_; }
  std::chrono::seconds start() const noexcept { return start_; }
  std::chrono::seconds end() const noexcept { return end_; }

  bool is_full_day() const noexcept;

  // Same start/end on another date.
  TimeWindow on(Date date) const { return TimeWindow(date, start_, end_); }

  bool same_times(const TimeWindow& other) const noexcept {
    return start_ == other.start_ && end_ == other.end_;
  }

  friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;

 private:
  Date date_{};
  std::chrono::seconds start_{0};
  std::chrono::seconds end_{kDaySeconds - std::chrono::seconds{1}};
};

std::optional<Date> parse_date(std::string_view text);
std::optional<std::chrono::seconds> parse_time_of_day(std::string_view text);

std::string format_date(Date date);
std::string format_time_of_day(std::chrono::seconds t);

// "YYYY-MM-DD HH:MM:SS-HH:MM:SS"
std::string to_string(const TimeWindow& window);

}  // namespace odmwatch
