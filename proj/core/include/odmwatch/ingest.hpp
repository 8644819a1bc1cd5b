#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "odmwatch/odm.hpp"

namespace odmwatch {

inline constexpr std::string_view kCsvHeader = "date,start,end,origin,destination,count";

struct OdmRecord {
  TimeWindow window;
  AreaId origin;
  AreaId destination;
  Count count = 0;
};

// Per-source expectations used to validate a day of input.
//
// The expected schedule is an equal split of the day into
// (expected_windows_per_day - full_day_window) windows, plus the whole-day
// window 00:00:00-23:59:59 when full_day_window is set. 24 hourly windows and
// a daily total give expected_windows_per_day = 25.
struct SourceProfile {
  std::string source_id;
  int expected_windows_per_day = 1;
  bool has_diagonal_as_stayers = true;
  bool full_day_window = false;
};

// Throws std::invalid_argument when the profile cannot describe a schedule.
std::vector<TimeWindow> expected_windows(const SourceProfile& profile, Date date);

// One snapshot per distinct window in the text, ordered by window. Header row
// is mandatory unless the input is empty. Throws ParseError (with line number)
// on malformed rows and IntegrityError on duplicate cells within a window.
std::vector<SparseOdm> parse_odm_csv(std::string_view text, std::string_view source_name);

// Reads plain or gzip-compressed CSV.
std::vector<SparseOdm> parse_file(const std::filesystem::path& path, const SourceProfile& profile);

std::vector<OdmRecord> to_records(std::span<const SparseOdm> snapshots);

// Canonical CSV: header, then rows ordered by window, origin, destination.
void write_odm_csv(std::ostream& out, std::span<const SparseOdm> snapshots);

struct DayValidationReport {
  std::string source_id;
  Date date{};
  std::vector<TimeWindow> missing_windows;
  std::vector<TimeWindow> extra_windows;
  Count total_volume = 0;

  bool clean() const { return missing_windows.empty() && extra_windows.empty(); }
  nlohmann::json to_json() const;
};

DayValidationReport validate_day(std::span<const SparseOdm> snapshots, const SourceProfile& profile,
                                 Date date);

}  // namespace odmwatch
