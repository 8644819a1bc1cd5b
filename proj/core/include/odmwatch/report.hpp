#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>

#include "json.hpp"
#include "odmwatch/detector.hpp"

namespace odmwatch {

enum class ReportFormat { Jsonl, Csv };

std::string_view to_string(ReportFormat format);
std::optional<ReportFormat> parse_report_format(std::string_view text);

// Outcome columns shared by both formats.
inline constexpr std::string_view kReportColumns =
    "source,date,start,end,kind,origin,destination,status,direction,level,inc_percent,observed,ma,sd,"
    "lower,upper";

nlohmann::json header_json(const DayReport& day);
nlohmann::json window_json(const DayReport& day, const WindowReport& window);
nlohmann::json outcome_json(const DayReport& day, const WindowReport& window, const KeyOutcome& outcome);
nlohmann::json summary_json(const DayReport& day);
nlohmann::json summary_json(const OutcomeSummary& summary);

// Streams a day report window by window.
//
// JSON Lines: a header line (config echo, input digests, missing windows),
// then per window a window line followed by its outcome lines, then one
// summary line. Each line carries "type". CSV: the kReportColumns header and
// one row per outcome.
class ReportWriter {
 public:
  ReportWriter(std::ostream& out, ReportFormat format) : out_(out), format_(format) {}

  void write_window(const DayReport& day, const WindowReport& window);
  void finish(const DayReport& day);

 private:
  void begin(const DayReport& day);

  std::ostream& out_;
  ReportFormat format_;
  bool started_ = false;
};

// Whole report in one call; `day` must have been produced with keep_outcomes.
void write_report(std::ostream& out, const DayReport& day, ReportFormat format);

}  // namespace odmwatch
