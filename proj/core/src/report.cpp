#include "odmwatch/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

namespace odmwatch {

std::string_view to_string(ReportFormat format) {
  return format == ReportFormat::Jsonl ? "jsonl" : "csv";
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "jsonl") return ReportFormat::Jsonl;
  if (text == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

namespace {

using nlohmann::json;

json window_list(const std::vector<TimeWindow>& windows) {
  json arr = json::array();
  for (const auto& w : windows) {
    arr.push_back({{"start", format_time_of_day(w.start())}, {"end", format_time_of_day(w.end())}});
  }
  return arr;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json label_or_null(const FlowKey& key, bool origin) {
  const auto& label = origin ? key.origin : key.destination;
  if ((origin && key.kind == FlowKind::Inbound) || (!origin && key.kind == FlowKind::Outbound)) {
    return nullptr;
  }
  return label;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

json header_json(const DayReport& day) {
  json inputs = json::array();
  for (const auto& d : day.inputs) inputs.push_back({{"date", format_date(d.date)}, {"sha256", d.sha256}});
  return {{"type", "header"},
          {"source", day.source_id},
          {"date", format_date(day.date)},
          {"config",
           {{"th", day.config.th},
            {"p", day.config.p},
            {"quantile", day.config.quantile},
            {"stride", to_string(day.config.stride)},
            {"bounds_mode", to_string(day.config.bounds_mode)}}},
          {"inputs", inputs},
          {"missing_windows", window_list(day.missing_windows)},
          {"extra_windows", window_list(day.extra_windows)}};
}

json summary_json(const OutcomeSummary& s) {
  return {{"keys", s.keys},
          {"no_signal", s.count(OutcomeStatus::NoSignal)},
          {"signal", s.count(OutcomeStatus::Signal)},
          {"below_eligibility", s.count(OutcomeStatus::BelowEligibility)},
          {"missing_data", s.count(OutcomeStatus::MissingData)},
          {"upper", {{"level1", s.upper_by_level[0]}, {"level2", s.upper_by_level[1]}, {"level3", s.upper_by_level[2]}}},
          {"lower", {{"level1", s.lower_by_level[0]}, {"level2", s.lower_by_level[1]}, {"level3", s.lower_by_level[2]}}}};
}

json window_json(const DayReport& day, const WindowReport& w) {
  return {{"type", "window"},
          {"source", day.source_id},
          {"date", format_date(w.window.date())},
          {"start", format_time_of_day(w.window.start())},
          {"end", format_time_of_day(w.window.end())},
          {"t", w.thresholds.t},
          {"eligible_count", w.thresholds.eligible_count},
          {"degenerate_threshold", w.thresholds.degenerate},
          {"available_history", w.available_history},
          {"summary", summary_json(w.summary)}};
}

json outcome_json(const DayReport& day, const WindowReport& w, const KeyOutcome& o) {
  json line = {{"type", "outcome"},
               {"source", day.source_id},
               {"date", format_date(w.window.date())},
               {"start", format_time_of_day(w.window.start())},
               {"end", format_time_of_day(w.window.end())},
               {"kind", to_string(o.key.kind)},
               {"origin", label_or_null(o.key, true)},
               {"destination", label_or_null(o.key, false)},
               {"status", to_string(o.status)},
               {"direction", nullptr},
               {"level", nullptr},
               {"inc_percent", nullptr},
               {"observed", o.observed},
               {"ma", number_or_null(o.ma)},
               {"sd", number_or_null(o.sd)},
               {"lower", number_or_null(o.lower)},
               {"upper", number_or_null(o.upper)}};
  if (o.signal) {
    line["direction"] = to_string(o.signal->direction);
    line["level"] = o.signal->level;
    line["inc_percent"] = number_or_null(o.signal->inc_percent);
  }
  return line;
}

json summary_json(const DayReport& day) {
  json s = summary_json(day.summary);
  s["type"] = "summary";
  s["source"] = day.source_id;
  s["date"] = format_date(day.date);
  s["windows"] = day.windows.size();
  s["fully_missing"] = day.fully_missing;
  return s;
}

void ReportWriter::begin(const DayReport& day) {
  if (started_) return;
  started_ = true;
  if (format_ == ReportFormat::Jsonl) {
    out_ << header_json(day).dump() << '\n';
  } else {
    out_ << kReportColumns << '\n';
  }
}

void ReportWriter::write_window(const DayReport& day, const WindowReport& w) {
  begin(day);
  if (format_ == ReportFormat::Jsonl) {
    out_ << window_json(day, w).dump() << '\n';
    for (const auto& o : w.outcomes) out_ << outcome_json(day, w, o).dump() << '\n';
    return;
  }
  const std::string prefix = csv_field(day.source_id) + "," + format_date(w.window.date()) + "," +
                             format_time_of_day(w.window.start()) + "," +
                             format_time_of_day(w.window.end()) + ",";
  std::string row;
  for (const auto& o : w.outcomes) {
    row = prefix;
    row += to_string(o.key.kind);
    row += ',';
    if (o.key.kind != FlowKind::Inbound) row += csv_field(o.key.origin);
    row += ',';
    if (o.key.kind != FlowKind::Outbound) row += csv_field(o.key.destination);
    row += ',';
    row += to_string(o.status);
    row += ',';
    if (o.signal) {
      row += fmt::format("{},{},{}", to_string(o.signal->direction), o.signal->level,
                         csv_number(o.signal->inc_percent));
    } else {
      row += ",,";
    }
    row += fmt::format(",{},{},{},{},{}\n", o.observed, csv_number(o.ma), csv_number(o.sd),
                       csv_number(o.lower), csv_number(o.upper));
    out_ << row;
  }
}

void ReportWriter::finish(const DayReport& day) {
  begin(day);
  if (format_ == ReportFormat::Jsonl) out_ << summary_json(day).dump() << '\n';
  out_.flush();
}

void write_report(std::ostream& out, const DayReport& day, ReportFormat format) {
  ReportWriter writer(out, format);
  for (const auto& w : day.windows) writer.write_window(day, w);
  writer.finish(day);
}

}  // namespace odmwatch
