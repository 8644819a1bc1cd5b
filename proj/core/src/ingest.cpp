#include "odmwatch/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "odmwatch/errors.hpp"

namespace odmwatch {

std::vector<TimeWindow> expected_windows(const SourceProfile& profile, Date date) {
  if (profile.expected_windows_per_day < 1) {
    throw std::invalid_argument("expected_windows_per_day must be >= 1");
  }
  const int parts = profile.expected_windows_per_day - (profile.full_day_window ? 1 : 0);
  std::vector<TimeWindow> windows;
  if (parts > 0) {
    if (kDaySeconds.count() % parts != 0) {
      throw std::invalid_argument("cannot split a day into " + std::to_string(parts) +
                                  " equal windows");
    }
    const std::chrono::seconds length{kDaySeconds.count() / parts};
    for (int k = 0; k < parts; ++k) {
      windows.emplace_back(date, length * k, length * (k + 1) - std::chrono::seconds{1});
    }
  }
  if (profile.full_day_window) {
    const auto full = TimeWindow::full_day(date);
    if (std::find(windows.begin(), windows.end(), full) == windows.end()) windows.push_back(full);
  }
  std::sort(windows.begin(), windows.end());
  return windows;
}

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, decltype(&gzclose)> file(gzopen(path.c_str(), "rb"), &gzclose);
  if (!file) throw Error("cannot open " + path.string());
  std::string text;
  char buf[1 << 16];
  for (;;) {
    const int n = gzread(file.get(), buf, sizeof buf);
    if (n < 0) {
      int code = 0;
      throw Error("read error in " + path.string() + ": " + gzerror(file.get(), &code));
    }
    if (n == 0) break;
    text.append(buf, static_cast<std::size_t>(n));
  }
  return text;
}

struct LineCursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 0;

  bool next(std::string_view& out) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out = text.substr(pos, nl - pos);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    pos = nl + 1;
    ++line;
    return true;
  }
};

}  // namespace

std::vector<SparseOdm> parse_odm_csv(std::string_view text, std::string_view source_name) {
  const std::string source(source_name);
  LineCursor cursor{text};
  std::string_view line;

  if (!cursor.next(line)) return {};
  if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
  if (line != kCsvHeader) {
    throw ParseError(source, cursor.line,
                     "expected header '" + std::string(kCsvHeader) + "', got '" + std::string(line) + "'");
  }

  std::map<TimeWindow, std::vector<LabeledCell>> groups;
  std::vector<LabeledCell>* current = nullptr;
  TimeWindow current_window;

  std::string_view fields[6];
  while (cursor.next(line)) {
    if (line.empty()) continue;
    std::size_t nfields = 0;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      if (nfields == 6) {
        nfields = 7;
        break;
      }
      fields[nfields++] = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (nfields != 6) {
      throw ParseError(source, cursor.line, "expected 6 comma-separated fields");
    }

    const auto date = parse_date(fields[0]);
    if (!date) throw ParseError(source, cursor.line, "invalid date '" + std::string(fields[0]) + "'");
    const auto ts = parse_time_of_day(fields[1]);
    if (!ts) throw ParseError(source, cursor.line, "invalid start time '" + std::string(fields[1]) + "'");
    const auto te = parse_time_of_day(fields[2]);
    if (!te) throw ParseError(source, cursor.line, "invalid end time '" + std::string(fields[2]) + "'");
    if (!(*ts < *te)) throw ParseError(source, cursor.line, "start time must precede end time");
    if (fields[3].empty() || fields[4].empty()) {
      throw ParseError(source, cursor.line, "empty origin or destination");
    }
    const auto cf = fields[5];
    Count count = 0;
    auto [ptr, ec] = std::from_chars(cf.data(), cf.data() + cf.size(), count);
    if (cf.empty() || ec != std::errc{} || ptr != cf.data() + cf.size()) {
      throw ParseError(source, cursor.line, "invalid count '" + std::string(cf) + "'");
    }

    const TimeWindow window(*date, *ts, *te);
    if (current == nullptr || !(window == current_window)) {
      current = &groups[window];
      current_window = window;
    }
    if (count > 0) current->push_back({AreaId(fields[3]), AreaId(fields[4]), count});
  }

  std::vector<SparseOdm> snapshots;
  snapshots.reserve(groups.size());
  for (auto& [window, cells] : groups) snapshots.emplace_back(window, std::move(cells));
  return snapshots;
}

std::vector<SparseOdm> parse_file(const std::filesystem::path& path, const SourceProfile& profile) {
  const std::string name =
      profile.source_id.empty() ? path.string() : path.string() + " [" + profile.source_id + "]";
  return parse_odm_csv(read_all(path), name);
}

std::vector<OdmRecord> to_records(std::span<const SparseOdm> snapshots) {
  std::vector<OdmRecord> records;
  for (const auto& m : snapshots) {
    for (auto& c : m.labeled_cells()) {
      records.push_back({m.window(), std::move(c.origin), std::move(c.destination), c.count});
    }
  }
  return records;
}

void write_odm_csv(std::ostream& out, std::span<const SparseOdm> snapshots) {
  std::vector<const SparseOdm*> ordered;
  for (const auto& m : snapshots) ordered.push_back(&m);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SparseOdm* a, const SparseOdm* b) { return a->window() < b->window(); });

  out << kCsvHeader << '\n';
  std::string row;
  for (const SparseOdm* m : ordered) {
    const std::string prefix = format_date(m->window().date()) + "," +
                               format_time_of_day(m->window().start()) + "," +
                               format_time_of_day(m->window().end()) + ",";
    const auto labels = m->labels();
    for (const auto& e : m->entries()) {
      row.assign(prefix);
      row.append(labels[e.origin]).push_back(',');
      row.append(labels[e.destination]).push_back(',');
      char buf[24];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.count);
      row.append(buf, ptr).push_back('\n');
      out << row;
    }
  }
}

nlohmann::json DayValidationReport::to_json() const {
  auto windows = [](const std::vector<TimeWindow>& ws) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& w : ws) {
      arr.push_back({{"start", format_time_of_day(w.start())}, {"end", format_time_of_day(w.end())}});
    }
    return arr;
  };
  return {{"source_id", source_id},
          {"date", format_date(date)},
          {"missing_windows", windows(missing_windows)},
          {"extra_windows", windows(extra_windows)},
          {"total_volume", total_volume}};
}

DayValidationReport validate_day(std::span<const SparseOdm> snapshots, const SourceProfile& profile,
                                 Date date) {
  DayValidationReport report;
  report.source_id = profile.source_id;
  report.date = date;

  std::vector<TimeWindow> present;
  for (const auto& m : snapshots) {
    if (m.window().date() != date) {
      throw std::invalid_argument("snapshot " + to_string(m.window()) + " does not belong to " +
                                  format_date(date));
    }
    present.push_back(m.window());
    report.total_volume += m.mass();
  }
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());

  const auto expected = expected_windows(profile, date);
  std::set_difference(expected.begin(), expected.end(), present.begin(), present.end(),
                      std::back_inserter(report.missing_windows));
  std::set_difference(present.begin(), present.end(), expected.begin(), expected.end(),
                      std::back_inserter(report.extra_windows));
  return report;
}

}  // namespace odmwatch
