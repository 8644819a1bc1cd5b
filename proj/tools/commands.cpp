#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <map>
#include <ostream>

#include "odmwatch/errors.hpp"
#include "odmwatch/history_store.hpp"
#include "odmwatch/ingest.hpp"
#include "odmwatch/synth.hpp"

namespace odmwatch::cli {

DetectorConfig RunConfig::detector() const {
  return {.th = th, .p = p, .quantile = quantile, .stride = stride, .bounds_mode = bounds_mode, .workers = workers};
}

std::optional<SourceProfile> RunConfig::profile(const std::string& source_id) const {
  if (!windows_per_day) return std::nullopt;
  return SourceProfile{source_id, *windows_per_day, true, full_day_window};
}

int RunConfig::retention() const {
  return retention_days ? *retention_days : HistoryStore::default_retention_days(p, stride);
}

int cmd_ingest(const std::vector<std::filesystem::path>& files, const std::string& source_id,
               const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto profile = config.profile(source_id);
  std::map<Date, std::vector<SparseOdm>> by_date;
  try {
    const SourceProfile parse_profile = profile.value_or(SourceProfile{source_id});
    for (const auto& file : files) {
      for (auto& m : parse_file(file, parse_profile)) by_date[m.window().date()].push_back(std::move(m));
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }

  bool warnings = false;
  try {
    HistoryStore store(config.store_root, config.retention());
    for (const auto& [date, snapshots] : by_date) {
      if (profile) {
        const auto report = validate_day(snapshots, *profile, date);
        warnings = warnings || !report.clean();
        out << report.to_json().dump() << '\n';
      } else {
        Count volume = 0;
        for (const auto& m : snapshots) volume += m.mass();
        out << nlohmann::json{{"source_id", source_id},
                              {"date", format_date(date)},
                              {"windows", snapshots.size()},
                              {"total_volume", volume}}
                   .dump()
            << '\n';
      }
      store.put_snapshots(source_id, snapshots);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return warnings ? kValidationWarning : kOk;
}

int cmd_detect(const std::string& source_id, const std::string& date_text, const RunConfig& config,
               std::ostream& out, std::ostream& err) {
  const auto date = parse_date(date_text);
  if (!date) {
    err << "error: invalid date '" << date_text << "'\n";
    return kError;
  }
  if (!(config.quantile > 0.0 && config.quantile < 1.0) || config.p < 1) {
    err << "error: quantile must lie in (0, 1) and p must be >= 1\n";
    return kError;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!config.output.empty() && config.output != "-") {
    file.open(config.output, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write " << config.output << '\n';
      return kError;
    }
    sink = &file;
  }

  try {
    HistoryStore store(config.store_root, config.retention());
    ReportWriter writer(*sink, config.format);
    DetectOptions options;
    options.profile = config.profile(source_id);
    options.keep_outcomes = false;
    options.on_window = [&](const DayReport& day, const WindowReport& w) { writer.write_window(day, w); };
    const auto day = detect_day(store, source_id, *date, config.detector(), options);
    writer.finish(day);
    if (!*sink) {
      err << "error: failed writing report\n";
      return kError;
    }
    err << summary_json(day).dump() << '\n';
    if (day.fully_missing) {
      err << "date " << date_text << " is missing data for source " << source_id << '\n';
      return kMissingData;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}

int cmd_generate(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(spec_file);
    if (!in) throw Error("cannot read " + spec_file.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw SpecError(std::string("spec is not valid JSON: ") + e.what());
    }
    const SynthWorld world(SynthSpec::from_json(j));
    world.write(out_dir);
    out << "generated " << world.dates().size() << " days, " << world.pattern().size()
        << " cells per window, " << world.spec().anomalies.size() << " anomalies into " << out_dir.string()
        << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}

}  // namespace odmwatch::cli
