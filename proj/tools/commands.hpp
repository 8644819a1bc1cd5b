#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "odmwatch/detector.hpp"
#include "odmwatch/report.hpp"

namespace odmwatch::cli {

// Exit-code contract for schedulers.
enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kValidationWarning = 2,
  kMissingData = 3,
};

struct RunConfig {
  Count th = 20;
  int p = 4;
  double quantile = 0.75;
  Stride stride = Stride::Weekly;
  BoundsMode bounds_mode = BoundsMode::Clamped;
  std::filesystem::path store_root = "odm-store";
  std::string output = "-";
  ReportFormat format = ReportFormat::Jsonl;
  unsigned workers = 0;
  // Expected schedule for validation; unset skips window checks.
  std::optional<int> windows_per_day;
  bool full_day_window = false;
  // Unset: max(p * stride_days, 35).
  std::optional<int> retention_days;

  DetectorConfig detector() const;
  std::optional<SourceProfile> profile(const std::string& source_id) const;
  int retention() const;
};

int cmd_ingest(const std::vector<std::filesystem::path>& files, const std::string& source_id,
               const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_detect(const std::string& source_id, const std::string& date, const RunConfig& config,
               std::ostream& out, std::ostream& err);

int cmd_generate(const std::filesystem::path& spec_file, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err);

}  // namespace odmwatch::cli
