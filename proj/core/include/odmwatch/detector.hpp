#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odmwatch/history_store.hpp"
#include "odmwatch/ingest.hpp"
#include "odmwatch/rolling_stats.hpp"
#include "odmwatch/thresholds.hpp"

namespace odmwatch {

// th, p and quantile are the tuning knobs; the rest selects variants.
struct DetectorConfig {
  Count th = 20;
  int p = 4;
  double quantile = 0.75;
  Stride stride = Stride::Weekly;
  BoundsMode bounds_mode = BoundsMode::Clamped;
  unsigned workers = 1;  // 0 = hardware concurrency
};

enum class OutcomeStatus : std::uint8_t { NoSignal, Signal, BelowEligibility, MissingData };
enum class Direction : std::uint8_t { Upper, Lower };

std::string_view to_string(OutcomeStatus status);
std::string_view to_string(Direction direction);

struct Signal {
  Direction direction = Direction::Upper;
  int level = 1;
  // (observed / ma - 1) * 100; +inf for a flow appearing over ma = 0.
  double inc_percent = 0.0;
};

// Result for one series in one window. Fields that were not computed for the
// status (bounds for BelowEligibility, everything but observed for
// MissingData) are NaN.
struct KeyOutcome {
  FlowKey key;
  OutcomeStatus status = OutcomeStatus::NoSignal;
  Count observed = 0;
  double ma = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  std::optional<Signal> signal;
};

// Level by |inc|: below 50 -> 1, [50, 100) -> 2, 100 and above -> 3.
int classify_level(double inc_percent);

// Same bands decided in integers for ma = sum / n: |n x - sum| against sum and sum / 2.
int classify_level_exact(Count observed, Wide sum, int n);

// Checks in order: all history missing, ma < th, within [lower, upper], signal.
KeyOutcome evaluate_key(Count observed, const RollingStats& stats, const ThresholdSet& ts,
                        BoundsMode mode);

struct OutcomeSummary {
  std::size_t keys = 0;
  std::array<std::size_t, 4> by_status{};  // indexed by OutcomeStatus
  std::array<std::size_t, 3> upper_by_level{};
  std::array<std::size_t, 3> lower_by_level{};

  std::size_t count(OutcomeStatus s) const { return by_status[static_cast<std::size_t>(s)]; }
  std::size_t upper_signals() const;
  std::size_t lower_signals() const;

  void add(const KeyOutcome& outcome);
  void merge(const OutcomeSummary& other);

  friend bool operator==(const OutcomeSummary&, const OutcomeSummary&) = default;
};

struct WindowReport {
  TimeWindow window;
  ThresholdSet thresholds;
  int available_history = 0;
  // Every outcome other than NoSignal, ordered by kind then labels.
  std::vector<KeyOutcome> outcomes;
  OutcomeSummary summary;
};

// Evaluation stage alone, over an already built series table.
WindowReport evaluate_series(const SeriesTable& table, const TimeWindow& window,
                             const ThresholdSet& thresholds, const DetectorConfig& config);

// threshold -> series table -> evaluation for one window.
WindowReport run_window(const SparseOdm& current, const HistorySlice& slice,
                        const DetectorConfig& config);

struct DayReport {
  std::string source_id;
  Date date{};
  DetectorConfig config;
  std::vector<InputDigest> inputs;
  std::vector<TimeWindow> missing_windows;
  std::vector<TimeWindow> extra_windows;
  std::vector<WindowReport> windows;
  OutcomeSummary summary;
  // No window present, or no window had any available history.
  bool fully_missing = true;
};

struct DetectOptions {
  // Expected schedule; when absent no missing/extra windows are reported.
  std::optional<SourceProfile> profile;
  // Called once per window in window order, before the report is stored.
  std::function<void(const DayReport&, const WindowReport&)> on_window;
  // When false, WindowReport::outcomes is cleared after on_window.
  bool keep_outcomes = true;
};

// Throws StoreError on store failures.
DayReport detect_day(const HistoryStore& store, std::string_view source_id, Date date,
                     const DetectorConfig& config, const DetectOptions& options = {});

}  // namespace odmwatch
