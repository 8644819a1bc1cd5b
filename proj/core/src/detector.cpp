#include "odmwatch/detector.hpp"

#include <cmath>
#include <map>

#include "odmwatch/parallel.hpp"

namespace odmwatch {

std::string_view to_string(OutcomeStatus status) {
  switch (status) {
    case OutcomeStatus::NoSignal: return "no_signal";
    case OutcomeStatus::Signal: return "signal";
    case OutcomeStatus::BelowEligibility: return "below_eligibility";
    case OutcomeStatus::MissingData: return "missing_data";
  }
  return "unknown";
}

std::string_view to_string(Direction direction) {
  return direction == Direction::Upper ? "upper" : "lower";
}

int classify_level(double inc_percent) {
  const double magnitude = std::fabs(inc_percent);
  if (magnitude < 50.0) return 1;
  if (magnitude < 100.0) return 2;
  return 3;
}

int classify_level_exact(Count observed, Wide sum, int n) {
  const Wide scaled = static_cast<Wide>(observed) * static_cast<Wide>(n);
  const Wide diff = scaled > sum ? scaled - sum : sum - scaled;
  if (diff >= sum) return 3;
  if (2 * diff >= sum) return 2;
  return 1;
}

namespace {

// Shared by evaluate_key and the table path; `key` is filled by the caller.
void evaluate_into(KeyOutcome& out, Count observed, double ma, double sd, int available,
                   const std::optional<Wide>& sum, const ThresholdSet& ts, BoundsMode mode) {
  out.observed = observed;
  if (available == 0) {
    out.status = OutcomeStatus::MissingData;
    return;
  }
  out.ma = ma;
  out.sd = sd;
  if (ma < static_cast<double>(ts.th)) {
    out.status = OutcomeStatus::BelowEligibility;
    return;
  }
  const auto bounds = compute_bounds(ma, sd, ts.t, mode);
  out.lower = bounds.lower;
  out.upper = bounds.upper;
  const auto x = static_cast<double>(observed);
  if (x >= bounds.lower && x <= bounds.upper) {
    out.status = OutcomeStatus::NoSignal;
    return;
  }
  Signal s;
  s.direction = x > bounds.upper ? Direction::Upper : Direction::Lower;
  s.inc_percent = ma > 0.0 ? (x / ma - 1.0) * 100.0 : std::numeric_limits<double>::infinity();
  s.level = sum ? classify_level_exact(observed, *sum, available) : classify_level(s.inc_percent);
  out.status = OutcomeStatus::Signal;
  out.signal = s;
}

}  // namespace

KeyOutcome evaluate_key(Count observed, const RollingStats& stats, const ThresholdSet& ts,
                        BoundsMode mode) {
  KeyOutcome out;
  out.key = stats.key;
  evaluate_into(out, observed, stats.ma, stats.sd, stats.available, stats.sum, ts, mode);
  return out;
}

std::size_t OutcomeSummary::upper_signals() const {
  return upper_by_level[0] + upper_by_level[1] + upper_by_level[2];
}

std::size_t OutcomeSummary::lower_signals() const {
  return lower_by_level[0] + lower_by_level[1] + lower_by_level[2];
}

void OutcomeSummary::add(const KeyOutcome& outcome) {
  ++keys;
  ++by_status[static_cast<std::size_t>(outcome.status)];
  if (outcome.signal) {
    auto& levels = outcome.signal->direction == Direction::Upper ? upper_by_level : lower_by_level;
    ++levels[static_cast<std::size_t>(outcome.signal->level - 1)];
  }
}

void OutcomeSummary::merge(const OutcomeSummary& other) {
  keys += other.keys;
  for (std::size_t k = 0; k < by_status.size(); ++k) by_status[k] += other.by_status[k];
  for (std::size_t k = 0; k < 3; ++k) {
    upper_by_level[k] += other.upper_by_level[k];
    lower_by_level[k] += other.lower_by_level[k];
  }
}

WindowReport evaluate_series(const SeriesTable& table, const TimeWindow& window,
                             const ThresholdSet& thresholds, const DetectorConfig& config) {
  WindowReport report;
  report.window = window;
  report.thresholds = thresholds;
  report.available_history = table.available();

  const unsigned workers = resolve_workers(config.workers);
  const std::size_t chunks = workers == 1 ? 1 : std::size_t{workers} * 4;
  // First pass classifies and remembers which keys are reported; the second
  // fills the exact-size outcome vector in place.
  struct Part {
    std::vector<std::size_t> reported;
    OutcomeSummary summary;
    std::size_t offset = 0;
  };
  auto evaluate = [&](KeyOutcome& out, std::size_t k) {
    evaluate_into(out, table.observed(k), table.ma(k), table.sd(k), table.available(), table.sums(k).sum,
                  thresholds, config.bounds_mode);
  };
  std::vector<Part> parts(std::max<std::size_t>(1, std::min(chunks, std::max<std::size_t>(table.size(), 1))));
  parallel_chunks(table.size(), parts.size(), workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    auto& part = parts[c];
    KeyOutcome scratch;
    for (std::size_t k = lo; k < hi; ++k) {
      scratch.signal.reset();
      scratch.ma = scratch.sd = scratch.lower = scratch.upper = std::numeric_limits<double>::quiet_NaN();
      evaluate(scratch, k);
      part.summary.add(scratch);
      if (scratch.status != OutcomeStatus::NoSignal) part.reported.push_back(k);
    }
  });

  std::size_t n = 0;
  for (auto& part : parts) {
    part.offset = n;
    n += part.reported.size();
    report.summary.merge(part.summary);
  }
  report.outcomes.resize(n);
  parallel_chunks(parts.size(), parts.size(), workers, [&](std::size_t c, std::size_t, std::size_t) {
    const auto& part = parts[c];
    for (std::size_t r = 0; r < part.reported.size(); ++r) {
      auto& out = report.outcomes[part.offset + r];
      const std::size_t k = part.reported[r];
      evaluate(out, k);
      out.key = table.flow_key(k);
    }
  });
  return report;
}

WindowReport run_window(const SparseOdm& current, const HistorySlice& slice, const DetectorConfig& config) {
  const auto thresholds = daily_quantile_threshold(current, config.th, config.quantile);
  const auto table = SeriesTable::build(current, slice, config.workers);
  return evaluate_series(table, current.window(), thresholds, config);
}

DayReport detect_day(const HistoryStore& store, std::string_view source_id, Date date,
                     const DetectorConfig& config, const DetectOptions& options) {
  if (config.p < 1) throw std::invalid_argument("p must be >= 1");

  DayReport day;
  day.source_id = std::string(source_id);
  day.date = date;
  day.config = config;

  const auto current = store.load_date(source_id, date);
  if (options.profile) {
    const auto validation = validate_day(current, *options.profile, date);
    day.missing_windows = validation.missing_windows;
    day.extra_windows = validation.extra_windows;
  }

  if (auto d = store.digest(source_id, date)) day.inputs.push_back(*d);
  std::map<TimeWindow, SnapshotPtr> history;
  if (!current.empty()) {
    for (const Date d : history_dates(date, config.p, config.stride)) {
      auto snapshots = store.load_date(source_id, d);
      if (snapshots.empty()) continue;
      if (auto digest = store.digest(source_id, d)) day.inputs.push_back(*digest);
      for (auto& m : snapshots) {
        const auto window = m.window();
        history.emplace(window, std::make_shared<const SparseOdm>(std::move(m)));
      }
    }
  }
  std::sort(day.inputs.begin(), day.inputs.end(),
            [](const InputDigest& a, const InputDigest& b) { return a.date > b.date; });

  bool any_history = false;
  for (const auto& m : current) {
    const auto slice = make_slice(m.window(), config.p, config.stride, [&](const TimeWindow& w) {
      auto it = history.find(w);
      return it == history.end() ? SnapshotPtr{} : it->second;
    });
    auto report = run_window(m, slice, config);
    any_history = any_history || report.available_history > 0;
    day.summary.merge(report.summary);
    if (options.on_window) options.on_window(day, report);
    if (!options.keep_outcomes) {
      report.outcomes.clear();
      report.outcomes.shrink_to_fit();
    }
    day.windows.push_back(std::move(report));
  }
  day.fully_missing = !any_history;
  return day;
}

}  // namespace odmwatch
