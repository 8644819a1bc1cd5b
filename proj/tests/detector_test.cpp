#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "odmwatch/detector.hpp"
#include "trials.hpp"

namespace odmwatch {
namespace {

namespace fs = std::filesystem;
using std::chrono::days;
using std::chrono::seconds;

const Date kToday{std::chrono::year{2024} / 6 / 3};
const TimeWindow kWindow = TimeWindow::full_day(kToday);

RollingStats stats(double ma, double sd, int available = 4) {
  RollingStats s;
  s.key = FlowKey::cell("A", "B");
  s.ma = ma;
  s.sd = sd;
  s.available = available;
  return s;
}

ThresholdSet thresholds(double t, Count th = 20) {
  ThresholdSet ts;
  ts.th = th;
  ts.t = t;
  return ts;
}

TEST(ClassifyLevel, Bands) {
  EXPECT_EQ(classify_level(150), 3);
  EXPECT_EQ(classify_level(100), 3);
  EXPECT_EQ(classify_level(99.9), 2);
  EXPECT_EQ(classify_level(-60), 2);
  EXPECT_EQ(classify_level(50), 2);
  EXPECT_EQ(classify_level(49.9), 1);
  EXPECT_EQ(classify_level(-100), 3);
  EXPECT_EQ(classify_level(INFINITY), 3);
}

TEST(ClassifyLevel, ExactBandEdgesWithThirds) {
  // ma = 100 / 3: an observation of 50 is exactly +50 %.
  EXPECT_EQ(classify_level_exact(50, 100, 3), 2);
  EXPECT_EQ(classify_level_exact(49, 100, 3), 1);
  EXPECT_EQ(classify_level_exact(0, 100, 3), 3);
  EXPECT_EQ(classify_level_exact(17, 100, 3), 1);  // -49 %
  EXPECT_EQ(classify_level_exact(67, 100, 3), 3);  // 201 vs 100: +101 %
  EXPECT_EQ(classify_level_exact(5, 0, 4), 3);

  const std::vector<std::optional<Count>> history{30, 30, 40};
  const auto s = rolling_stats_of(FlowKey::cell("A", "B"), history);
  ThresholdSet ts;
  ts.t = 10;
  const auto o = evaluate_key(50, s, ts, BoundsMode::Clamped);
  ASSERT_EQ(o.status, OutcomeStatus::Signal);
  EXPECT_EQ(o.signal->level, 2);
}

TEST(EvaluateKey, UpperLevel3) {
  const auto o = evaluate_key(250, stats(100, 10), thresholds(60), BoundsMode::Clamped);
  ASSERT_EQ(o.status, OutcomeStatus::Signal);
  EXPECT_EQ(o.signal->direction, Direction::Upper);
  EXPECT_EQ(o.signal->level, 3);
  EXPECT_DOUBLE_EQ(o.signal->inc_percent, 150.0);
  EXPECT_EQ(o.upper, 160.0);
  EXPECT_EQ(o.lower, 40.0);
}

TEST(EvaluateKey, LowerLevel2) {
  const auto o = evaluate_key(10, stats(100, 10), thresholds(60), BoundsMode::Clamped);
  ASSERT_EQ(o.status, OutcomeStatus::Signal);
  EXPECT_EQ(o.signal->direction, Direction::Lower);
  EXPECT_EQ(o.signal->level, 2);
  EXPECT_DOUBLE_EQ(o.signal->inc_percent, -90.0);
}

TEST(EvaluateKey, UpperLevel2) {
  const auto o = evaluate_key(170, stats(100, 10), thresholds(60), BoundsMode::Clamped);
  ASSERT_EQ(o.status, OutcomeStatus::Signal);
  EXPECT_EQ(o.signal->level, 2);
  EXPECT_DOUBLE_EQ(o.signal->inc_percent, 70.0);
}

TEST(EvaluateKey, InsideBoundsIsQuiet) {
  for (Count x : {40u, 100u, 160u}) {
    const auto o = evaluate_key(x, stats(100, 10), thresholds(60), BoundsMode::Clamped);
    EXPECT_EQ(o.status, OutcomeStatus::NoSignal) << x;
    EXPECT_FALSE(o.signal);
  }
}

TEST(EvaluateKey, BelowEligibilityBeatsLargeDeviation) {
  const auto o = evaluate_key(500, stats(15, 2), thresholds(60), BoundsMode::Clamped);
  EXPECT_EQ(o.status, OutcomeStatus::BelowEligibility);
  EXPECT_EQ(o.ma, 15.0);
  EXPECT_TRUE(std::isnan(o.upper));
}

TEST(EvaluateKey, AllMissingIsMissingData) {
  RollingStats s;
  s.key = FlowKey::outbound("A");
  const auto o = evaluate_key(500, s, thresholds(60), BoundsMode::Clamped);
  EXPECT_EQ(o.status, OutcomeStatus::MissingData);
  EXPECT_EQ(o.observed, 500u);
  EXPECT_TRUE(std::isnan(o.ma));
}

TEST(EvaluateKey, NewFlowOverZeroAverageIsInfiniteIncrease) {
  const auto o = evaluate_key(30, stats(0, 0), thresholds(20, 0), BoundsMode::Clamped);
  ASSERT_EQ(o.status, OutcomeStatus::Signal);
  EXPECT_TRUE(std::isinf(o.signal->inc_percent));
  EXPECT_GT(o.signal->inc_percent, 0);
  EXPECT_EQ(o.signal->level, 3);
}

TEST(EvaluateKey, PaperLiteralNeverSignalsLow) {
  const auto o = evaluate_key(0, stats(100, 10), thresholds(60), BoundsMode::PaperLiteral);
  EXPECT_EQ(o.status, OutcomeStatus::NoSignal);
  EXPECT_EQ(o.lower, 0.0);
}

HistorySlice constant_history(const SparseOdm& m, int p) {
  HistorySlice s;
  for (int k = 1; k <= p; ++k) {
    s.slots.push_back(std::make_shared<const SparseOdm>(
        SparseOdm::from_sorted(m.window().on(kToday - days{7 * k}), {m.labels().begin(), m.labels().end()},
                               {m.entries().begin(), m.entries().end()})));
  }
  return s;
}

TEST(RunWindow, StableDayHasNoSignals) {
  const SparseOdm m(kWindow, {{"A", "B", 100}, {"B", "A", 80}, {"A", "C", 40}, {"C", "C", 300}});
  const auto r = run_window(m, constant_history(m, 4), {});
  EXPECT_EQ(r.summary.upper_signals() + r.summary.lower_signals(), 0u);
  EXPECT_EQ(r.available_history, 4);
  EXPECT_EQ(r.summary.keys, 4u + 3u + 3u);
}

TEST(RunWindow, SpikeFlagsCellAndItsMarginals) {
  const SparseOdm base(kWindow, {{"A", "B", 100}, {"B", "A", 80}, {"A", "C", 40}, {"C", "C", 50},
                                 {"B", "C", 30}, {"C", "A", 30}, {"C", "B", 60}});
  SparseOdm today(kWindow, {{"A", "B", 300}, {"B", "A", 80}, {"A", "C", 40}, {"C", "C", 50},
                            {"B", "C", 30}, {"C", "A", 30}, {"C", "B", 60}});
  const auto r = run_window(today, constant_history(base, 4), {});
  std::vector<FlowKey> flagged;
  for (const auto& o : r.outcomes) {
    if (o.status == OutcomeStatus::Signal) flagged.push_back(o.key);
  }
  EXPECT_EQ(flagged, (std::vector<FlowKey>{FlowKey::cell("A", "B"), FlowKey::inbound("B"), FlowKey::outbound("A")}));
  EXPECT_EQ(r.outcomes.front().signal->level, 3);
  EXPECT_DOUBLE_EQ(r.outcomes.front().signal->inc_percent, 200.0);
}

TEST(RunWindow, NoHistoryMeansEveryKeyMissing) {
  const SparseOdm m(kWindow, {{"A", "B", 100}});
  HistorySlice s{{nullptr, nullptr, nullptr, nullptr}};
  const auto r = run_window(m, s, {});
  EXPECT_EQ(r.summary.count(OutcomeStatus::MissingData), 3u);
  EXPECT_EQ(r.available_history, 0);
}

struct Trial {
  testing::DenseMatrix current;
  std::vector<std::optional<testing::DenseMatrix>> history;
  SparseOdm sparse;
  HistorySlice slice;
};

Trial random_trial(std::mt19937_64& rng) {
  Trial t;
  const auto labels = testing::random_labels(rng, 1 + rng() % 50);
  const auto base = testing::random_dense(rng, labels, 0.05 + (rng() % 50) / 100.0);
  t.current = testing::perturb(rng, base, 0.15);
  // Occasional strong outliers so that signals of every level occur.
  for (auto& row : t.current.values) {
    for (auto& v : row) {
      if (rng() % 25 == 0) v = v * (1 + rng() % 5);
      if (rng() % 40 == 0) v = 0;
    }
  }
  t.sparse = t.current.to_sparse(kWindow);
  const int p = 1 + static_cast<int>(rng() % 4);
  for (int k = 1; k <= p; ++k) {
    if (rng() % 5 == 0) {
      t.history.emplace_back();
      t.slice.slots.push_back(nullptr);
    } else {
      auto h = testing::perturb(rng, base, 0.1);
      t.slice.slots.push_back(std::make_shared<const SparseOdm>(h.to_sparse(kWindow.on(kToday - days{7 * k}))));
      t.history.push_back(std::move(h));
    }
  }
  return t;
}

TEST(DetectorProperty, MatchesDenseOracle) {
  std::mt19937_64 rng(2024);
  const std::array<testing::Fraction, 3> qs{{{3, 4}, {1, 2}, {9, 10}}};
  for (int trial = 0; trial < 150; ++trial) {
    const auto t = random_trial(rng);
    DetectorConfig config;
    config.th = std::array<Count, 3>{20, 0, 50}[trial % 3];
    const auto q = qs[(trial / 3) % 3];
    config.quantile = q.value();
    config.bounds_mode = trial % 2 ? BoundsMode::PaperLiteral : BoundsMode::Clamped;
    config.workers = 1 + trial % 4;
    const auto report = run_window(t.sparse, t.slice, config);
    double oracle_t = 0;
    const auto oracle = testing::dense_window(t.current, t.history, {config.th, q, config.bounds_mode}, &oracle_t);
    const auto issues = testing::compare_with_oracle(report, oracle, oracle_t);
    ASSERT_TRUE(issues.empty()) << "trial " << trial << ": " << issues.front();
  }
}

TEST(DetectorProperty, SignalInvariants) {
  std::mt19937_64 rng(77);
  std::size_t lower_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const auto t = random_trial(rng);
    for (auto mode : {BoundsMode::Clamped, BoundsMode::PaperLiteral}) {
      DetectorConfig config;
      config.bounds_mode = mode;
      const auto r = run_window(t.sparse, t.slice, config);
      for (const auto& o : r.outcomes) {
        if (o.status != OutcomeStatus::Signal) continue;
        const auto& s = *o.signal;
        EXPECT_EQ(s.level, classify_level(s.inc_percent));
        EXPECT_GE(o.ma, static_cast<double>(config.th));
        if (s.direction == Direction::Lower) {
          ++lower_seen;
          EXPECT_EQ(mode, BoundsMode::Clamped);
          EXPECT_GE(s.inc_percent, -100.0);
          EXPECT_LT(s.inc_percent, 0.0);
          EXPECT_EQ(s.level == 3, o.observed == 0);
          EXPECT_LT(static_cast<double>(o.observed), o.lower);
        } else {
          EXPECT_GT(s.inc_percent, 0.0);
          EXPECT_GT(static_cast<double>(o.observed), o.upper);
        }
      }
    }
  }
  EXPECT_GT(lower_seen, 0u);
}

testing::DenseMatrix scaled(const testing::DenseMatrix& m, Count c) {
  auto s = m;
  for (auto& row : s.values) {
    for (auto& v : row) v *= c;
  }
  return s;
}

TEST(DetectorProperty, ScaleEquivariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const auto t = random_trial(rng);
    const Count c = 4;
    HistorySlice slice;
    for (std::size_t k = 0; k < t.history.size(); ++k) {
      slice.slots.push_back(t.history[k] ? std::make_shared<const SparseOdm>(scaled(*t.history[k], c).to_sparse(
                                               t.slice.slots[k]->window()))
                                         : nullptr);
    }
    DetectorConfig config;
    const auto a = run_window(t.sparse, t.slice, config);
    config.th *= c;
    const auto b = run_window(scaled(t.current, c).to_sparse(kWindow), slice, config);
    EXPECT_EQ(a.summary, b.summary);
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    EXPECT_EQ(b.thresholds.t, c * a.thresholds.t);
    for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
      EXPECT_EQ(a.outcomes[k].key, b.outcomes[k].key);
      EXPECT_EQ(a.outcomes[k].status, b.outcomes[k].status);
      if (a.outcomes[k].signal) {
        EXPECT_EQ(a.outcomes[k].signal->level, b.outcomes[k].signal->level);
        EXPECT_DOUBLE_EQ(a.outcomes[k].signal->inc_percent, b.outcomes[k].signal->inc_percent);
      }
    }
  }
}

TEST(DetectorProperty, WorkerCountDoesNotChangeOutcomes) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_trial(rng);
    DetectorConfig one, many;
    many.workers = 8;
    const auto a = run_window(t.sparse, t.slice, one);
    const auto b = run_window(t.sparse, t.slice, many);
    EXPECT_EQ(a.summary, b.summary);
    ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
    for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
      EXPECT_EQ(a.outcomes[k].key, b.outcomes[k].key);
      EXPECT_EQ(a.outcomes[k].status, b.outcomes[k].status);
    }
  }
}

class DetectDayTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("odmwatch_detector_" + std::string(::testing::UnitTest::GetInstance()
                                                                                ->current_test_info()
                                                                                ->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

// A<->B carry v; a quiet block of small constant flows among C..F keeps t low.
std::vector<LabeledCell> day_cells(Count v) {
  std::vector<LabeledCell> cells{{"A", "B", v}, {"B", "A", v / 2}};
  for (const auto& [o, d] : std::vector<std::pair<std::string, std::string>>{
           {"C", "D"}, {"D", "C"}, {"C", "E"}, {"E", "C"}, {"D", "E"}, {"E", "D"}, {"C", "F"}, {"F", "C"}}) {
    cells.push_back({o, d, 30});
  }
  return cells;
}

std::vector<SparseOdm> hourly_day(Date d, Count v) {
  std::vector<SparseOdm> out;
  for (int h = 0; h < 24; ++h) {
    out.emplace_back(TimeWindow(d, seconds{3600 * h}, seconds{3600 * h + 3599}), day_cells(v));
  }
  out.emplace_back(TimeWindow::full_day(d), day_cells(24 * v));
  return out;
}

TEST_F(DetectDayTest, TwentyFiveWindowsWithWeeklyHistory) {
  HistoryStore store(root_);
  for (int k = 0; k <= 4; ++k) store.put_snapshots("s", hourly_day(kToday - days{7 * k}, k == 0 ? 400 : 100));
  DetectOptions options;
  options.profile = SourceProfile{"s", 25, true, true};
  std::size_t calls = 0;
  options.on_window = [&](const DayReport&, const WindowReport&) { ++calls; };
  const auto day = detect_day(store, "s", kToday, {}, options);
  EXPECT_EQ(calls, 25u);
  ASSERT_EQ(day.windows.size(), 25u);
  EXPECT_FALSE(day.fully_missing);
  EXPECT_TRUE(day.missing_windows.empty());
  ASSERT_EQ(day.inputs.size(), 5u);
  EXPECT_EQ(day.inputs.front().date, kToday);
  // Each window: cell A->B, cell B->A, inbound/outbound of A and B, all upper level 3.
  EXPECT_EQ(day.summary.upper_by_level[2], 25u * 6u);
  for (std::size_t w = 1; w < day.windows.size(); ++w) EXPECT_LT(day.windows[w - 1].window, day.windows[w].window);
}

TEST_F(DetectDayTest, MissingWindowsAreReportedAndDateWithoutHistoryIsFullyMissing) {
  HistoryStore store(root_);
  auto today = hourly_day(kToday, 100);
  today.erase(today.begin() + 5);
  store.put_snapshots("s", today);
  DetectOptions options;
  options.profile = SourceProfile{"s", 25, true, true};
  const auto day = detect_day(store, "s", kToday, {}, options);
  EXPECT_EQ(day.windows.size(), 24u);
  ASSERT_EQ(day.missing_windows.size(), 1u);
  EXPECT_EQ(day.missing_windows[0].start(), seconds{5 * 3600});
  EXPECT_TRUE(day.fully_missing);
  EXPECT_EQ(day.summary.count(OutcomeStatus::MissingData), day.summary.keys);

  const auto absent = detect_day(store, "s", kToday + days{1}, {}, options);
  EXPECT_TRUE(absent.windows.empty());
  EXPECT_TRUE(absent.fully_missing);
}

}  // namespace
}  // namespace odmwatch
