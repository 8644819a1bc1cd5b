#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "odmwatch/errors.hpp"
#include "odmwatch/history_store.hpp"
#include "trials.hpp"

namespace odmwatch {
namespace {

namespace fs = std::filesystem;
using std::chrono::days;

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("odmwatch_store_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path root_;
};

const Date kMonday{std::chrono::year{2024} / 4 / 29};

SparseOdm day_matrix(Date d, Count v) {
  return SparseOdm(TimeWindow::full_day(d), {{"A", "B", v}, {"B", "B", v + 1}});
}

TEST_F(StoreTest, PutThenGetRoundTrips) {
  HistoryStore store(root_);
  const auto m = day_matrix(kMonday, 120);
  store.put_snapshot("src", m);
  const auto got = store.get_snapshot("src", m.window());
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, m);
  EXPECT_EQ(store.list_windows("src", kMonday), std::vector<TimeWindow>{m.window()});
}

TEST_F(StoreTest, SecondPutReplacesFirst) {
  HistoryStore store(root_);
  store.put_snapshot("src", day_matrix(kMonday, 1));
  store.put_snapshot("src", day_matrix(kMonday, 2));
  EXPECT_EQ(*store.get_snapshot("src", TimeWindow::full_day(kMonday)), day_matrix(kMonday, 2));
}

TEST_F(StoreTest, EmptySnapshotIsAvailableNotMissing) {
  HistoryStore store(root_);
  const SparseOdm empty(TimeWindow(kMonday, std::chrono::hours{1}, std::chrono::seconds{7199}));
  store.put_snapshots("src", std::vector<SparseOdm>{empty, day_matrix(kMonday, 50)});
  const auto got = store.get_snapshot("src", empty.window());
  ASSERT_TRUE(got);
  EXPECT_TRUE(got->empty());
  EXPECT_EQ(store.load_date("src", kMonday).size(), 2u);
}

TEST_F(StoreTest, UnknownKeyIsMissing) {
  HistoryStore store(root_);
  EXPECT_EQ(store.get_snapshot("src", TimeWindow::full_day(kMonday)), nullptr);
  store.put_snapshot("src", day_matrix(kMonday, 1));
  const TimeWindow morning(kMonday, std::chrono::seconds{0}, std::chrono::seconds{3599});
  EXPECT_EQ(store.get_snapshot("src", morning), nullptr);
  EXPECT_EQ(store.get_snapshot("other", TimeWindow::full_day(kMonday)), nullptr);
}

TEST_F(StoreTest, WindowsOfOneDateShareAFile) {
  HistoryStore store(root_);
  const TimeWindow am(kMonday, std::chrono::seconds{0}, std::chrono::seconds{43199});
  const TimeWindow pm(kMonday, std::chrono::seconds{43200}, std::chrono::seconds{86399});
  store.put_snapshot("src", SparseOdm(pm, {{"A", "B", 2}}));
  store.put_snapshot("src", SparseOdm(am, {{"A", "B", 1}}));
  EXPECT_EQ(store.load_date("src", kMonday).size(), 2u);
  EXPECT_EQ(store.list_windows("src", kMonday), (std::vector<TimeWindow>{am, pm}));
  EXPECT_TRUE(fs::exists(root_ / "src" / "2024-04-29.csv"));
  EXPECT_TRUE(fs::exists(root_ / "src" / "2024-04-29.index.json"));
}

TEST_F(StoreTest, WeeklyHistoryWithAllPeriodsStored) {
  HistoryStore store(root_);
  for (int k = 1; k <= 4; ++k) store.put_snapshot("src", day_matrix(kMonday - days{7 * k}, 100 + k));
  store.put_snapshot("src", day_matrix(kMonday - days{1}, 999));  // same week, different weekday
  const auto slice = store.fetch_history({"src", TimeWindow::full_day(kMonday), 4, Stride::Weekly});
  ASSERT_EQ(slice.size(), 4u);
  EXPECT_EQ(slice.available(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(slice.slots[k]->window().date(), kMonday - days{7 * static_cast<int>(k + 1)});
    EXPECT_EQ(std::chrono::weekday{slice.slots[k]->window().date()}, std::chrono::Monday);
    EXPECT_EQ(slice.slots[k]->cell_value("A", "B"), 101 + k);
  }
}

TEST_F(StoreTest, PartialHistoryYieldsMissingSlots) {
  HistoryStore store(root_);
  store.put_snapshot("src", day_matrix(kMonday - days{7}, 1));
  store.put_snapshot("src", day_matrix(kMonday - days{21}, 3));
  const auto slice = store.fetch_history({"src", TimeWindow::full_day(kMonday), 4, Stride::Weekly});
  ASSERT_EQ(slice.size(), 4u);
  EXPECT_EQ(slice.available(), 2u);
  EXPECT_TRUE(slice.slots[0] && !slice.slots[1] && slice.slots[2] && !slice.slots[3]);
}

TEST_F(StoreTest, EmptyHistoryIsAllMissing) {
  HistoryStore store(root_);
  const auto slice = store.fetch_history({"src", TimeWindow::full_day(kMonday), 4, Stride::Weekly});
  EXPECT_EQ(slice.size(), 4u);
  EXPECT_TRUE(slice.all_missing());
}

TEST_F(StoreTest, DailyStrideUsesConsecutiveDates) {
  HistoryStore store(root_);
  for (int k = 1; k <= 3; ++k) store.put_snapshot("src", day_matrix(kMonday - days{k}, k));
  const auto slice = store.fetch_history({"src", TimeWindow::full_day(kMonday), 3, Stride::Daily});
  ASSERT_EQ(slice.available(), 3u);
  EXPECT_EQ(slice.slots[2]->window().date(), kMonday - days{3});
}

TEST_F(StoreTest, PrunesBeyondRetention) {
  HistoryStore store(root_, 10);
  store.put_snapshot("src", day_matrix(kMonday - days{30}, 1));
  store.put_snapshot("src", day_matrix(kMonday - days{10}, 1));
  store.put_snapshot("src", day_matrix(kMonday, 1));
  EXPECT_EQ(store.list_dates("src"), (std::vector<Date>{kMonday - days{10}, kMonday}));
  EXPECT_EQ(HistoryStore::default_retention_days(4, Stride::Weekly), 35);
  EXPECT_EQ(HistoryStore::default_retention_days(8, Stride::Weekly), 56);
}

TEST_F(StoreTest, RejectsPathLikeSourceIds) {
  HistoryStore store(root_);
  EXPECT_THROW(store.put_snapshot("../x", day_matrix(kMonday, 1)), StoreError);
  EXPECT_THROW(store.put_snapshot("", day_matrix(kMonday, 1)), StoreError);
}

TEST_F(StoreTest, DigestTracksContent) {
  HistoryStore store(root_);
  EXPECT_FALSE(store.digest("src", kMonday));
  store.put_snapshot("src", day_matrix(kMonday, 1));
  const auto first = store.digest("src", kMonday);
  store.put_snapshot("src", day_matrix(kMonday, 2));
  ASSERT_TRUE(first);
  EXPECT_EQ(first->sha256.size(), 64u);
  EXPECT_NE(first->sha256, store.digest("src", kMonday)->sha256);
}

// Every slice has exactly p slots, integer fidelity survives the disk, and
// weekly slices never mix weekdays.
TEST_F(StoreTest, PropertySliceShapeAndFidelity) {
  HistoryStore store(root_, 400);
  std::mt19937_64 rng(3);
  const auto labels = testing::random_labels(rng, 12);
  std::map<Date, SparseOdm> stored;
  for (int k = 0; k < 60; ++k) {
    if (rng() % 3 == 0) continue;
    const Date d = kMonday - days{k};
    auto dense = testing::random_dense(rng, labels, 0.4);
    dense.values[0][1] = (Count{1} << 50) + static_cast<Count>(k);
    auto m = dense.to_sparse(TimeWindow::full_day(d));
    store.put_snapshot("src", m);
    stored.emplace(d, std::move(m));
  }
  for (int p = 1; p <= 6; ++p) {
    for (Stride stride : {Stride::Daily, Stride::Weekly}) {
      const Date target = kMonday - days{static_cast<int>(rng() % 5)};
      const auto slice = store.fetch_history({"src", TimeWindow::full_day(target), p, stride});
      ASSERT_EQ(slice.size(), static_cast<std::size_t>(p));
      for (int k = 0; k < p; ++k) {
        const Date expected = target - days{(k + 1) * stride_days(stride)};
        const auto it = stored.find(expected);
        if (it == stored.end()) {
          EXPECT_EQ(slice.slots[k], nullptr);
          continue;
        }
        ASSERT_NE(slice.slots[k], nullptr);
        EXPECT_EQ(*slice.slots[k], it->second);
        if (stride == Stride::Weekly) {
          EXPECT_EQ(std::chrono::weekday{slice.slots[k]->window().date()}, std::chrono::weekday{target});
        }
      }
    }
  }
}

}  // namespace
}  // namespace odmwatch
