#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odmwatch/odm.hpp"

namespace odmwatch {

enum class Stride { Daily, Weekly };

constexpr int stride_days(Stride stride) { return stride == Stride::Weekly ? 7 : 1; }
std::string_view to_string(Stride stride);
std::optional<Stride> parse_stride(std::string_view text);

using SnapshotPtr = std::shared_ptr<const SparseOdm>;

struct HistoryQuery {
  std::string source_id;
  TimeWindow window;
  int p = 4;
  Stride stride = Stride::Weekly;
};

// Exactly p slots, newest first. Slot k holds the snapshot for
// date - (k + 1) * stride_days with the same start/end, or nullptr (Missing).
struct HistorySlice {
  std::vector<SnapshotPtr> slots;

  std::size_t size() const noexcept { return slots.size(); }
  std::size_t available() const noexcept;
  bool all_missing() const noexcept { return available() == 0; }
};

// Dates whose windows feed a slice for `date`, newest first.
std::vector<Date> history_dates(Date date, int p, Stride stride);

// Slice for `window` assembled from a date -> snapshots lookup.
template <typename Lookup>
HistorySlice make_slice(const TimeWindow& window, int p, Stride stride, Lookup&& lookup) {
  HistorySlice slice;
  for (const Date d : history_dates(window.date(), p, stride)) {
    slice.slots.push_back(lookup(window.on(d)));
  }
  return slice;
}

struct InputDigest {
  Date date{};
  std::string sha256;
};

// File-backed snapshot history.
//
// Layout: <root>/<source_id>/<YYYY-MM-DD>.csv holds every window of that date
// in the ingestion CSV format; <YYYY-MM-DD>.index.json lists the windows with
// their entry counts and masses. Files are replaced atomically (write to a
// temporary, then rename), so readers see either the old or the new date file.
// Writes are serialized per store instance. Dates older than the newest stored
// date minus retention_days are pruned after each write.
class HistoryStore {
 public:
  explicit HistoryStore(std::filesystem::path root, int retention_days = 35);

  static int default_retention_days(int p, Stride stride);

  const std::filesystem::path& root() const noexcept { return root_; }
  int retention_days() const noexcept { return retention_days_; }

  // Replaces any stored snapshot with the same window (logged).
  void put_snapshot(std::string_view source_id, const SparseOdm& snapshot);

  // Batch form: one rewrite per date touched.
  void put_snapshots(std::string_view source_id, std::span<const SparseOdm> snapshots);

  // nullptr when absent.
  SnapshotPtr get_snapshot(std::string_view source_id, const TimeWindow& window) const;

  HistorySlice fetch_history(const HistoryQuery& query) const;

  // All windows stored for a date, ordered by window; empty when absent.
  std::vector<SparseOdm> load_date(std::string_view source_id, Date date) const;

  std::vector<TimeWindow> list_windows(std::string_view source_id, Date date) const;
  std::vector<Date> list_dates(std::string_view source_id) const;

  std::optional<InputDigest> digest(std::string_view source_id, Date date) const;

 private:
  std::filesystem::path source_dir(std::string_view source_id) const;
  std::filesystem::path date_file(std::string_view source_id, Date date) const;
  std::filesystem::path index_file(std::string_view source_id, Date date) const;
  void write_date(std::string_view source_id, Date date, std::vector<SparseOdm> snapshots);
  void prune(std::string_view source_id);

  std::filesystem::path root_;
  int retention_days_;
  std::mutex write_mutex_;
};

}  // namespace odmwatch
