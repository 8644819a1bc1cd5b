#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odmwatch/history_store.hpp"
#include "odmwatch/odm.hpp"

namespace odmwatch {

__extension__ using Wide = unsigned __int128;

// Exact first and second moment sums of a series over its available periods.
struct MomentSums {
  Wide sum = 0;
  Wide sum_sq = 0;

  void add(Count x) {
    sum += x;
    sum_sq += static_cast<Wide>(x) * x;
  }
};

// ma = sum / n; sd = sqrt(max(0, sum_sq / n - ma^2)). NaN when n == 0.
double moving_average(const MomentSums& m, int n);
double rolling_sd(const MomentSums& m, int n);

struct RollingStats {
  FlowKey key;
  double ma = 0.0;
  double sd = 0.0;
  int available = 0;
  // Exact history sum; lets the level band be decided without rounding.
  std::optional<Wide> sum;

  bool all_missing() const noexcept { return available == 0; }
};

// Stats of one series; std::nullopt entries are Missing periods.
RollingStats rolling_stats_of(FlowKey key, std::span<const std::optional<Count>> history);

// Union of cells stored in the current matrix or any available history
// matrix, plus Outbound(i) for every area seen as an origin and Inbound(j) for
// every area seen as a destination. Ordered cells, inbound, outbound; each
// group by label.
std::vector<FlowKey> key_universe(const SparseOdm& current, const HistorySlice& slice);

// Per-key lookups against the slice. A key absent from an available snapshot
// counts as 0; Missing snapshots are excluded from n.
std::vector<RollingStats> rolling_stats_for_keys(const HistorySlice& slice,
                                                 std::span<const FlowKey> keys);

struct SeriesKey {
  FlowKind kind;
  AreaIndex origin;       // unused for Inbound
  AreaIndex destination;  // unused for Outbound
};

// Every series of key_universe(current, slice) with its observed value and
// history moment sums, computed in a single merge over the sparse matrices.
// All matrices are re-indexed onto one shared sorted label table; the map is
// monotone, so each entry list stays sorted and the merge is linear.
class SeriesTable {
 public:
  // workers = 0 uses the hardware concurrency. Output does not depend on it.
  static SeriesTable build(const SparseOdm& current, const HistorySlice& slice, unsigned workers = 1);

  std::span<const std::string> labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return keys_.size(); }
  int available() const noexcept { return available_; }

  const SeriesKey& key(std::size_t k) const { return keys_[k]; }
  Count observed(std::size_t k) const { return observed_[k]; }
  const MomentSums& sums(std::size_t k) const { return sums_[k]; }
  double ma(std::size_t k) const { return moving_average(sums_[k], available_); }
  double sd(std::size_t k) const { return rolling_sd(sums_[k], available_); }

  FlowKey flow_key(std::size_t k) const;
  RollingStats stats(std::size_t k) const;

 private:
  std::vector<std::string> labels_;
  std::vector<SeriesKey> keys_;
  std::vector<Count> observed_;
  std::vector<MomentSums> sums_;
  int available_ = 0;
};

}  // namespace odmwatch
