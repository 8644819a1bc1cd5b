#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "odmwatch/odm.hpp"
#include "odmwatch/rolling_stats.hpp"

namespace odmwatch {

enum class BoundsMode {
  // lower = max(min(ma - t, ma - 3 sd), 0)
  Clamped,
  // lower = min(ma - t, ma - 3 sd, 0); never fires on count data
  PaperLiteral,
};

std::string_view to_string(BoundsMode mode);
std::optional<BoundsMode> parse_bounds_mode(std::string_view text);

struct ThresholdSet {
  Count th = 20;
  double q = 0.75;
  double t = 0.0;
  std::size_t eligible_count = 0;
  // No stored value reached th; t fell back to th.
  bool degenerate = false;
};

// Nearest-rank q-quantile (rank ceil(q * n), 1-based) of the values >= th.
// Throws std::invalid_argument unless 0 < q < 1.
ThresholdSet quantile_threshold(std::span<const Count> values, Count th, double q);

// quantile_threshold over the stored cells of the window's matrix.
ThresholdSet daily_quantile_threshold(const SparseOdm& current, Count th, double q);

struct BoundPair {
  double lower;
  double upper;
};

// upper = ma + max(t, 3 sd) in both modes.
BoundPair compute_bounds(double ma, double sd, double t, BoundsMode mode);

struct Bounds {
  FlowKey key;
  double lower = 0.0;
  double upper = 0.0;
  BoundsMode mode = BoundsMode::Clamped;
};

// std::nullopt when the stats have no available period: the key is missing data.
std::optional<Bounds> bounds_for(const RollingStats& stats, const ThresholdSet& ts, BoundsMode mode);

}  // namespace odmwatch
