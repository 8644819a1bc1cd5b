#include "odmwatch/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace odmwatch {

std::string_view to_string(BoundsMode mode) {
  return mode == BoundsMode::Clamped ? "clamped" : "paper_literal";
}

std::optional<BoundsMode> parse_bounds_mode(std::string_view text) {
  if (text == "clamped") return BoundsMode::Clamped;
  if (text == "paper_literal") return BoundsMode::PaperLiteral;
  return std::nullopt;
}

namespace {

std::size_t nearest_rank(double q, std::size_t n) {
  // 0.7 * 10 evaluates to 7.000000000000001; do not let that become rank 8.
  const double scaled = q * static_cast<double>(n);
  auto rank = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * scaled));
  return std::clamp<std::size_t>(rank, 1, n);
}

}  // namespace

ThresholdSet quantile_threshold(std::span<const Count> values, Count th, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  ThresholdSet ts{th, q, static_cast<double>(th), 0, false};

  std::vector<Count> eligible;
  eligible.reserve(values.size());
  for (Count v : values) {
    if (v >= th) eligible.push_back(v);
  }
  ts.eligible_count = eligible.size();
  if (eligible.empty()) {
    ts.degenerate = true;
    return ts;
  }
  const auto nth = eligible.begin() + static_cast<std::ptrdiff_t>(nearest_rank(q, eligible.size()) - 1);
  std::nth_element(eligible.begin(), nth, eligible.end());
  ts.t = static_cast<double>(*nth);
  return ts;
}

ThresholdSet daily_quantile_threshold(const SparseOdm& current, Count th, double q) {
  std::vector<Count> values;
  values.reserve(current.nnz());
  for (const auto& e : current.entries()) values.push_back(e.count);
  return quantile_threshold(values, th, q);
}

BoundPair compute_bounds(double ma, double sd, double t, BoundsMode mode) {
  const double upper = ma + std::max(t, 3.0 * sd);
  const double spread_low = std::min(ma - t, ma - 3.0 * sd);
  const double lower = mode == BoundsMode::Clamped ? std::max(spread_low, 0.0) : std::min(spread_low, 0.0);
  return {lower, upper};
}

std::optional<Bounds> bounds_for(const RollingStats& stats, const ThresholdSet& ts, BoundsMode mode) {
  if (stats.all_missing()) return std::nullopt;
  const auto b = compute_bounds(stats.ma, stats.sd, ts.t, mode);
  return Bounds{stats.key, b.lower, b.upper, mode};
}

}  // namespace odmwatch
