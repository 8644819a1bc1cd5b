#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "odmwatch/time_window.hpp"

namespace odmwatch {

using Count = std::uint64_t;
using AreaId = std::string;
using AreaIndex = std::uint32_t;

// Declaration order is the report ordering: cells, then inbound, then outbound.
enum class FlowKind : std::uint8_t { Cell, Inbound, Outbound };

std::string_view to_string(FlowKind kind);

// One monitored series. Marginal kinds leave the unused side empty and always
// denote diagonal-excluded sums.
struct FlowKey {
  FlowKind kind = FlowKind::Cell;
  AreaId origin;
  AreaId destination;

  static FlowKey cell(AreaId origin, AreaId destination) {
    return {FlowKind::Cell, std::move(origin), std::move(destination)};
  }
  static FlowKey inbound(AreaId destination) {
    return {FlowKind::Inbound, {}, std::move(destination)};
  }
  static FlowKey outbound(AreaId origin) { return {FlowKind::Outbound, std::move(origin), {}}; }

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
  friend bool operator==(const FlowKey&, const FlowKey&) = default;
};

std::string to_string(const FlowKey& key);

struct CellEntry {
  AreaIndex origin;
  AreaIndex destination;
  Count count;

  friend bool operator==(const CellEntry&, const CellEntry&) = default;
};

struct LabeledCell {
  AreaId origin;
  AreaId destination;
  Count count;
};

// Immutable sparse ODM snapshot for one time window.
//
// Storage is canonical: labels() is the sorted set of areas that occur in at
// least one stored entry, entries() are sorted by (origin, destination) label
// order and hold strictly positive counts. Two matrices with the same cells
// therefore compare equal regardless of how they were built.
class SparseOdm {
 public:
  SparseOdm() = default;
  explicit SparseOdm(TimeWindow window) : window_(window) {}

  // Zero counts are dropped. Throws IntegrityError on a repeated (origin, destination).
  SparseOdm(TimeWindow window, std::vector<LabeledCell> cells);

  // Index-based construction for bulk producers. `labels` must be strictly
  // increasing and `entries` strictly increasing by (origin, destination);
  // unused labels and zero entries are compacted away. Throws IntegrityError
  // when the ordering contract is violated.
  static SparseOdm from_sorted(TimeWindow window, std::vector<std::string> labels,
                               std::vector<CellEntry> entries);

  const TimeWindow& window() const noexcept { return window_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  std::span<const CellEntry> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::optional<AreaIndex> find_area(std::string_view label) const;

  Count cell_value(std::string_view origin, std::string_view destination) const;

  Count inbound_excl_diag(std::string_view destination) const;
  Count outbound_excl_diag(std::string_view origin) const;
  Count inbound_incl_diag(std::string_view destination) const;
  Count outbound_incl_diag(std::string_view origin) const;

  // Every non-zero diagonal-excluded marginal, inbound first, each group in
  // label order.
  std::vector<std::pair<FlowKey, Count>> all_marginals_excl_diag() const;

  Count mass() const noexcept;
  Count diagonal_mass() const noexcept;

  std::vector<LabeledCell> labeled_cells() const;

  friend bool operator==(const SparseOdm&, const SparseOdm&) = default;

 private:
  TimeWindow window_;
  std::vector<std::string> labels_;
  std::vector<CellEntry> entries_;
};

}  // namespace odmwatch
