#include "odmwatch/odm.hpp"

#include <algorithm>

#include "odmwatch/errors.hpp"

namespace odmwatch {

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Cell: return "cell";
    case FlowKind::Inbound: return "inbound";
    case FlowKind::Outbound: return "outbound";
  }
  return "unknown";
}

std::string to_string(const FlowKey& key) {
  switch (key.kind) {
    case FlowKind::Cell: return "cell(" + key.origin + "," + key.destination + ")";
    case FlowKind::Inbound: return "inbound(" + key.destination + ")";
    case FlowKind::Outbound: return "outbound(" + key.origin + ")";
  }
  return "unknown";
}

namespace {

bool entry_less(const CellEntry& a, const CellEntry& b) {
  return a.origin != b.origin ? a.origin < b.origin : a.destination < b.destination;
}

}  // namespace

SparseOdm::SparseOdm(TimeWindow window, std::vector<LabeledCell> cells) : window_(window) {
  std::erase_if(cells, [](const LabeledCell& c) { return c.count == 0; });

  labels_.reserve(cells.size() * 2);
  for (const auto& c : cells) {
    labels_.push_back(c.origin);
    labels_.push_back(c.destination);
  }
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  labels_.shrink_to_fit();

  auto index_of = [this](const std::string& label) {
    return static_cast<AreaIndex>(std::lower_bound(labels_.begin(), labels_.end(), label) -
                                  labels_.begin());
  };
  entries_.reserve(cells.size());
  for (const auto& c : cells) {
    entries_.push_back({index_of(c.origin), index_of(c.destination), c.count});
  }
  std::sort(entries_.begin(), entries_.end(), entry_less);
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [](const CellEntry& a, const CellEntry& b) {
                                  return a.origin == b.origin && a.destination == b.destination;
                                });
  if (dup != entries_.end()) {
    throw IntegrityError("duplicate cell (" + labels_[dup->origin] + "," +
                         labels_[dup->destination] + ") in window " + to_string(window_));
  }
}

SparseOdm SparseOdm::from_sorted(TimeWindow window, std::vector<std::string> labels,
                                 std::vector<CellEntry> entries) {
  for (std::size_t k = 1; k < labels.size(); ++k) {
    if (!(labels[k - 1] < labels[k])) {
      throw IntegrityError("labels are not strictly increasing at position " + std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.origin >= labels.size() || e.destination >= labels.size()) {
      throw IntegrityError("entry references unknown label index");
    }
    if (k > 0 && !entry_less(entries[k - 1], e)) {
      throw IntegrityError("entries are not strictly increasing (duplicate or unsorted cell)");
    }
  }
  std::erase_if(entries, [](const CellEntry& e) { return e.count == 0; });

  std::vector<bool> used(labels.size(), false);
  for (const auto& e : entries) {
    used[e.origin] = true;
    used[e.destination] = true;
  }

  SparseOdm m(window);
  // Compaction keeps relative order, so entries stay sorted after the remap.
  std::vector<AreaIndex> remap(labels.size(), 0);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (used[k]) {
      remap[k] = static_cast<AreaIndex>(m.labels_.size());
      m.labels_.push_back(std::move(labels[k]));
    }
  }
  for (auto& e : entries) {
    e.origin = remap[e.origin];
    e.destination = remap[e.destination];
  }
  m.entries_ = std::move(entries);
  return m;
}

std::optional<AreaIndex> SparseOdm::find_area(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<AreaIndex>(it - labels_.begin());
}

Count SparseOdm::cell_value(std::string_view origin, std::string_view destination) const {
  const auto i = find_area(origin);
  const auto j = find_area(destination);
  if (!i || !j) return 0;
  const CellEntry probe{*i, *j, 0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, entry_less);
  if (it == entries_.end() || it->origin != *i || it->destination != *j) return 0;
  return it->count;
}

Count SparseOdm::inbound_excl_diag(std::string_view destination) const {
  const auto j = find_area(destination);
  if (!j) return 0;
  Count sum = 0;
  for (const auto& e : entries_) {
    if (e.destination == *j && e.origin != *j) sum += e.count;
  }
  return sum;
}

Count SparseOdm::outbound_excl_diag(std::string_view origin) const {
  const auto i = find_area(origin);
  if (!i) return 0;
  auto first = std::lower_bound(entries_.begin(), entries_.end(), CellEntry{*i, 0, 0}, entry_less);
  Count sum = 0;
  for (auto it = first; it != entries_.end() && it->origin == *i; ++it) {
    if (it->destination != *i) sum += it->count;
  }
  return sum;
}

Count SparseOdm::inbound_incl_diag(std::string_view destination) const {
  return inbound_excl_diag(destination) + cell_value(destination, destination);
}

Count SparseOdm::outbound_incl_diag(std::string_view origin) const {
  return outbound_excl_diag(origin) + cell_value(origin, origin);
}

std::vector<std::pair<FlowKey, Count>> SparseOdm::all_marginals_excl_diag() const {
  std::vector<Count> in(labels_.size(), 0), out(labels_.size(), 0);
  for (const auto& e : entries_) {
    if (e.origin == e.destination) continue;
    in[e.destination] += e.count;
    out[e.origin] += e.count;
  }
  std::vector<std::pair<FlowKey, Count>> result;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (in[k] > 0) result.emplace_back(FlowKey::inbound(labels_[k]), in[k]);
  }
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (out[k] > 0) result.emplace_back(FlowKey::outbound(labels_[k]), out[k]);
  }
  return result;
}

Count SparseOdm::mass() const noexcept {
  Count sum = 0;
  for (const auto& e : entries_) sum += e.count;
  return sum;
}

Count SparseOdm::diagonal_mass() const noexcept {
  Count sum = 0;
  for (const auto& e : entries_) {
    if (e.origin == e.destination) sum += e.count;
  }
  return sum;
}

std::vector<LabeledCell> SparseOdm::labeled_cells() const {
  std::vector<LabeledCell> cells;
  cells.reserve(entries_.size());
  for (const auto& e : entries_) {
    cells.push_back({labels_[e.origin], labels_[e.destination], e.count});
  }
  return cells;
}

}  // namespace odmwatch
