#include "odmwatch/rolling_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "odmwatch/parallel.hpp"

namespace odmwatch {

namespace {

constexpr Wide kExactLimit = Wide{1} << 40;

}  // namespace

double moving_average(const MomentSums& m, int n) {
  if (n <= 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(m.sum) / n;
}

double rolling_sd(const MomentSums& m, int n) {
  if (n <= 0) return std::numeric_limits<double>::quiet_NaN();
  if (m.sum < kExactLimit && n < (1 << 20)) {
    // n * sum_sq - sum^2 >= 0 by Cauchy-Schwarz, exact in 128 bits here.
    const Wide numer = static_cast<Wide>(n) * m.sum_sq - m.sum * m.sum;
    return std::sqrt(static_cast<double>(numer)) / n;
  }
  const long double mean = static_cast<long double>(m.sum) / n;
  const long double var = static_cast<long double>(m.sum_sq) / n - mean * mean;
  return static_cast<double>(std::sqrt(std::max(var, 0.0L)));
}

RollingStats rolling_stats_of(FlowKey key, std::span<const std::optional<Count>> history) {
  MomentSums sums;
  int n = 0;
  for (const auto& v : history) {
    if (!v) continue;
    sums.add(*v);
    ++n;
  }
  return {std::move(key), moving_average(sums, n), rolling_sd(sums, n), n, sums.sum};
}

std::vector<FlowKey> key_universe(const SparseOdm& current, const HistorySlice& slice) {
  std::set<FlowKey> cells;
  std::set<AreaId> origins, destinations;
  auto absorb = [&](const SparseOdm& m) {
    const auto labels = m.labels();
    for (const auto& e : m.entries()) {
      cells.insert(FlowKey::cell(labels[e.origin], labels[e.destination]));
      origins.insert(labels[e.origin]);
      destinations.insert(labels[e.destination]);
    }
  };
  absorb(current);
  for (const auto& s : slice.slots) {
    if (s) absorb(*s);
  }
  std::vector<FlowKey> keys(cells.begin(), cells.end());
  for (const auto& j : destinations) keys.push_back(FlowKey::inbound(j));
  for (const auto& i : origins) keys.push_back(FlowKey::outbound(i));
  return keys;
}

std::vector<RollingStats> rolling_stats_for_keys(const HistorySlice& slice,
                                                 std::span<const FlowKey> keys) {
  std::vector<RollingStats> out;
  out.reserve(keys.size());
  std::vector<std::optional<Count>> history(slice.size());
  for (const auto& key : keys) {
    for (std::size_t k = 0; k < slice.size(); ++k) {
      const auto& m = slice.slots[k];
      if (!m) {
        history[k].reset();
        continue;
      }
      switch (key.kind) {
        case FlowKind::Cell: history[k] = m->cell_value(key.origin, key.destination); break;
        case FlowKind::Inbound: history[k] = m->inbound_excl_diag(key.destination); break;
        case FlowKind::Outbound: history[k] = m->outbound_excl_diag(key.origin); break;
      }
    }
    out.push_back(rolling_stats_of(key, history));
  }
  return out;
}

FlowKey SeriesTable::flow_key(std::size_t k) const {
  const auto& key = keys_[k];
  switch (key.kind) {
    case FlowKind::Cell: return FlowKey::cell(labels_[key.origin], labels_[key.destination]);
    case FlowKind::Inbound: return FlowKey::inbound(labels_[key.destination]);
    case FlowKind::Outbound: return FlowKey::outbound(labels_[key.origin]);
  }
  return {};
}

RollingStats SeriesTable::stats(std::size_t k) const {
  return {flow_key(k), ma(k), sd(k), available_, sums(k).sum};
}

namespace {

// One matrix re-expressed on the shared label table.
struct AlignedMatrix {
  std::vector<std::uint64_t> packed;  // (origin << 32) | destination, sorted
  std::span<const CellEntry> entries;
};

std::uint64_t pack(AreaIndex o, AreaIndex d) {
  return (static_cast<std::uint64_t>(o) << 32) | d;
}

}  // namespace

SeriesTable SeriesTable::build(const SparseOdm& current, const HistorySlice& slice, unsigned workers) {
  std::vector<const SparseOdm*> mats{&current};
  for (const auto& s : slice.slots) {
    if (s) mats.push_back(s.get());
  }

  SeriesTable table;
  table.available_ = static_cast<int>(mats.size() - 1);

  for (const SparseOdm* m : mats) {
    std::vector<std::string> merged;
    merged.reserve(table.labels_.size() + m->labels().size());
    std::set_union(table.labels_.begin(), table.labels_.end(), m->labels().begin(),
                   m->labels().end(), std::back_inserter(merged));
    table.labels_ = std::move(merged);
  }
  const std::size_t n_labels = table.labels_.size();

  std::vector<AlignedMatrix> aligned(mats.size());
  for (std::size_t m = 0; m < mats.size(); ++m) {
    const auto local = mats[m]->labels();
    std::vector<AreaIndex> remap(local.size());
    std::size_t pos = 0;
    for (std::size_t k = 0; k < local.size(); ++k) {
      while (table.labels_[pos] != local[k]) ++pos;
      remap[k] = static_cast<AreaIndex>(pos);
    }
    aligned[m].entries = mats[m]->entries();
    aligned[m].packed.reserve(aligned[m].entries.size());
    for (const auto& e : aligned[m].entries) {
      aligned[m].packed.push_back(pack(remap[e.origin], remap[e.destination]));
    }
  }

  // Cells: k-way merge, partitioned by origin ranges so chunks are independent.
  const unsigned nworkers = resolve_workers(workers);
  const std::size_t chunks = nworkers == 1 ? 1 : std::size_t{nworkers} * 4;
  struct ChunkOut {
    std::vector<SeriesKey> keys;
    std::vector<Count> observed;
    std::vector<MomentSums> sums;
  };
  std::vector<ChunkOut> parts(std::max<std::size_t>(1, std::min(chunks, std::max<std::size_t>(n_labels, 1))));
  parallel_chunks(n_labels, parts.size(), nworkers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    const std::size_t nm = aligned.size();
    std::vector<std::size_t> pos(nm), end(nm);
    for (std::size_t m = 0; m < nm; ++m) {
      const auto& p = aligned[m].packed;
      pos[m] = static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), pack(static_cast<AreaIndex>(lo), 0)) - p.begin());
      end[m] = hi >= n_labels ? p.size()
                              : static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), pack(static_cast<AreaIndex>(hi), 0)) - p.begin());
    }
    auto& out = parts[c];
    for (;;) {
      std::uint64_t next = std::numeric_limits<std::uint64_t>::max();
      for (std::size_t m = 0; m < nm; ++m) {
        if (pos[m] < end[m]) next = std::min(next, aligned[m].packed[pos[m]]);
      }
      if (next == std::numeric_limits<std::uint64_t>::max()) break;
      Count observed = 0;
      MomentSums sums;
      for (std::size_t m = 0; m < nm; ++m) {
        if (pos[m] < end[m] && aligned[m].packed[pos[m]] == next) {
          const Count v = aligned[m].entries[pos[m]].count;
          if (m == 0) {
            observed = v;
          } else {
            sums.add(v);
          }
          ++pos[m];
        }
      }
      // Snapshots lacking the cell contribute explicit zeros: nothing to add.
      out.keys.push_back({FlowKind::Cell, static_cast<AreaIndex>(next >> 32),
                          static_cast<AreaIndex>(next & 0xFFFFFFFFu)});
      out.observed.push_back(observed);
      out.sums.push_back(sums);
    }
  });

  std::size_t n_cells = 0;
  for (const auto& part : parts) n_cells += part.keys.size();

  // Marginals, diagonal excluded.
  std::vector<Count> in_obs(n_labels, 0), out_obs(n_labels, 0);
  std::vector<MomentSums> in_sums(n_labels), out_sums(n_labels);
  std::vector<char> is_origin(n_labels, 0), is_destination(n_labels, 0);
  std::vector<Count> in_m(n_labels), out_m(n_labels);
  for (std::size_t m = 0; m < aligned.size(); ++m) {
    std::fill(in_m.begin(), in_m.end(), 0);
    std::fill(out_m.begin(), out_m.end(), 0);
    const auto& packed = aligned[m].packed;
    const auto entries = aligned[m].entries;
    for (std::size_t k = 0; k < packed.size(); ++k) {
      const auto o = static_cast<AreaIndex>(packed[k] >> 32);
      const auto d = static_cast<AreaIndex>(packed[k] & 0xFFFFFFFFu);
      is_origin[o] = 1;
      is_destination[d] = 1;
      if (o == d) continue;
      out_m[o] += entries[k].count;
      in_m[d] += entries[k].count;
    }
    if (m == 0) {
      in_obs = in_m;
      out_obs = out_m;
    } else {
      for (std::size_t a = 0; a < n_labels; ++a) {
        in_sums[a].add(in_m[a]);
        out_sums[a].add(out_m[a]);
      }
    }
  }

  std::size_t n_marginals = 0;
  for (std::size_t a = 0; a < n_labels; ++a) n_marginals += is_origin[a] + is_destination[a];

  const std::size_t total = n_cells + n_marginals;
  table.keys_.reserve(total);
  table.observed_.reserve(total);
  table.sums_.reserve(total);
  for (auto& part : parts) {
    table.keys_.insert(table.keys_.end(), part.keys.begin(), part.keys.end());
    table.observed_.insert(table.observed_.end(), part.observed.begin(), part.observed.end());
    table.sums_.insert(table.sums_.end(), part.sums.begin(), part.sums.end());
    part = {};
  }
  for (std::size_t a = 0; a < n_labels; ++a) {
    if (!is_destination[a]) continue;
    table.keys_.push_back({FlowKind::Inbound, 0, static_cast<AreaIndex>(a)});
    table.observed_.push_back(in_obs[a]);
    table.sums_.push_back(in_sums[a]);
  }
  for (std::size_t a = 0; a < n_labels; ++a) {
    if (!is_origin[a]) continue;
    table.keys_.push_back({FlowKind::Outbound, static_cast<AreaIndex>(a), 0});
    table.observed_.push_back(out_obs[a]);
    table.sums_.push_back(out_sums[a]);
  }
  return table;
}

}  // namespace odmwatch
