#pragma once

#include <cstdint>
#include <iosfwd>

#include "odmwatch/detector.hpp"

namespace odmwatch::cli {

struct BenchParams {
  std::uint32_t areas = 1000;
  // Target stored cells per window; 0 means use `density`.
  std::uint64_t nonzeros = 0;
  double density = 0.05;
  int windows = 25;
  DetectorConfig detector{.workers = 0};
  // Lognormal cell volumes around base_volume so that th actually filters.
  double base_volume = 60.0;
  double volume_spread = 1.0;
  double noise = 0.2;
  std::uint64_t seed = 1;
};

struct StageTimes {
  double generate = 0.0;  // not part of detection
  double thresholds = 0.0;
  double stats = 0.0;
  double detection = 0.0;

  double total() const { return thresholds + stats + detection; }
};

struct BenchResult {
  StageTimes seconds;
  std::uint64_t nonzeros_per_window = 0;
  std::size_t series = 0;
  OutcomeSummary summary;
};

// Generates p + 1 snapshots per window in memory (current date plus its p
// history dates) and times threshold, rolling-stats and evaluation stages.
BenchResult run_bench(const BenchParams& params);

void print_bench(std::ostream& out, const BenchParams& params, const BenchResult& result);

}  // namespace odmwatch::cli
