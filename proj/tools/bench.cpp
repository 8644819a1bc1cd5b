#include "bench.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ostream>

#include "odmwatch/synth.hpp"

namespace odmwatch::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

BenchResult run_bench(const BenchParams& params) {
  SynthSpec spec;
  spec.n_areas = params.areas;
  const double cells = static_cast<double>(params.areas) * params.areas;
  spec.density = params.nonzeros > 0 ? std::min(1.0, static_cast<double>(params.nonzeros) / cells) : params.density;
  spec.base_volume = params.base_volume;
  spec.volume_spread = params.volume_spread;
  spec.noise = params.noise;
  spec.seed = params.seed;
  spec.start_date = Date{std::chrono::year{2024} / 1 / 1};
  spec.days = 1;
  spec.warmup_days = 0;

  BenchResult result;
  auto t0 = Clock::now();
  const SynthWorld world(spec);
  result.seconds.generate += seconds_since(t0);
  result.nonzeros_per_window = world.pattern().size();

  const auto& cfg = params.detector;
  const Date today = spec.start_date + std::chrono::days{cfg.p * stride_days(cfg.stride)};
  const std::chrono::seconds length{kDaySeconds.count() / std::max(params.windows, 1)};

  for (int w = 0; w < params.windows; ++w) {
    const TimeWindow window(today, length * w, length * (w + 1) - std::chrono::seconds{1});

    t0 = Clock::now();
    const SparseOdm current = world.snapshot(window);
    HistorySlice slice;
    for (const Date d : history_dates(today, cfg.p, cfg.stride)) {
      slice.slots.push_back(std::make_shared<const SparseOdm>(world.snapshot(window.on(d))));
    }
    result.seconds.generate += seconds_since(t0);

    t0 = Clock::now();
    const auto thresholds = daily_quantile_threshold(current, cfg.th, cfg.quantile);
    result.seconds.thresholds += seconds_since(t0);

    t0 = Clock::now();
    const auto table = SeriesTable::build(current, slice, cfg.workers);
    result.seconds.stats += seconds_since(t0);

    t0 = Clock::now();
    const auto report = evaluate_series(table, window, thresholds, cfg);
    result.seconds.detection += seconds_since(t0);

    result.series += table.size();
    result.summary.merge(report.summary);
  }
  return result;
}

void print_bench(std::ostream& out, const BenchParams& params, const BenchResult& r) {
  out << fmt::format("workload: areas={} nonzeros_per_window={} windows={} p={} stride={}\n", params.areas,
                     r.nonzeros_per_window, params.windows, params.detector.p, to_string(params.detector.stride));
  out << fmt::format("stage generate   {:10.3f} s (excluded)\n", r.seconds.generate);
  out << fmt::format("stage thresholds {:10.3f} s\n", r.seconds.thresholds);
  out << fmt::format("stage stats      {:10.3f} s\n", r.seconds.stats);
  out << fmt::format("stage detection  {:10.3f} s\n", r.seconds.detection);
  out << fmt::format("total            {:10.3f} s for {} series\n", r.seconds.total(), r.series);
  out << fmt::format("signals: upper={} lower={} below_eligibility={}\n", r.summary.upper_signals(),
                     r.summary.lower_signals(), r.summary.count(OutcomeStatus::BelowEligibility));
}

}  // namespace odmwatch::cli
