#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "odmwatch/odm.hpp"

namespace odmwatch {

enum class AnomalyKind { Spike, Drop };

std::string_view to_string(AnomalyKind kind);

struct AnomalySpec {
  FlowKey key;
  TimeWindow window;
  AnomalyKind kind = AnomalyKind::Spike;
  // > 1 for spikes, [0, 1) for drops. Marginal keys scale every off-diagonal
  // cell of the row (outbound) or column (inbound).
  double magnitude = 3.0;
};

// Synthetic world description.
//
// Each cell of a fixed random sparsity pattern gets a baseline drawn once
// (lognormal with mean base_volume and log-sd volume_spread; constant when
// volume_spread = 0). The value of a cell on a date is
//   round(baseline * weekday_factor[weekday] * (1 + noise * u)),  u ~ U[-1, 1]
// and anomalous windows multiply it by the anomaly magnitude, rounding again.
struct SynthSpec {
  std::uint32_t n_areas = 10;
  double density = 0.1;
  double base_volume = 100.0;
  double volume_spread = 0.0;
  // Used when weekday_factors is not given: 1 + amplitude * sin(2 pi k / 7).
  double weekly_amplitude = 0.0;
  // Monday first.
  std::optional<std::array<double, 7>> weekday_factors;
  double noise = 0.0;
  std::uint64_t seed = 0;

  Date start_date{};
  int days = 35;
  // Anomalies must not fall inside [start_date, start_date + warmup_days).
  int warmup_days = 28;
  int windows_per_day = 1;
  bool full_day_window = false;

  std::vector<AnomalySpec> anomalies;

  static SynthSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

nlohmann::json anomaly_labels_json(std::span<const AnomalySpec> anomalies);

// Deterministic generator for a validated SynthSpec. Snapshots can be produced
// one at a time, so large worlds never need to be held in memory at once.
class SynthWorld {
 public:
  // Throws SpecError on an invalid spec (anomaly inside warm-up, unknown key, ...).
  explicit SynthWorld(SynthSpec spec);

  const SynthSpec& spec() const noexcept { return spec_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  // Sparsity pattern, sorted; count field holds nothing.
  std::span<const CellEntry> pattern() const noexcept { return pattern_; }
  std::span<const double> baselines() const noexcept { return baselines_; }

  std::vector<Date> dates() const;
  std::vector<TimeWindow> windows(Date date) const;
  double weekday_factor(Date date) const;

  SparseOdm snapshot(const TimeWindow& window, bool with_anomalies = true) const;

  // All snapshots of all dates, ordered by window.
  std::vector<SparseOdm> generate_all() const;

  // One <date>.csv per date plus labels.json.
  void write(const std::filesystem::path& out_dir) const;

 private:
  void validate_anomalies() const;

  SynthSpec spec_;
  std::vector<std::string> labels_;
  std::vector<CellEntry> pattern_;
  std::vector<double> baselines_;
  std::array<double, 7> weekday_factors_{};
};

std::string area_label(std::uint32_t index, std::uint32_t n_areas);

}  // namespace odmwatch
