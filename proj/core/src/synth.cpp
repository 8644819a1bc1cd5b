#include "odmwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "odmwatch/errors.hpp"
#include "odmwatch/ingest.hpp"

namespace odmwatch {

std::string_view to_string(AnomalyKind kind) { return kind == AnomalyKind::Spike ? "spike" : "drop"; }

namespace {

using nlohmann::json;

// std::*_distribution output is implementation-defined; these are not.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

Count round_count(double v) { return v <= 0.0 ? 0 : static_cast<Count>(std::llround(v)); }

FlowKey key_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "cell") return FlowKey::cell(j.at("origin").get<std::string>(), j.at("destination").get<std::string>());
  if (kind == "inbound") return FlowKey::inbound(j.at("destination").get<std::string>());
  if (kind == "outbound") return FlowKey::outbound(j.at("origin").get<std::string>());
  throw SpecError("unknown key kind '" + kind + "'");
}

json key_to_json(const FlowKey& key) {
  json j = {{"kind", to_string(key.kind)}};
  if (key.kind != FlowKind::Inbound) j["origin"] = key.origin;
  if (key.kind != FlowKind::Outbound) j["destination"] = key.destination;
  return j;
}

Date date_from_json(const json& j, const char* field) {
  const auto text = j.at(field).get<std::string>();
  const auto d = parse_date(text);
  if (!d) throw SpecError(std::string("invalid ") + field + " '" + text + "'");
  return *d;
}

std::chrono::seconds time_from_json(const json& j, const char* field, std::chrono::seconds fallback) {
  if (!j.contains(field)) return fallback;
  const auto text = j.at(field).get<std::string>();
  const auto t = parse_time_of_day(text);
  if (!t) throw SpecError(std::string("invalid ") + field + " '" + text + "'");
  return *t;
}

}  // namespace

std::string area_label(std::uint32_t index, std::uint32_t n_areas) {
  std::size_t width = 1;
  for (std::uint32_t n = n_areas > 0 ? n_areas - 1 : 0; n >= 10; n /= 10) ++width;
  std::string digits = std::to_string(index);
  return "A" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

SynthSpec SynthSpec::from_json(const json& j) {
  try {
    SynthSpec s;
    s.n_areas = j.at("n_areas").get<std::uint32_t>();
    s.density = j.at("density").get<double>();
    s.base_volume = j.at("base_volume").get<double>();
    s.volume_spread = j.value("volume_spread", 0.0);
    s.weekly_amplitude = j.value("weekly_amplitude", 0.0);
    if (j.contains("weekday_factors")) s.weekday_factors = j.at("weekday_factors").get<std::array<double, 7>>();
    s.noise = j.value("noise", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.start_date = date_from_json(j, "start_date");
    s.days = j.value("days", 35);
    s.warmup_days = j.value("warmup_days", 28);
    s.windows_per_day = j.value("windows_per_day", 1);
    s.full_day_window = j.value("full_day_window", false);
    for (const auto& a : j.value("anomalies", json::array())) {
      AnomalySpec spec;
      spec.key = key_from_json(a.at("key"));
      const auto date = date_from_json(a, "date");
      const auto start = time_from_json(a, "start", std::chrono::seconds{0});
      const auto end = time_from_json(a, "end", kDaySeconds - std::chrono::seconds{1});
      try {
        spec.window = TimeWindow(date, start, end);
      } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
      }
      const auto kind = a.at("kind").get<std::string>();
      if (kind == "spike") {
        spec.kind = AnomalyKind::Spike;
      } else if (kind == "drop") {
        spec.kind = AnomalyKind::Drop;
      } else {
        throw SpecError("unknown anomaly kind '" + kind + "'");
      }
      spec.magnitude = a.at("magnitude").get<double>();
      s.anomalies.push_back(std::move(spec));
    }
    return s;
  } catch (const json::exception& e) {
    throw SpecError(std::string("invalid synth spec: ") + e.what());
  }
}

json anomaly_labels_json(std::span<const AnomalySpec> anomalies) {
  json arr = json::array();
  for (const auto& a : anomalies) {
    arr.push_back({{"key", key_to_json(a.key)},
                   {"date", format_date(a.window.date())},
                   {"start", format_time_of_day(a.window.start())},
                   {"end", format_time_of_day(a.window.end())},
                   {"kind", to_string(a.kind)},
                   {"magnitude", a.magnitude}});
  }
  return arr;
}

json SynthSpec::to_json() const {
  json j = {{"n_areas", n_areas},
            {"density", density},
            {"base_volume", base_volume},
            {"volume_spread", volume_spread},
            {"weekly_amplitude", weekly_amplitude},
            {"noise", noise},
            {"seed", seed},
            {"start_date", format_date(start_date)},
            {"days", days},
            {"warmup_days", warmup_days},
            {"windows_per_day", windows_per_day},
            {"full_day_window", full_day_window},
            {"anomalies", anomaly_labels_json(anomalies)}};
  if (weekday_factors) j["weekday_factors"] = *weekday_factors;
  return j;
}

SynthWorld::SynthWorld(SynthSpec spec) : spec_(std::move(spec)) {
  const auto& s = spec_;
  if (s.n_areas < 1) throw SpecError("n_areas must be >= 1");
  if (!(s.density > 0.0 && s.density <= 1.0)) throw SpecError("density must lie in (0, 1]");
  if (!(s.base_volume > 0.0)) throw SpecError("base_volume must be positive");
  if (!(s.volume_spread >= 0.0)) throw SpecError("volume_spread must be >= 0");
  if (!(s.weekly_amplitude >= 0.0 && s.weekly_amplitude < 1.0)) throw SpecError("weekly_amplitude must lie in [0, 1)");
  if (!(s.noise >= 0.0 && s.noise < 1.0)) throw SpecError("noise must lie in [0, 1)");
  if (s.days < 1) throw SpecError("days must be >= 1");
  if (s.warmup_days < 0) throw SpecError("warmup_days must be >= 0");
  if (s.windows_per_day < 1) throw SpecError("windows_per_day must be >= 1");
  try {
    (void)expected_windows({"", s.windows_per_day, true, s.full_day_window}, s.start_date);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }

  if (s.weekday_factors) {
    weekday_factors_ = *s.weekday_factors;
    for (double f : weekday_factors_) {
      if (!(f >= 0.0)) throw SpecError("weekday factors must be >= 0");
    }
  } else {
    for (int k = 0; k < 7; ++k) {
      weekday_factors_[k] = 1.0 + s.weekly_amplitude * std::sin(2.0 * std::numbers::pi * k / 7.0);
    }
  }

  labels_.reserve(s.n_areas);
  for (std::uint32_t k = 0; k < s.n_areas; ++k) labels_.push_back(area_label(k, s.n_areas));

  auto rng = seeded({s.seed, 0x7061747465726eULL});
  const std::uint64_t n = s.n_areas;
  const std::uint64_t total = n * n;
  std::vector<std::uint64_t> cells;
  if (total <= (std::uint64_t{1} << 24)) {
    for (std::uint64_t c = 0; c < total; ++c) {
      if (uniform01(rng) < s.density) cells.push_back(c);
    }
  } else {
    const auto target = static_cast<std::uint64_t>(std::llround(s.density * static_cast<double>(total)));
    while (cells.size() < target) {
      const auto missing = target - cells.size();
      for (std::uint64_t k = 0; k < missing; ++k) cells.push_back(rng() % total);
      std::sort(cells.begin(), cells.end());
      cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    }
  }
  pattern_.reserve(cells.size());
  baselines_.reserve(cells.size());
  const double sigma = s.volume_spread;
  for (const auto c : cells) {
    pattern_.push_back({static_cast<AreaIndex>(c / n), static_cast<AreaIndex>(c % n), 0});
    baselines_.push_back(sigma > 0.0 ? s.base_volume * std::exp(sigma * standard_normal(rng) - 0.5 * sigma * sigma)
                                     : s.base_volume);
  }
  validate_anomalies();
}

void SynthWorld::validate_anomalies() const {
  const Date first_allowed = spec_.start_date + std::chrono::days{spec_.warmup_days};
  const Date end = spec_.start_date + std::chrono::days{spec_.days};
  for (const auto& a : spec_.anomalies) {
    const Date d = a.window.date();
    if (d < first_allowed) {
      throw SpecError("anomaly on " + format_date(d) + " falls inside the warm-up period ending " +
                      format_date(first_allowed));
    }
    if (d >= end) throw SpecError("anomaly on " + format_date(d) + " is after the generated range");
    const auto ws = windows(d);
    if (std::find(ws.begin(), ws.end(), a.window) == ws.end()) {
      throw SpecError("anomaly window " + to_string(a.window) + " is not in the window schedule");
    }
    if (a.kind == AnomalyKind::Spike && !(a.magnitude > 1.0)) throw SpecError("spike magnitude must be > 1");
    if (a.kind == AnomalyKind::Drop && !(a.magnitude >= 0.0 && a.magnitude < 1.0)) {
      throw SpecError("drop magnitude must lie in [0, 1)");
    }

    auto index = [&](const std::string& label) -> std::optional<AreaIndex> {
      auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
      if (it == labels_.end() || *it != label) return std::nullopt;
      return static_cast<AreaIndex>(it - labels_.begin());
    };
    bool found = false;
    switch (a.key.kind) {
      case FlowKind::Cell: {
        const auto o = index(a.key.origin), dd = index(a.key.destination);
        found = o && dd &&
                std::binary_search(pattern_.begin(), pattern_.end(), CellEntry{*o, *dd, 0},
                                   [](const CellEntry& x, const CellEntry& y) {
                                     return x.origin != y.origin ? x.origin < y.origin : x.destination < y.destination;
                                   });
        break;
      }
      case FlowKind::Inbound: {
        const auto j = index(a.key.destination);
        found = j && std::any_of(pattern_.begin(), pattern_.end(),
                                 [&](const CellEntry& e) { return e.destination == *j && e.origin != *j; });
        break;
      }
      case FlowKind::Outbound: {
        const auto i = index(a.key.origin);
        found = i && std::any_of(pattern_.begin(), pattern_.end(),
                                 [&](const CellEntry& e) { return e.origin == *i && e.destination != *i; });
        break;
      }
    }
    if (!found) throw SpecError("anomaly target " + to_string(a.key) + " is not in the generated universe");
  }
}

std::vector<Date> SynthWorld::dates() const {
  std::vector<Date> ds;
  for (int k = 0; k < spec_.days; ++k) ds.push_back(spec_.start_date + std::chrono::days{k});
  return ds;
}

std::vector<TimeWindow> SynthWorld::windows(Date date) const {
  return expected_windows({"", spec_.windows_per_day, true, spec_.full_day_window}, date);
}

double SynthWorld::weekday_factor(Date date) const {
  const std::chrono::weekday wd{date};
  return weekday_factors_[wd.iso_encoding() - 1];
}

SparseOdm SynthWorld::snapshot(const TimeWindow& window, bool with_anomalies) const {
  const auto day = static_cast<std::uint64_t>(window.date().time_since_epoch().count());
  auto rng = seeded({spec_.seed, day, static_cast<std::uint64_t>(window.start().count()),
                     static_cast<std::uint64_t>(window.end().count())});
  const double factor = weekday_factor(window.date());

  std::vector<CellEntry> entries(pattern_.begin(), pattern_.end());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double jitter = spec_.noise * (2.0 * uniform01(rng) - 1.0);
    entries[k].count = round_count(baselines_[k] * factor * (1.0 + jitter));
  }

  if (with_anomalies) {
    auto index = [&](const std::string& label) {
      return static_cast<AreaIndex>(std::lower_bound(labels_.begin(), labels_.end(), label) - labels_.begin());
    };
    auto scale = [&](CellEntry& e, double magnitude) {
      e.count = round_count(static_cast<double>(e.count) * magnitude);
    };
    for (const auto& a : spec_.anomalies) {
      if (!(a.window == window)) continue;
      switch (a.key.kind) {
        case FlowKind::Cell: {
          const CellEntry probe{index(a.key.origin), index(a.key.destination), 0};
          auto it = std::lower_bound(entries.begin(), entries.end(), probe, [](const CellEntry& x, const CellEntry& y) {
            return x.origin != y.origin ? x.origin < y.origin : x.destination < y.destination;
          });
          scale(*it, a.magnitude);
          break;
        }
        case FlowKind::Inbound: {
          const auto j = index(a.key.destination);
          for (auto& e : entries) {
            if (e.destination == j && e.origin != j) scale(e, a.magnitude);
          }
          break;
        }
        case FlowKind::Outbound: {
          const auto i = index(a.key.origin);
          for (auto& e : entries) {
            if (e.origin == i && e.destination != i) scale(e, a.magnitude);
          }
          break;
        }
      }
    }
  }
  return SparseOdm::from_sorted(window, labels_, std::move(entries));
}

std::vector<SparseOdm> SynthWorld::generate_all() const {
  std::vector<SparseOdm> out;
  for (const Date d : dates()) {
    for (const auto& w : windows(d)) out.push_back(snapshot(w));
  }
  return out;
}

void SynthWorld::write(const std::filesystem::path& out_dir) const {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  for (const Date d : dates()) {
    std::vector<SparseOdm> day;
    for (const auto& w : windows(d)) day.push_back(snapshot(w));
    const auto path = out_dir / (format_date(d) + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    write_odm_csv(out, day);
    if (!out) throw Error("write failure on " + path.string());
  }
  const auto labels_path = out_dir / "labels.json";
  std::ofstream out(labels_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + labels_path.string());
  out << json{{"seed", spec_.seed}, {"anomalies", anomaly_labels_json(spec_.anomalies)}}.dump(2) << '\n';
}

}  // namespace odmwatch
