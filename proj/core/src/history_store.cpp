#include "odmwatch/history_store.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "odmwatch/errors.hpp"
#include "odmwatch/ingest.hpp"

namespace odmwatch {

namespace fs = std::filesystem;

std::string_view to_string(Stride stride) {
  return stride == Stride::Weekly ? "weekly" : "daily";
}

std::optional<Stride> parse_stride(std::string_view text) {
  if (text == "weekly") return Stride::Weekly;
  if (text == "daily") return Stride::Daily;
  return std::nullopt;
}

std::size_t HistorySlice::available() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(slots.begin(), slots.end(), [](const SnapshotPtr& s) { return s != nullptr; }));
}

std::vector<Date> history_dates(Date date, int p, Stride stride) {
  std::vector<Date> dates;
  dates.reserve(static_cast<std::size_t>(std::max(p, 0)));
  for (int k = 1; k <= p; ++k) dates.push_back(date - std::chrono::days{k * stride_days(stride)});
  return dates;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw StoreError("read failure on " + path.string());
  return std::move(ss).str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw StoreError("write failure on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw StoreError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    hex.push_back(kHex[digest[k] >> 4]);
    hex.push_back(kHex[digest[k] & 0xF]);
  }
  return hex;
}

void check_source_id(std::string_view id) {
  if (id.empty() || id == "." || id == ".." || id.find('/') != std::string_view::npos ||
      id.find('\\') != std::string_view::npos) {
    throw StoreError("invalid source id '" + std::string(id) + "'");
  }
}

}  // namespace

HistoryStore::HistoryStore(fs::path root, int retention_days)
    : root_(std::move(root)), retention_days_(retention_days) {
  if (retention_days_ < 1) throw std::invalid_argument("retention_days must be >= 1");
}

int HistoryStore::default_retention_days(int p, Stride stride) {
  return std::max(p * stride_days(stride), 35);
}

fs::path HistoryStore::source_dir(std::string_view source_id) const {
  check_source_id(source_id);
  return root_ / std::string(source_id);
}

fs::path HistoryStore::date_file(std::string_view source_id, Date date) const {
  return source_dir(source_id) / (format_date(date) + ".csv");
}

fs::path HistoryStore::index_file(std::string_view source_id, Date date) const {
  return source_dir(source_id) / (format_date(date) + ".index.json");
}

void HistoryStore::put_snapshot(std::string_view source_id, const SparseOdm& snapshot) {
  put_snapshots(source_id, std::span<const SparseOdm>(&snapshot, 1));
}

void HistoryStore::put_snapshots(std::string_view source_id, std::span<const SparseOdm> snapshots) {
  std::map<Date, std::vector<const SparseOdm*>> by_date;
  for (const auto& m : snapshots) by_date[m.window().date()].push_back(&m);

  std::lock_guard lock(write_mutex_);
  std::error_code ec;
  fs::create_directories(source_dir(source_id), ec);
  if (ec) throw StoreError("cannot create " + source_dir(source_id).string() + ": " + ec.message());

  for (auto& [date, incoming] : by_date) {
    auto stored = load_date(source_id, date);
    for (const SparseOdm* m : incoming) {
      auto same = std::find_if(stored.begin(), stored.end(),
                               [&](const SparseOdm& s) { return s.window() == m->window(); });
      if (same != stored.end()) {
        spdlog::warn("store: replacing snapshot {} for source {}", to_string(m->window()), source_id);
        *same = *m;
      } else {
        stored.push_back(*m);
      }
    }
    write_date(source_id, date, std::move(stored));
  }
  prune(source_id);
}

void HistoryStore::write_date(std::string_view source_id, Date date, std::vector<SparseOdm> snapshots) {
  std::sort(snapshots.begin(), snapshots.end(),
            [](const SparseOdm& a, const SparseOdm& b) { return a.window() < b.window(); });
  std::ostringstream csv;
  write_odm_csv(csv, snapshots);

  nlohmann::json index = {{"date", format_date(date)}, {"windows", nlohmann::json::array()}};
  for (const auto& m : snapshots) {
    index["windows"].push_back({{"start", format_time_of_day(m.window().start())},
                                {"end", format_time_of_day(m.window().end())},
                                {"entries", m.nnz()},
                                {"mass", m.mass()}});
  }
  write_atomically(date_file(source_id, date), csv.str());
  write_atomically(index_file(source_id, date), index.dump(2) + "\n");
}

void HistoryStore::prune(std::string_view source_id) {
  const auto dates = list_dates(source_id);
  if (dates.empty()) return;
  const Date cutoff = dates.back() - std::chrono::days{retention_days_};
  for (const Date d : dates) {
    if (d >= cutoff) break;
    spdlog::info("store: pruning {} for source {} (retention {} days)", format_date(d), source_id,
                 retention_days_);
    std::error_code ec;
    fs::remove(date_file(source_id, d), ec);
    fs::remove(index_file(source_id, d), ec);
  }
}

std::vector<SparseOdm> HistoryStore::load_date(std::string_view source_id, Date date) const {
  const auto path = date_file(source_id, date);
  std::error_code ec;
  if (!fs::exists(path, ec)) return {};
  std::vector<SparseOdm> snapshots;
  try {
    snapshots = parse_odm_csv(read_file(path), path.string());
  } catch (const ParseError& e) {
    throw StoreError(std::string("corrupt store file: ") + e.what());
  }
  // A window observed with no movements has no CSV rows; the index still lists it.
  if (fs::exists(index_file(source_id, date), ec)) {
    const auto parsed = snapshots.size();
    for (const auto& w : list_windows(source_id, date)) {
      const auto hit = std::find_if(snapshots.begin(), snapshots.begin() + static_cast<std::ptrdiff_t>(parsed),
                                    [&](const SparseOdm& m) { return m.window() == w; });
      if (hit == snapshots.begin() + static_cast<std::ptrdiff_t>(parsed)) snapshots.emplace_back(w);
    }
    std::sort(snapshots.begin(), snapshots.end(),
              [](const SparseOdm& a, const SparseOdm& b) { return a.window() < b.window(); });
  }
  return snapshots;
}

SnapshotPtr HistoryStore::get_snapshot(std::string_view source_id, const TimeWindow& window) const {
  for (auto& m : load_date(source_id, window.date())) {
    if (m.window() == window) return std::make_shared<const SparseOdm>(std::move(m));
  }
  return nullptr;
}

HistorySlice HistoryStore::fetch_history(const HistoryQuery& query) const {
  if (query.p < 1) throw std::invalid_argument("p must be >= 1");
  return make_slice(query.window, query.p, query.stride,
                    [&](const TimeWindow& w) { return get_snapshot(query.source_id, w); });
}

std::vector<TimeWindow> HistoryStore::list_windows(std::string_view source_id, Date date) const {
  const auto path = index_file(source_id, date);
  std::error_code ec;
  if (!fs::exists(path, ec)) return {};
  std::vector<TimeWindow> windows;
  try {
    const auto index = nlohmann::json::parse(read_file(path));
    for (const auto& w : index.at("windows")) {
      const auto start = parse_time_of_day(w.at("start").get<std::string>());
      const auto end = parse_time_of_day(w.at("end").get<std::string>());
      if (!start || !end) throw StoreError("bad window in " + path.string());
      windows.emplace_back(date, *start, *end);
    }
  } catch (const nlohmann::json::exception& e) {
    throw StoreError("corrupt index " + path.string() + ": " + e.what());
  }
  return windows;
}

std::vector<Date> HistoryStore::list_dates(std::string_view source_id) const {
  std::vector<Date> dates;
  const auto dir = source_dir(source_id);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return dates;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() != 14 || name.substr(10) != ".csv") continue;
    if (auto d = parse_date(std::string_view(name).substr(0, 10))) dates.push_back(*d);
  }
  std::sort(dates.begin(), dates.end());
  return dates;
}

std::optional<InputDigest> HistoryStore::digest(std::string_view source_id, Date date) const {
  const auto path = date_file(source_id, date);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  return InputDigest{date, sha256_hex(read_file(path))};
}

}  // namespace odmwatch
