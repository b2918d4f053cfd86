#include "windbid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "windbid/errors.hpp"
#include "windbid/text.hpp"

namespace windbid {

namespace {

struct HourKey {
  long hour_index;  // hours since 1970-01-01T00
  long day_index;
};

std::optional<HourKey> parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, consumed = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d%n", &y, &mo, &d, &sep, &h, &consumed) != 5) return std::nullopt;
  if (sep != 'T' && sep != ' ') return std::nullopt;
  if (h < 0 || h > 23) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const long day = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return HourKey{day * 24 + h, day};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Table {
  std::map<long, std::vector<double>> rows;  // hour index -> values
  std::map<long, std::string> stamps;
  long dropped = 0;
};

Table read_table(std::istream& in, const std::string& name, const std::vector<std::string>& columns) {
  Table table;
  std::string line;
  long line_no = 0;
  std::vector<int> index;
  int ts_col = -1;
  long last_hour = std::numeric_limits<long>::min();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (ts_col < 0) {
      for (std::size_t c = 0; c < cells.size(); ++c)
        if (cells[c] == "timestamp") ts_col = static_cast<int>(c);
      if (ts_col < 0) throw SchemaError(name + ": header lacks a 'timestamp' column", line_no);
      for (const auto& col : columns) {
        const auto it = std::find(cells.begin(), cells.end(), col);
        if (it == cells.end()) throw SchemaError(name + ": header lacks a '" + col + "' column", line_no);
        index.push_back(static_cast<int>(it - cells.begin()));
      }
      continue;
    }
    const auto field = [&](int c) -> std::string { return c < static_cast<int>(cells.size()) ? cells[c] : ""; };
    const std::string ts = field(ts_col);
    bool missing = ts.empty();
    for (int c : index) missing = missing || field(c).empty();
    if (missing) {
      ++table.dropped;
      continue;
    }
    const auto key = parse_timestamp(ts);
    if (!key) throw SchemaError(name + ": malformed timestamp '" + ts + "'", line_no);
    if (key->hour_index <= last_hour) throw SchemaError(name + ": timestamps must be strictly increasing", line_no);
    last_hour = key->hour_index;
    std::vector<double> values;
    for (std::size_t k = 0; k < index.size(); ++k) {
      const auto v = parse_double(field(index[k]));
      if (!v || !std::isfinite(*v))
        throw SchemaError(name + ": malformed " + columns[k] + " value '" + field(index[k]) + "'", line_no);
      values.push_back(*v);
    }
    table.rows.emplace(key->hour_index, std::move(values));
    table.stamps.emplace(key->hour_index, ts);
  }
  if (ts_col < 0) throw SchemaError(name + ": empty file (no header)");
  return table;
}

}  // namespace

std::span<const HourRecord> DataSet::day(int index) const {
  if (index < 0 || index >= days()) throw DataExhausted("day index " + std::to_string(index) + " out of range");
  return std::span<const HourRecord>(records).subspan(static_cast<std::size_t>(index) * kHoursPerDay, kHoursPerDay);
}

std::vector<double> DataSet::rt_series() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.rt_price);
  return out;
}

std::vector<double> DataSet::wind_series() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.wind_speed);
  return out;
}

DataSet ingest(std::istream& prices, std::istream& wind) {
  const Table p = read_table(prices, "prices.csv", {"da_price", "rt_price"});
  const Table w = read_table(wind, "wind.csv", {"wind_speed"});

  DataSet data;
  data.dropped_rows = p.dropped + w.dropped;
  // Inner join on the hour, then keep days with all 24 hours present.
  std::map<long, std::vector<HourRecord>> by_day;
  for (const auto& [hour, pv] : p.rows) {
    const auto it = w.rows.find(hour);
    if (it == w.rows.end()) {
      ++data.dropped_rows;
      continue;
    }
    const long day = hour >= 0 ? hour / 24 : (hour - 23) / 24;
    by_day[day].push_back(HourRecord{p.stamps.at(hour), pv[0], pv[1], it->second[0]});
  }
  for (const auto& [hour, wv] : w.rows)
    if (!p.rows.count(hour)) ++data.dropped_rows;

  for (auto& [day, recs] : by_day) {
    if (static_cast<int>(recs.size()) != DataSet::kHoursPerDay) {
      ++data.partial_days;
      data.warnings.push_back("dropping partial day starting " + recs.front().timestamp + " (" +
                              std::to_string(recs.size()) + " of 24 hours)");
      continue;
    }
    data.records.insert(data.records.end(), recs.begin(), recs.end());
  }
  if (data.dropped_rows > 0)
    data.warnings.push_back("dropped " + std::to_string(data.dropped_rows) + " rows with missing fields or no match");
  return data;
}

DataSet ingest(const std::string& prices_path, const std::string& wind_path) {
  std::ifstream p(prices_path);
  if (!p) throw DataError("cannot open " + prices_path);
  std::ifstream w(wind_path);
  if (!w) throw DataError("cannot open " + wind_path);
  return ingest(p, w);
}

DataSet synth_data(int n_days, std::uint64_t seed) {
  if (n_days < 1) throw DataError("n_days must be >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  const double level_phi = 0.7, rt_phi = 0.6, wind_phi = 0.95;
  double level = 0.0, rt_dev = 0.0, latent = normal(rng);
  const std::chrono::sys_days start = std::chrono::year{2023} / 1 / 1;

  DataSet data;
  data.records.reserve(static_cast<std::size_t>(n_days) * 24);
  for (int d = 0; d < n_days; ++d) {
    level = level_phi * level + 6.0 * normal(rng);
    const std::chrono::year_month_day ymd{start + std::chrono::days{d}};
    for (int h = 0; h < 24; ++h) {
      HourRecord r;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h);
      r.timestamp = buf;
      r.da_price = 45.0 + level + 12.0 * std::sin(two_pi * (h - 7) / 24.0) + 6.0 * std::sin(2.0 * two_pi * (h - 3) / 24.0) +
                   2.0 * normal(rng);
      rt_dev = rt_phi * rt_dev + 8.0 * normal(rng);
      r.rt_price = r.da_price + rt_dev;

      // Gaussian AR(1) latent mapped through the normal CDF into a Weibull.
      latent = wind_phi * latent + std::sqrt(1.0 - wind_phi * wind_phi) * normal(rng);
      const double u = std::clamp(0.5 * std::erfc(-latent / std::numbers::sqrt2), 1e-12, 1.0 - 1e-12);
      const double weibull = 9.5 * std::pow(-std::log1p(-u), 1.0 / 2.0);
      r.wind_speed = std::max(0.0, weibull * (1.0 + 0.1 * std::sin(two_pi * (h - 15) / 24.0)));
      data.records.push_back(std::move(r));
    }
  }
  return data;
}

void write_prices_csv(const DataSet& data, std::ostream& out) {
  out << "timestamp,da_price,rt_price\n";
  for (const auto& r : data.records) out << r.timestamp << ',' << format_double(r.da_price) << ',' << format_double(r.rt_price) << '\n';
}

void write_wind_csv(const DataSet& data, std::ostream& out) {
  out << "timestamp,wind_speed\n";
  for (const auto& r : data.records) out << r.timestamp << ',' << format_double(r.wind_speed) << '\n';
}

}  // namespace windbid
