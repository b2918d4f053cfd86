#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace windbid {

struct HourRecord {
  std::string timestamp;  // ISO-8601 hour, e.g. 2023-01-01T05:00
  double da_price = 0.0;
  double rt_price = 0.0;
  double wind_speed = 0.0;
};

// Hourly price and wind records grouped into complete 24-hour days.
struct DataSet {
  static constexpr int kHoursPerDay = 24;

  std::vector<HourRecord> records;  // complete days only, in time order
  long dropped_rows = 0;            // rows with missing fields or no partner
  long partial_days = 0;            // days discarded for being incomplete
  std::vector<std::string> warnings;

  int days() const { return static_cast<int>(records.size()) / kHoursPerDay; }
  std::span<const HourRecord> day(int index) const;

  std::vector<double> rt_series() const;
  std::vector<double> wind_series() const;
};

// prices.csv: timestamp,da_price,rt_price   wind.csv: timestamp,wind_speed
// Rows with an empty field are dropped and counted; unparsable numbers or
// timestamps raise SchemaError with the file and line.
DataSet ingest(std::istream& prices, std::istream& wind);
DataSet ingest(const std::string& prices_path, const std::string& wind_path);

// Diurnal prices with autocorrelated deviations and Weibull-distributed,
// persistent wind speeds, starting 2023-01-01T00:00.
DataSet synth_data(int n_days, std::uint64_t seed);

void write_prices_csv(const DataSet& data, std::ostream& out);
void write_wind_csv(const DataSet& data, std::ostream& out);

}  // namespace windbid
