#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "windbid/environment.hpp"
#include "windbid/strategies.hpp"

namespace windbid {

inline constexpr const char* kSpPolicy = "sp";
inline constexpr double kMinAbsSp = 1e-6;  // below this the ratio is undefined
inline constexpr double kBinWidth = 0.05;

enum class EvalStatus {
  Ok,
  Excluded,      // |f_sp| too small for a ratio
  SpFailed,      // full SP did not solve; the whole episode is dropped
  PolicyFailed,  // this policy's bid could not be evaluated
};

const char* to_string(EvalStatus s);
EvalStatus eval_status_from_string(const std::string& s);

// One row per (episode, policy). The full SP appears as policy "sp" with its
// own first-stage decisions, which may exceed the forecast.
struct EvalRecord {
  long episode = 0;
  std::uint64_t seed = 0;
  std::string policy;
  EvalStatus status = EvalStatus::Ok;
  double f_sp = 0.0;
  double f = 0.0;
  double ratio = 0.0;           // f / f_sp
  std::vector<double> actions;  // bid_t / forecast G_t; NaN where G_t = 0
};

struct EvalOptions {
  int n_episodes = 2000;
  std::uint64_t seed = 0;  // episode k uses derive_seed(seed, k)
  int threads = 1;         // episodes evaluated concurrently
  MarketOptions market;
};

std::vector<EvalRecord> evaluate(const std::vector<Policy>& policies, const EpisodeSampler& sampler,
                                 const EvalOptions& options);

struct PolicySummary {
  std::string policy;
  long episodes = 0;  // rows with status Ok
  long failed = 0;
  long excluded = 0;
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
  double share_within_95 = 0.0;  // ratio >= 0.95
  double share_below_85 = 0.0;   // ratio < 0.85
  double mean_action = 0.0;
  // Action counts in bins of kBinWidth on [0,1]; the last entry counts
  // decisions above 1.
  std::vector<long> action_hist;
  // Ratio counts: entry 0 holds ratios below 0, then bins on [0,1], then
  // ratios above 1.
  std::vector<long> ratio_hist;
};

// Policies in first-appearance order. Throws if the table is empty.
std::vector<PolicySummary> summarize(const std::vector<EvalRecord>& records);

int action_bin(double a);
int ratio_bin(double r);

void write_records_csv(const std::vector<EvalRecord>& records, std::ostream& out);
std::vector<EvalRecord> read_records_csv(std::istream& in);
void write_summary_csv(const std::vector<PolicySummary>& summary, std::ostream& out);
void write_histogram_csv(const std::vector<PolicySummary>& summary, std::ostream& out);

}  // namespace windbid
