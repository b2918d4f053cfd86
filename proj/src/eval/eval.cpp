#include "windbid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "windbid/errors.hpp"
#include "windbid/parallel.hpp"
#include "windbid/rng.hpp"
#include "windbid/text.hpp"

namespace windbid {

namespace {

constexpr int kActionBins = 20;  // 1 / kBinWidth
constexpr double kEdgeSlack = 1e-9;

std::vector<double> decisions(const MarketDay& day, const BidVector& bid) {
  std::vector<double> a;
  for (int t = 0; t < day.horizon(); ++t) {
    const double g = day.wind_forecast[t];
    a.push_back(g > 0.0 ? bid.p_da[t] / g : std::numeric_limits<double>::quiet_NaN());
  }
  return a;
}

// Sum of sorted values, so aggregates do not depend on record order.
double sorted_mean(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double field_double(const std::string& s, long line) {
  const auto v = parse_double(s);
  if (!v) throw SchemaError("eval_records.csv: bad number '" + s + "'", line);
  return *v;
}

}  // namespace

const char* to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::Excluded:
      return "excluded";
    case EvalStatus::SpFailed:
      return "sp_failed";
    case EvalStatus::PolicyFailed:
      return "policy_failed";
    case EvalStatus::Ok:
      break;
  }
  return "ok";
}

EvalStatus eval_status_from_string(const std::string& s) {
  for (auto st : {EvalStatus::Ok, EvalStatus::Excluded, EvalStatus::SpFailed, EvalStatus::PolicyFailed})
    if (s == to_string(st)) return st;
  throw SchemaError("unknown evaluation status '" + s + "'");
}

std::vector<EvalRecord> evaluate(const std::vector<Policy>& policies, const EpisodeSampler& sampler,
                                 const EvalOptions& options) {
  if (options.n_episodes < 1) throw ConfigError("evaluation needs at least one episode");
  for (const auto& p : policies)
    if (p.name == kSpPolicy) throw ConfigError("policy name 'sp' is reserved for the full stochastic program");

  MarketOptions inner = options.market;
  inner.threads = 1;  // parallelism lives at the episode level
  std::vector<std::vector<EvalRecord>> per_episode(static_cast<std::size_t>(options.n_episodes));

  parallel_for(options.n_episodes, options.threads, [&](int k) {
    const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(k));
    const EpisodeState s = sampler(seed);
    auto& rows = per_episode[k];

    EvalRecord sp{k, seed, kSpPolicy, EvalStatus::Ok, 0.0, 0.0, 1.0, {}};
    try {
      const SolveReport rep = solve_full_sp(s.day, s.battery, s.scenarios, inner);
      if (rep.optimal()) {
        sp.f_sp = sp.f = rep.objective;
        sp.actions = decisions(s.day, rep.first_stage);
      } else {
        sp.status = EvalStatus::SpFailed;
      }
    } catch (const SolverError&) {
      sp.status = EvalStatus::SpFailed;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (sp.status == EvalStatus::SpFailed) sp.f_sp = sp.f = sp.ratio = nan;
    const bool ratio_defined = sp.status == EvalStatus::Ok && std::abs(sp.f_sp) >= kMinAbsSp;
    if (sp.status == EvalStatus::Ok && !ratio_defined) {
      sp.status = EvalStatus::Excluded;
      sp.ratio = nan;
    }
    rows.push_back(sp);

    for (const auto& policy : policies) {
      EvalRecord r{k, seed, policy.name, sp.status, sp.f_sp, nan, nan, {}};
      if (sp.status == EvalStatus::SpFailed) {
        rows.push_back(std::move(r));
        continue;
      }
      try {
        const BidVector bid = policy.bid(s);
        r.actions = decisions(s.day, bid);
        const SolveReport rep = solve_second_stage(s.day, s.battery, s.scenarios, bid, inner);
        if (rep.optimal()) {
          r.f = rep.objective;
          if (ratio_defined) r.ratio = r.f / sp.f_sp;
        } else {
          r.status = EvalStatus::PolicyFailed;
        }
      } catch (const SolverError&) {
        r.status = EvalStatus::PolicyFailed;
      }
      rows.push_back(std::move(r));
    }
  });

  std::vector<EvalRecord> out;
  for (auto& rows : per_episode)
    for (auto& r : rows) out.push_back(std::move(r));
  return out;
}

int action_bin(double a) {
  if (a > 1.0 + kEdgeSlack) return kActionBins;
  return std::clamp(static_cast<int>(std::floor(a * kActionBins + kEdgeSlack)), 0, kActionBins - 1);
}

int ratio_bin(double r) {
  if (r < 0.0) return 0;
  if (r > 1.0 + kEdgeSlack) return kActionBins + 1;
  return 1 + std::clamp(static_cast<int>(std::floor(r * kActionBins + kEdgeSlack)), 0, kActionBins - 1);
}

std::vector<PolicySummary> summarize(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw Error("cannot summarize an empty evaluation table");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const EvalRecord*>> by_policy;
  for (const auto& r : records) {
    if (!by_policy.count(r.policy)) order.push_back(r.policy);
    by_policy[r.policy].push_back(&r);
  }
  std::vector<PolicySummary> out;
  for (const auto& name : order) {
    PolicySummary s;
    s.policy = name;
    s.action_hist.assign(kActionBins + 1, 0);
    s.ratio_hist.assign(kActionBins + 2, 0);
    std::vector<double> ratios, actions;
    for (const auto* r : by_policy[name]) {
      if (r->status == EvalStatus::SpFailed || r->status == EvalStatus::PolicyFailed) {
        ++s.failed;
        continue;
      }
      for (double a : r->actions)
        if (std::isfinite(a)) {
          ++s.action_hist[action_bin(a)];
          actions.push_back(a);
        }
      if (r->status == EvalStatus::Excluded) {
        ++s.excluded;
        continue;
      }
      ++s.episodes;
      ratios.push_back(r->ratio);
      ++s.ratio_hist[ratio_bin(r->ratio)];
    }
    s.mean_action = sorted_mean(actions);
    s.mean_ratio = sorted_mean(ratios);
    if (ratios.empty()) {
      s.median_ratio = s.share_within_95 = s.share_below_85 = std::numeric_limits<double>::quiet_NaN();
    } else {
      std::sort(ratios.begin(), ratios.end());
      const std::size_t n = ratios.size();
      s.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
      const auto within = std::count_if(ratios.begin(), ratios.end(), [](double r) { return r >= 0.95; });
      const auto below = std::count_if(ratios.begin(), ratios.end(), [](double r) { return r < 0.85; });
      s.share_within_95 = static_cast<double>(within) / static_cast<double>(n);
      s.share_below_85 = static_cast<double>(below) / static_cast<double>(n);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_records_csv(const std::vector<EvalRecord>& records, std::ostream& out) {
  out << "# episode: index; seed: episode seed; policy: bidder name (sp = full stochastic program); status: "
         "ok|excluded|sp_failed|policy_failed; f_sp: full SP optimum; f: policy objective; ratio: f/f_sp; "
         "actions: ';'-joined bid/forecast per hour (nan where forecast is 0)\n";
  out << "episode,seed,policy,status,f_sp,f,ratio,actions\n";
  for (const auto& r : records) {
    out << r.episode << ',' << r.seed << ',' << r.policy << ',' << to_string(r.status) << ',' << format_double(r.f_sp)
        << ',' << format_double(r.f) << ',' << format_double(r.ratio) << ',';
    for (std::size_t t = 0; t < r.actions.size(); ++t) out << (t ? ";" : "") << format_double(r.actions[t]);
    out << '\n';
  }
}

std::vector<EvalRecord> read_records_csv(std::istream& in) {
  std::vector<EvalRecord> out;
  std::string line;
  long line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "episode,seed,policy,status,f_sp,f,ratio,actions")
        throw SchemaError("eval_records.csv: unexpected header", line_no);
      header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 8) throw SchemaError("eval_records.csv: expected 8 fields", line_no);
    EvalRecord r;
    try {
      r.episode = std::stol(cells[0]);
      r.seed = std::stoull(cells[1]);
    } catch (const std::exception&) {
      throw SchemaError("eval_records.csv: bad episode or seed", line_no);
    }
    r.policy = cells[2];
    r.status = eval_status_from_string(cells[3]);
    r.f_sp = field_double(cells[4], line_no);
    r.f = field_double(cells[5], line_no);
    r.ratio = field_double(cells[6], line_no);
    if (!cells[7].empty())
      for (const auto& a : split(cells[7], ';')) r.actions.push_back(field_double(a, line_no));
    out.push_back(std::move(r));
  }
  if (!header) throw SchemaError("eval_records.csv: missing header");
  return out;
}

void write_summary_csv(const std::vector<PolicySummary>& summary, std::ostream& out) {
  out << "# policy; episodes: rows with a defined ratio; failed: solver failures; excluded: |f_sp| < 1e-6; "
         "mean_ratio/median_ratio: f/f_sp; share_within_95: ratio >= 0.95; share_below_85: ratio < 0.85; "
         "mean_action: mean bid/forecast\n";
  out << "policy,episodes,failed,excluded,mean_ratio,median_ratio,share_within_95,share_below_85,mean_action\n";
  for (const auto& s : summary)
    out << s.policy << ',' << s.episodes << ',' << s.failed << ',' << s.excluded << ',' << format_double(s.mean_ratio)
        << ',' << format_double(s.median_ratio) << ',' << format_double(s.share_within_95) << ','
        << format_double(s.share_below_85) << ',' << format_double(s.mean_action) << '\n';
}

void write_histogram_csv(const std::vector<PolicySummary>& summary, std::ostream& out) {
  out << "# kind: action (bid/forecast, values above 1 in the last bin) or ratio (f/f_sp, with underflow and "
         "overflow bins); policy; bin_lo, bin_hi: bin edges; count\n";
  out << "kind,policy,bin_lo,bin_hi,count\n";
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& s : summary) {
    for (int b = 0; b <= kActionBins; ++b) {
      const double lo = b < kActionBins ? b / double(kActionBins) : 1.0;
      const double hi = b < kActionBins ? (b + 1) / double(kActionBins) : inf;
      out << "action," << s.policy << ',' << format_double(lo) << ',' << format_double(hi) << ',' << s.action_hist[b]
          << '\n';
    }
    for (int b = 0; b <= kActionBins + 1; ++b) {
      const double lo = b == 0 ? -inf : b <= kActionBins ? (b - 1) / double(kActionBins) : 1.0;
      const double hi = b == 0 ? 0.0 : b <= kActionBins ? b / double(kActionBins) : inf;
      out << "ratio," << s.policy << ',' << format_double(lo) << ',' << format_double(hi) << ',' << s.ratio_hist[b]
          << '\n';
    }
  }
}

}  // namespace windbid
