#include "windbid/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "windbid/errors.hpp"
#include "windbid/parallel.hpp"

namespace windbid {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_matrix(const std::vector<std::vector<double>>& m, int rows, int cols, const char* name) {
  if (static_cast<int>(m.size()) != rows)
    throw DimensionMismatch(std::string("scenario matrix '") + name + "' has wrong scenario count");
  for (const auto& row : m) {
    if (static_cast<int>(row.size()) != cols)
      throw DimensionMismatch(std::string("scenario matrix '") + name + "' has wrong horizon");
    if (!all_finite(row)) throw DataError(std::string("scenario matrix '") + name + "' has non-finite entries");
  }
}

std::string tag(const char* name, int t, int w) {
  return std::string(name) + "[t=" + std::to_string(t + 1) + ",w=" + std::to_string(w + 1) + "]";
}

double discharge_coeff(const BatteryContext& b, DischargeConvention c) {
  return c == DischargeConvention::Multiply ? b.eta_dis : 1.0 / b.eta_dis;
}

// Appends the rows of one scenario block. `da_col` < 0 means the day-ahead
// quantity is a constant folded into the balance right-hand side.
struct BlockWriter {
  std::vector<Eigen::Triplet<double>>& trip;
  LpStandardForm& lp;

  void write(const BatteryContext& battery, const ScenarioSet& sc, int w, int horizon, int row0, int col0,
             int da_col0, const std::vector<double>* fixed_bid, double weight, DischargeConvention conv) {
    const auto col = [&](int t, Recourse v) { return col0 + t * kRecoursePerPeriod + static_cast<int>(v); };
    const double dis = discharge_coeff(battery, conv);
    for (int t = 0; t < horizon; ++t) {
      // balance: P^DA + P^RT + P^op - P^up + P^ch - P^dis = G
      const int r = row0 + t;
      if (da_col0 >= 0) trip.emplace_back(r, da_col0 + t, 1.0);
      trip.emplace_back(r, col(t, Recourse::Rt), 1.0);
      trip.emplace_back(r, col(t, Recourse::Op), 1.0);
      trip.emplace_back(r, col(t, Recourse::Up), -1.0);
      trip.emplace_back(r, col(t, Recourse::Ch), 1.0);
      trip.emplace_back(r, col(t, Recourse::Dis), -1.0);
      lp.rhs[r] = sc.wind[w][t] - (fixed_bid ? (*fixed_bid)[t] : 0.0);
      lp.row_sense[r] = RowSense::Equal;
      lp.row_labels[r] = tag("balance", t, w);

      // dynamics: E_t - E_{t-1} - eta_ch P^ch + eta_dis P^dis = 0, E_0 = e_init
      const int d = row0 + horizon + t;
      trip.emplace_back(d, col(t, Recourse::Energy), 1.0);
      if (t > 0) trip.emplace_back(d, col(t - 1, Recourse::Energy), -1.0);
      trip.emplace_back(d, col(t, Recourse::Ch), -battery.eta_ch);
      trip.emplace_back(d, col(t, Recourse::Dis), dis);
      lp.rhs[d] = t == 0 ? battery.e_init : 0.0;
      lp.row_sense[d] = RowSense::Equal;
      lp.row_labels[d] = tag("dynamics", t, w);

      lp.objective[col(t, Recourse::Rt)] = weight * sc.rt_price[w][t];
      lp.objective[col(t, Recourse::Up)] = -weight * sc.up_price[w][t];
      lp.objective[col(t, Recourse::Op)] = -weight * sc.op_price[w][t];

      for (auto v : {Recourse::Rt, Recourse::Up, Recourse::Op}) {
        lp.lower[col(t, v)] = 0.0;
        lp.upper[col(t, v)] = kInf;
      }
      // Real-time sales cannot exceed what the farm can physically deliver.
      // Never binds at an optimum when the shortfall price is at least the
      // real-time price; otherwise it removes the buy-and-resell ray.
      lp.upper[col(t, Recourse::Rt)] = sc.wind[w][t] + battery.p_dis_max;
      lp.lower[col(t, Recourse::Ch)] = 0.0;
      lp.upper[col(t, Recourse::Ch)] = battery.p_ch_max;
      lp.lower[col(t, Recourse::Dis)] = 0.0;
      lp.upper[col(t, Recourse::Dis)] = battery.p_dis_max;
      lp.lower[col(t, Recourse::Energy)] = battery.e_min;
      lp.upper[col(t, Recourse::Energy)] = battery.e_max;

      static constexpr const char* names[] = {"p_rt", "p_up", "p_op", "p_ch", "p_dis", "e"};
      for (int v = 0; v < kRecoursePerPeriod; ++v) lp.col_labels[col0 + t * kRecoursePerPeriod + v] = tag(names[v], t, w);
    }
    // terminal: E_T >= e_final
    const int term = row0 + 2 * horizon;
    trip.emplace_back(term, col(horizon - 1, Recourse::Energy), 1.0);
    lp.rhs[term] = battery.e_final;
    lp.row_sense[term] = RowSense::GreaterEqual;
    lp.row_labels[term] = "terminal[w=" + std::to_string(w + 1) + "]";
  }
};

void resize_lp(LpStandardForm& lp, int rows, int cols) {
  lp.rhs.assign(rows, 0.0);
  lp.row_sense.assign(rows, RowSense::Equal);
  lp.row_labels.assign(rows, {});
  lp.lower.assign(cols, 0.0);
  lp.upper.assign(cols, kInf);
  lp.objective.assign(cols, 0.0);
  lp.col_labels.assign(cols, {});
  lp.sense = ObjectiveSense::Maximize;
}

void check_inputs(const MarketDay& day, const BatteryContext& battery, const ScenarioSet& scenarios) {
  day.validate();
  battery.validate();
  scenarios.validate(day.horizon());
}

void allocate_recourse(SecondStageAssignment& r, int n, int horizon) {
  for (auto* v : {&r.p_rt, &r.p_up, &r.p_op, &r.p_ch, &r.p_dis, &r.energy})
    v->assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
}

void store_recourse(SecondStageAssignment& r, int w, int horizon, const std::vector<double>& x, int col0) {
  for (int t = 0; t < horizon; ++t) {
    const int base = col0 + t * kRecoursePerPeriod;
    r.p_rt[w][t] = x[base + static_cast<int>(Recourse::Rt)];
    r.p_up[w][t] = x[base + static_cast<int>(Recourse::Up)];
    r.p_op[w][t] = x[base + static_cast<int>(Recourse::Op)];
    r.p_ch[w][t] = x[base + static_cast<int>(Recourse::Ch)];
    r.p_dis[w][t] = x[base + static_cast<int>(Recourse::Dis)];
    r.energy[w][t] = x[base + static_cast<int>(Recourse::Energy)];
  }
}

}  // namespace

void MarketDay::validate() const {
  const auto t = da_price.size();
  if (t == 0) throw DimensionMismatch("market day has an empty horizon");
  if (rt_price_forecast.size() != t || wind_forecast.size() != t)
    throw DimensionMismatch("market day vectors disagree on the horizon");
  if (!wind_speed_forecast.empty() && wind_speed_forecast.size() != t)
    throw DimensionMismatch("wind speed forecast disagrees on the horizon");
  if (!all_finite(da_price) || !all_finite(rt_price_forecast) || !all_finite(wind_forecast))
    throw DataError("market day has non-finite entries");
  if (std::any_of(wind_forecast.begin(), wind_forecast.end(), [](double g) { return g < 0.0; }))
    throw DataError("wind forecast must be nonnegative");
}

void BatteryContext::validate() const {
  const double vals[] = {e_min, e_max, e_init, e_final, p_ch_max, p_dis_max, eta_ch, eta_dis};
  for (double v : vals)
    if (!std::isfinite(v)) throw DataError("battery context has non-finite entries");
  if (e_min < 0.0) throw DataError("battery e_min must be >= 0");
  if (e_init < e_min || e_init > e_max) throw DataError("battery e_init must lie in [e_min, e_max]");
  if (e_final < e_min) throw DataError("battery e_final must be >= e_min");
  if (!(eta_ch > 0.0 && eta_ch <= 1.0)) throw DataError("battery eta_ch must lie in (0, 1]");
  if (!(eta_dis > 0.0)) throw DataError("battery eta_dis must be > 0");
  if (p_ch_max < 0.0 || p_dis_max < 0.0) throw DataError("battery power limits must be >= 0");
}

void ScenarioSet::validate(int horizon) const {
  const int n = size();
  if (n < 1) throw DimensionMismatch("scenario set is empty");
  check_matrix(wind, n, horizon, "wind");
  check_matrix(rt_price, n, horizon, "rt_price");
  check_matrix(up_price, n, horizon, "up_price");
  check_matrix(op_price, n, horizon, "op_price");
  double total = 0.0;
  for (double p : prob) {
    if (!(p >= 0.0)) throw DataError("scenario probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("scenario probabilities must sum to 1");
  for (int w = 0; w < n; ++w)
    for (int t = 0; t < horizon; ++t) {
      if (wind[w][t] < 0.0) throw DataError("scenario wind must be nonnegative");
      if (up_price[w][t] < 0.0 || op_price[w][t] < 0.0) throw DataError("penalty prices must be nonnegative");
    }
}

LpStandardForm build_extensive_form(const MarketDay& day, const BatteryContext& battery,
                                    const ScenarioSet& scenarios, const MarketOptions& options) {
  check_inputs(day, battery, scenarios);
  const ExtensiveLayout layout{day.horizon(), scenarios.size()};
  const int horizon = layout.horizon;

  LpStandardForm lp;
  resize_lp(lp, layout.rows(), layout.columns());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(layout.scenarios * horizon * 11));
  for (int t = 0; t < horizon; ++t) {
    lp.objective[layout.da(t)] = day.da_price[t];
    lp.col_labels[layout.da(t)] = "p_da[t=" + std::to_string(t + 1) + "]";
  }
  BlockWriter writer{trip, lp};
  for (int w = 0; w < layout.scenarios; ++w) {
    writer.write(battery, scenarios, w, horizon, w * (2 * horizon + 1), layout.recourse(w, 0, Recourse::Rt), 0,
                 nullptr, scenarios.prob[w], options.discharge);
  }
  lp.matrix.resize(layout.rows(), layout.columns());
  lp.matrix.setFromTriplets(trip.begin(), trip.end());
  lp.matrix.makeCompressed();
  return lp;
}

LpStandardForm build_scenario_lp(const BatteryContext& battery, const ScenarioSet& scenarios, int scenario,
                                 const BidVector& bid, const MarketOptions& options) {
  const int horizon = static_cast<int>(bid.p_da.size());
  if (scenario < 0 || scenario >= scenarios.size()) throw DimensionMismatch("scenario index out of range");
  LpStandardForm lp;
  const int rows = 2 * horizon + 1;
  const int cols = horizon * kRecoursePerPeriod;
  resize_lp(lp, rows, cols);
  std::vector<Eigen::Triplet<double>> trip;
  BlockWriter writer{trip, lp};
  writer.write(battery, scenarios, scenario, horizon, 0, 0, -1, &bid.p_da, 1.0, options.discharge);
  lp.matrix.resize(rows, cols);
  lp.matrix.setFromTriplets(trip.begin(), trip.end());
  lp.matrix.makeCompressed();
  return lp;
}

SolveReport solve_second_stage(const MarketDay& day, const BatteryContext& battery, const ScenarioSet& scenarios,
                               const BidVector& bid, const MarketOptions& options) {
  check_inputs(day, battery, scenarios);
  const int horizon = day.horizon();
  if (static_cast<int>(bid.p_da.size()) != horizon) throw DimensionMismatch("bid length disagrees with the horizon");
  for (double b : bid.p_da)
    if (!(b >= 0.0) || !std::isfinite(b)) throw DataError("bid entries must be finite and nonnegative");

  const int n = scenarios.size();
  std::vector<LpResult> results(static_cast<std::size_t>(n));
  parallel_for(n, options.threads, [&](int w) {
    try {
      results[w] = solve_lp(build_scenario_lp(battery, scenarios, w, bid, options), options.simplex);
    } catch (const SolverError& e) {
      throw ScenarioSolveError(w, e.what());
    }
  });

  SolveReport report;
  report.first_stage = bid;
  allocate_recourse(report.recourse, n, horizon);
  double objective = 0.0;
  for (int t = 0; t < horizon; ++t) objective += day.da_price[t] * bid.p_da[t];
  report.status = SolveStatus::Optimal;
  for (int w = 0; w < n; ++w) {
    const LpResult& r = results[w];
    report.iterations += r.iterations;
    if (r.status != SolveStatus::Optimal) {
      // Infeasible outranks unbounded: the combined problem has no solution.
      if (report.status != SolveStatus::Infeasible) {
        report.status = r.status;
        report.failed_scenario = w;
      }
      continue;
    }
    objective += scenarios.prob[w] * r.objective;
    report.max_constraint_violation = std::max(report.max_constraint_violation, r.max_constraint_violation);
    store_recourse(report.recourse, w, horizon, r.x, 0);
  }
  report.objective = report.optimal() ? objective : std::numeric_limits<double>::quiet_NaN();
  return report;
}

SolveReport solve_full_sp(const MarketDay& day, const BatteryContext& battery, const ScenarioSet& scenarios,
                          const MarketOptions& options) {
  const LpStandardForm lp = build_extensive_form(day, battery, scenarios, options);
  const LpResult r = solve_lp(lp, options.simplex);
  const ExtensiveLayout layout{day.horizon(), scenarios.size()};

  SolveReport report;
  report.status = r.status;
  report.iterations = r.iterations;
  if (r.status != SolveStatus::Optimal) {
    report.objective = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  report.objective = r.objective;
  report.max_constraint_violation = r.max_constraint_violation;
  report.first_stage.p_da.assign(r.x.begin(), r.x.begin() + layout.horizon);
  // Simplex round-off can leave -1e-15 style values; bids are nonnegative by
  // construction.
  for (double& b : report.first_stage.p_da) b = std::max(b, 0.0);
  allocate_recourse(report.recourse, layout.scenarios, layout.horizon);
  for (int w = 0; w < layout.scenarios; ++w)
    store_recourse(report.recourse, w, layout.horizon, r.x, layout.recourse(w, 0, Recourse::Rt));
  return report;
}

FeasibilityCheck check_assignment(const BatteryContext& battery, const ScenarioSet& scenarios,
                                  const SolveReport& report, const MarketOptions& options) {
  FeasibilityCheck c;
  const auto& r = report.recourse;
  const auto& bid = report.first_stage.p_da;
  const int horizon = static_cast<int>(bid.size());
  const double dis = discharge_coeff(battery, options.discharge);
  for (int w = 0; w < scenarios.size(); ++w) {
    double prev = battery.e_init;
    for (int t = 0; t < horizon; ++t) {
      const double supply = bid[t] + r.p_rt[w][t] + r.p_op[w][t] - r.p_up[w][t] + r.p_ch[w][t] - r.p_dis[w][t];
      c.balance = std::max(c.balance, std::abs(scenarios.wind[w][t] - supply));
      const double e = r.energy[w][t];
      c.dynamics = std::max(c.dynamics, std::abs(e - prev - battery.eta_ch * r.p_ch[w][t] + dis * r.p_dis[w][t]));
      c.energy_bounds = std::max({c.energy_bounds, battery.e_min - e, e - battery.e_max});
      c.negativity = std::max({c.negativity, -r.p_rt[w][t], -r.p_up[w][t], -r.p_op[w][t], -r.p_ch[w][t],
                               -r.p_dis[w][t], r.p_ch[w][t] - battery.p_ch_max, r.p_dis[w][t] - battery.p_dis_max});
      prev = e;
    }
    c.terminal = std::max(c.terminal, battery.e_final - prev);
  }
  return c;
}

}  // namespace windbid
