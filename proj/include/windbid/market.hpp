#pragma once

#include <vector>

#include "windbid/lp.hpp"

namespace windbid {

// Hourly context of a single bidding day.
struct MarketDay {
  std::vector<double> da_price;             // currency/MWh
  std::vector<double> rt_price_forecast;    // currency/MWh
  std::vector<double> wind_forecast;        // MWh
  std::vector<double> wind_speed_forecast;  // m/s; optional, needed only for scenario generation

  int horizon() const { return static_cast<int>(da_price.size()); }
  void validate() const;
};

enum class DischargeConvention { Multiply, Divide };

struct BatteryContext {
  double e_min = 0.0;
  double e_max = 0.0;
  double e_init = 0.0;
  double e_final = 0.0;
  double p_ch_max = 0.0;
  double p_dis_max = 0.0;
  double eta_ch = 1.0;
  double eta_dis = 1.0;

  // Throws DataError on a violated range. e_final > e_max is allowed through
  // so that the LP reports it as infeasible.
  void validate() const;
};

// Per-scenario realizations; matrices are indexed [scenario][t].
struct ScenarioSet {
  std::vector<double> prob;
  std::vector<std::vector<double>> wind;
  std::vector<std::vector<double>> rt_price;
  std::vector<std::vector<double>> up_price;
  std::vector<std::vector<double>> op_price;

  int size() const { return static_cast<int>(prob.size()); }
  void validate(int horizon) const;
};

struct BidVector {
  std::vector<double> p_da;
};

// Recourse values indexed [scenario][t].
struct SecondStageAssignment {
  std::vector<std::vector<double>> p_rt, p_up, p_op, p_ch, p_dis, energy;
};

struct SolveReport {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  BidVector first_stage;
  SecondStageAssignment recourse;
  long iterations = 0;
  double max_constraint_violation = 0.0;
  int failed_scenario = -1;  // set when a decomposed solve stops on a scenario

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct MarketOptions {
  DischargeConvention discharge = DischargeConvention::Multiply;
  SimplexOptions simplex;
  int threads = 1;  // scenario-level parallelism for solve_second_stage
};

// Column layout of the extensive form: the T day-ahead columns come first,
// then six recourse columns per (scenario, t) in the order below.
enum class Recourse { Rt = 0, Up = 1, Op = 2, Ch = 3, Dis = 4, Energy = 5 };
inline constexpr int kRecoursePerPeriod = 6;

struct ExtensiveLayout {
  int horizon = 0;
  int scenarios = 0;
  int da(int t) const { return t; }
  int recourse(int w, int t, Recourse v) const {
    return horizon + (w * horizon + t) * kRecoursePerPeriod + static_cast<int>(v);
  }
  int columns() const { return horizon + scenarios * horizon * kRecoursePerPeriod; }
  int rows() const { return scenarios * (2 * horizon + 1); }
};

LpStandardForm build_extensive_form(const MarketDay& day, const BatteryContext& battery,
                                    const ScenarioSet& scenarios, const MarketOptions& options = {});

// Deterministic single-scenario LP with the day-ahead bid fixed; its objective
// excludes the day-ahead revenue and is not probability weighted.
LpStandardForm build_scenario_lp(const BatteryContext& battery, const ScenarioSet& scenarios, int scenario,
                                 const BidVector& bid, const MarketOptions& options = {});

SolveReport solve_second_stage(const MarketDay& day, const BatteryContext& battery, const ScenarioSet& scenarios,
                               const BidVector& bid, const MarketOptions& options = {});

SolveReport solve_full_sp(const MarketDay& day, const BatteryContext& battery, const ScenarioSet& scenarios,
                          const MarketOptions& options = {});

// Residuals of the balance and battery-dynamics equations for a report.
struct FeasibilityCheck {
  double balance = 0.0;
  double dynamics = 0.0;
  double energy_bounds = 0.0;
  double terminal = 0.0;
  double negativity = 0.0;
};
FeasibilityCheck check_assignment(const BatteryContext& battery, const ScenarioSet& scenarios,
                                  const SolveReport& report, const MarketOptions& options = {});

}  // namespace windbid
