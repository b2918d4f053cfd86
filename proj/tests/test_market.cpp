#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "windbid/errors.hpp"
#include "windbid/market.hpp"

using namespace windbid;

namespace {

ScenarioSet uniform_scenarios(const MarketDay& day, int n, double up, double op) {
  ScenarioSet s;
  for (int w = 0; w < n; ++w) {
    s.prob.push_back(1.0 / n);
    s.wind.push_back(day.wind_forecast);
    s.rt_price.push_back(day.rt_price_forecast);
    s.up_price.emplace_back(day.horizon(), up);
    s.op_price.emplace_back(day.horizon(), op);
  }
  return s;
}

MarketDay flat_day(int horizon) {
  MarketDay d;
  for (int t = 0; t < horizon; ++t) {
    d.da_price.push_back(30.0 + t);
    d.rt_price_forecast.push_back(35.0 - t * 0.5);
    d.wind_forecast.push_back(10.0 + (t % 5));
  }
  return d;
}

double rel_close(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("extensive form dimensions match an independent enumeration") {
  const MarketDay day = flat_day(24);
  const ScenarioSet sc = uniform_scenarios(day, 10, 80.0, 5.0);
  BatteryContext bat{0, 20, 10, 5, 5, 5, 0.95, 0.95};
  const LpStandardForm lp = build_extensive_form(day, bat, sc);

  // Enumerate symbols of the model directly.
  std::set<std::string> expected_cols;
  for (int t = 1; t <= 24; ++t) expected_cols.insert("p_da[t=" + std::to_string(t) + "]");
  std::map<std::string, int> row_kinds;
  for (int w = 1; w <= 10; ++w) {
    for (int t = 1; t <= 24; ++t) {
      for (const char* v : {"p_rt", "p_up", "p_op", "p_ch", "p_dis", "e"})
        expected_cols.insert(std::string(v) + "[t=" + std::to_string(t) + ",w=" + std::to_string(w) + "]");
      row_kinds["balance"]++;
      row_kinds["dynamics"]++;
    }
    row_kinds["terminal"]++;
  }
  int expected_rows = 0;
  for (auto& [k, n] : row_kinds) expected_rows += n;

  CHECK(lp.cols() == 1464);
  CHECK(lp.rows() == 490);
  CHECK(static_cast<int>(expected_cols.size()) == lp.cols());
  CHECK(expected_rows == lp.rows());
  CHECK(std::set<std::string>(lp.col_labels.begin(), lp.col_labels.end()) == expected_cols);
  std::map<std::string, int> seen;
  for (const auto& label : lp.row_labels) seen[label.substr(0, label.find('['))]++;
  CHECK(seen == row_kinds);
}

TEST_CASE("recourse objective coefficients carry the scenario probability") {
  const MarketDay day = flat_day(3);
  const ScenarioSet sc = uniform_scenarios(day, 10, 80.0, 5.0);
  const LpStandardForm lp = build_extensive_form(day, BatteryContext{}, sc);
  const ExtensiveLayout layout{3, 10};
  for (int w = 0; w < 10; ++w)
    for (int t = 0; t < 3; ++t) {
      CHECK(lp.objective[layout.recourse(w, t, Recourse::Rt)] == doctest::Approx(0.1 * sc.rt_price[w][t]));
      CHECK(lp.objective[layout.recourse(w, t, Recourse::Up)] == doctest::Approx(-0.1 * 80.0));
      CHECK(lp.objective[layout.recourse(w, t, Recourse::Op)] == doctest::Approx(-0.1 * 5.0));
    }
  for (int t = 0; t < 3; ++t) CHECK(lp.objective[layout.da(t)] == day.da_price[t]);
}

TEST_CASE("dimension errors") {
  const MarketDay day = flat_day(4);
  ScenarioSet sc = uniform_scenarios(day, 2, 80.0, 5.0);
  sc.wind[1].pop_back();
  CHECK_THROWS_AS(build_extensive_form(day, BatteryContext{}, sc), DimensionMismatch);
  const ScenarioSet ok = uniform_scenarios(day, 2, 80.0, 5.0);
  CHECK_THROWS_AS(solve_second_stage(day, BatteryContext{}, ok, BidVector{{1, 2}}), DimensionMismatch);
  CHECK_THROWS_AS(solve_second_stage(day, BatteryContext{}, ok, BidVector{{1, 2, -1, 0}}), DataError);
}

TEST_CASE("disabled battery keeps energy at its initial level") {
  MarketDay day = flat_day(6);
  const ScenarioSet sc = uniform_scenarios(day, 1, 80.0, 5.0);
  BatteryContext bat{3, 3, 3, 3, 0, 0, 1.0, 1.0};
  const auto r = solve_full_sp(day, bat, sc);
  REQUIRE(r.optimal());
  for (double e : r.recourse.energy[0]) CHECK(e == doctest::Approx(3.0));
}

TEST_CASE("Instance A second-stage values") {
  const auto in = oracle::instance_a();
  const auto solve = [&](std::vector<double> bid) {
    return solve_second_stage(in.day, in.battery, in.scenarios, BidVector{bid});
  };
  CHECK(solve({10, 0}).objective == doctest::Approx(800.0).epsilon(1e-9));
  CHECK(solve({10, 5}).objective == doctest::Approx(650.0).epsilon(1e-9));
  const auto over = solve({12, 0});
  CHECK(over.objective == doctest::Approx(700.0).epsilon(1e-9));
  CHECK(over.recourse.p_up[0][0] == doctest::Approx(2.0));
}

TEST_CASE("Instance B stores energy for the expensive hour") {
  const auto in = oracle::instance_b();
  const auto r = solve_second_stage(in.day, in.battery, in.scenarios, BidVector{{0, 0}});
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(1000.0).epsilon(1e-9));

  // With a costly shortfall the only way to reach 1000 is through storage.
  auto costly = in;
  costly.scenarios.up_price = {{200, 200}};
  const auto rc = solve_second_stage(costly.day, costly.battery, costly.scenarios, BidVector{{0, 0}});
  REQUIRE(rc.optimal());
  CHECK(rc.objective == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(rc.recourse.energy[0][0] == doctest::Approx(10.0));
  CHECK(rc.recourse.p_dis[0][1] == doctest::Approx(10.0));
}

TEST_CASE("full SP on the hand-built instances") {
  const auto a = oracle::instance_a();
  const auto ra = solve_full_sp(a.day, a.battery, a.scenarios);
  REQUIRE(ra.optimal());
  CHECK(ra.objective == doctest::Approx(800.0).epsilon(1e-9));
  CHECK(ra.first_stage.p_da[0] == doctest::Approx(10.0));
  CHECK(ra.first_stage.p_da[1] == doctest::Approx(0.0));

  const auto b = oracle::instance_b();
  const auto rb = solve_full_sp(b.day, b.battery, b.scenarios);
  REQUIRE(rb.optimal());
  CHECK(rb.objective == doctest::Approx(1000.0).epsilon(1e-9));
  // Zero day-ahead prices leave the bid non-unique; the zero bid is one optimum.
  CHECK(solve_second_stage(b.day, b.battery, b.scenarios, BidVector{{0, 0}}).objective ==
        doctest::Approx(rb.objective).epsilon(1e-9));
}

TEST_CASE("all prices zero gives zero objective") {
  MarketDay day = flat_day(5);
  std::fill(day.da_price.begin(), day.da_price.end(), 0.0);
  std::fill(day.rt_price_forecast.begin(), day.rt_price_forecast.end(), 0.0);
  const ScenarioSet sc = uniform_scenarios(day, 3, 0.0, 0.0);
  const auto r = solve_full_sp(day, BatteryContext{0, 5, 2, 1, 2, 2, 0.9, 0.9}, sc);
  REQUIRE(r.optimal());
  CHECK(std::abs(r.objective) <= 1e-9);
}

TEST_CASE("unreachable terminal energy is infeasible") {
  const auto in = oracle::instance_a();
  BatteryContext bat{0, 5, 0, 6, 5, 5, 1.0, 1.0};
  CHECK(solve_full_sp(in.day, bat, in.scenarios).status == SolveStatus::Infeasible);
  const auto r = solve_second_stage(in.day, bat, in.scenarios, BidVector{{0, 0}});
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK(r.failed_scenario == 0);
  CHECK(std::isnan(r.objective));
}

TEST_CASE("discharge convention changes the energy accounting") {
  auto in = oracle::instance_b();
  in.battery.eta_dis = 0.5;
  in.scenarios.up_price = {{200, 200}};
  // Multiply convention: discharging 10 MW removes 5 MWh, so 10 MWh stored can be
  // sold as 10 MW (limited by p_dis_max); divide convention yields 5 MW.
  const auto mult = solve_full_sp(in.day, in.battery, in.scenarios);
  MarketOptions divide;
  divide.discharge = DischargeConvention::Divide;
  const auto phys = solve_full_sp(in.day, in.battery, in.scenarios, divide);
  CHECK(mult.objective == doctest::Approx(1000.0));
  CHECK(phys.objective == doctest::Approx(500.0));
}

TEST_CASE("random instances: dominance, self-consistency, feasibility, scaling, parallel scenarios") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    const int horizon = 2 + trial % 7;
    const int n = 1 + trial % 4;
    const auto in = oracle::random_instance(rng, horizon, n);
    const auto full = solve_full_sp(in.day, in.battery, in.scenarios);
    REQUIRE(full.optimal());
    CHECK(full.max_constraint_violation <= 1e-6);

    const auto fc = check_assignment(in.battery, in.scenarios, full);
    CHECK(fc.balance <= 1e-6);
    CHECK(fc.dynamics <= 1e-6);
    CHECK(fc.energy_bounds <= 1e-6);
    CHECK(fc.terminal <= 1e-9 + 1e-7);
    CHECK(fc.negativity <= 1e-6);

    const auto again = solve_second_stage(in.day, in.battery, in.scenarios, full.first_stage);
    REQUIRE(again.optimal());
    CHECK(rel_close(again.objective, full.objective) <= 1e-6);

    for (int k = 0; k < 3; ++k) {
      BidVector bid;
      for (int t = 0; t < horizon; ++t) bid.p_da.push_back(u01(rng) * 1.3 * in.day.wind_forecast[t]);
      const auto r = solve_second_stage(in.day, in.battery, in.scenarios, bid);
      REQUIRE(r.optimal());
      CHECK(r.objective <= full.objective + 1e-6 * (1.0 + std::abs(full.objective)));
      const auto c = check_assignment(in.battery, in.scenarios, r);
      CHECK(c.balance <= 1e-6);
      CHECK(c.dynamics <= 1e-6);

      MarketOptions par;
      par.threads = 3;
      CHECK(solve_second_stage(in.day, in.battery, in.scenarios, bid, par).objective == r.objective);
    }

    auto scaled = in;
    const double c = 0.5 + 3.0 * u01(rng);
    for (auto& v : scaled.day.da_price) v *= c;
    for (auto* m : {&scaled.scenarios.rt_price, &scaled.scenarios.up_price, &scaled.scenarios.op_price})
      for (auto& row : *m)
        for (auto& v : row) v *= c;
    const auto fs = solve_full_sp(scaled.day, scaled.battery, scaled.scenarios);
    REQUIRE(fs.optimal());
    CHECK(rel_close(fs.objective, c * full.objective) <= 1e-6);
  }
}

TEST_CASE("relaxing the battery never lowers the optimum") {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 40; ++trial) {
    CAPTURE(trial);
    const auto in = oracle::random_instance(rng, 4 + trial % 4, 1 + trial % 3);
    const double base = solve_full_sp(in.day, in.battery, in.scenarios).objective;
    const auto relaxed = [&](auto mutate) {
      auto b = in.battery;
      mutate(b);
      const auto r = solve_full_sp(in.day, b, in.scenarios);
      REQUIRE(r.optimal());
      return r.objective;
    };
    const double tol = 1e-6 * (1.0 + std::abs(base));
    CHECK(relaxed([](BatteryContext& b) { b.e_max += 10.0; }) >= base - tol);
    CHECK(relaxed([](BatteryContext& b) { b.p_ch_max += 5.0; }) >= base - tol);
    CHECK(relaxed([](BatteryContext& b) { b.p_dis_max += 5.0; }) >= base - tol);
    CHECK(relaxed([](BatteryContext& b) { b.e_final = b.e_min; }) >= base - tol);
  }
}

TEST_CASE("lattice oracle agrees on tiny instances") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const auto in = oracle::random_small(rng, 1 + trial % 2, 1 + (trial / 2) % 2);
    const oracle::LatticeOracle lat(in);
    const auto expect = lat.full();
    const auto got = solve_full_sp(in.day, in.battery, in.scenarios);
    REQUIRE(expect.has_value());
    REQUIRE(got.optimal());
    CHECK(got.objective >= expect->value - 1e-6);
    CHECK(got.objective - expect->value <= lat.resolution_bound());

    std::vector<double> bid;
    for (int t = 0; t < in.day.horizon(); ++t) bid.push_back(std::round(in.day.wind_forecast[t] * 5.0) / 10.0);
    const auto fb = lat.fixed_bid(bid);
    const auto ss = solve_second_stage(in.day, in.battery, in.scenarios, BidVector{bid});
    REQUIRE(fb.has_value());
    CHECK(ss.objective >= *fb - 1e-6);
    CHECK(ss.objective - *fb <= lat.resolution_bound());
  }
}

TEST_CASE("debug dump of the extensive form") {
  const auto in = oracle::instance_a();
  std::ostringstream out;
  write_lp_debug(build_extensive_form(in.day, in.battery, in.scenarios), out);
  CHECK(out.str().find("terminal[w=1]") != std::string::npos);
  CHECK(out.str().find("balance[t=2,w=1]") != std::string::npos);
}
