#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "windbid/errors.hpp"
#include "windbid/eval.hpp"

using namespace windbid;

namespace {

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_record(const EvalRecord& a, const EvalRecord& b) {
  if (a.episode != b.episode || a.seed != b.seed || a.policy != b.policy || a.status != b.status) return false;
  if (!same(a.f_sp, b.f_sp) || !same(a.f, b.f) || !same(a.ratio, b.ratio)) return false;
  if (a.actions.size() != b.actions.size()) return false;
  for (std::size_t t = 0; t < a.actions.size(); ++t)
    if (!same(a.actions[t], b.actions[t])) return false;
  return true;
}

EvalRecord row(std::string policy, double ratio, std::vector<double> actions = {}) {
  EvalRecord r;
  r.policy = std::move(policy);
  r.f_sp = 100.0;
  r.f = 100.0 * ratio;
  r.ratio = ratio;
  r.actions = std::move(actions);
  return r;
}

const DataSet& days() {
  static const DataSet d = synth_data(30, 17);
  return d;
}

std::shared_ptr<const Agent> untrained_agent() {
  AgentConfig cfg;
  cfg.seed = 5;
  return std::make_shared<const Agent>(make_agent(cfg, 77, 24));
}

}  // namespace

TEST_CASE("benchmark rule") {
  const auto in = oracle::instance_a();
  CHECK(benchmark_bid(in.day).p_da == std::vector<double>{10, 0});
  auto tie = in.day;
  tie.rt_price_forecast = tie.da_price;
  CHECK(benchmark_bid(tie).p_da == std::vector<double>{0, 0});
  auto calm = in.day;
  calm.wind_forecast = {0, 0};
  CHECK(benchmark_bid(calm).p_da == std::vector<double>{0, 0});
  CHECK(zero_bid(in.day).p_da == std::vector<double>{0, 0});
  CHECK(full_bid(in.day).p_da == std::vector<double>{10, 5});

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 80.0);
  for (int k = 0; k < 200; ++k) {
    MarketDay d;
    for (int t = 0; t < 6; ++t) {
      d.da_price.push_back(u(rng) - 10);
      d.rt_price_forecast.push_back(u(rng) - 10);
      d.wind_forecast.push_back(u(rng) / 8);
    }
    const auto b = benchmark_bid(d);
    for (int t = 0; t < 6; ++t) {
      CHECK(b.p_da[t] >= 0.0);
      CHECK(b.p_da[t] <= d.wind_forecast[t]);
    }
    for (int t = 0; t < 6; ++t) d.rt_price_forecast[t] = d.da_price[t] + u(rng);
    CHECK(benchmark_bid(d).p_da == zero_bid(d).p_da);
  }
}

TEST_CASE("SP bid policy reproduces the SP optimum") {
  const auto sampler = data_sampler({}, days(), fixture::simple_models());
  EvalOptions opt;
  opt.n_episodes = 12;
  opt.seed = 3;
  const auto recs = evaluate({sp_policy()}, sampler, opt);
  REQUIRE(recs.size() == 24);
  for (const auto& r : recs) {
    if (r.status != EvalStatus::Ok) continue;
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(evaluate({zero_policy(kSpPolicy)}, sampler, opt), ConfigError);
  opt.n_episodes = 0;
  CHECK_THROWS_AS(evaluate({}, sampler, opt), ConfigError);
}

TEST_CASE("evaluation is deterministic and thread-independent") {
  const auto sampler = data_sampler({}, days(), fixture::simple_models());
  const std::vector<Policy> policies{benchmark_policy(), zero_policy(), agent_policy("rl", untrained_agent())};
  EvalOptions opt;
  opt.n_episodes = 8;
  opt.seed = 7;
  const auto a = evaluate(policies, sampler, opt);
  opt.threads = 3;
  const auto b = evaluate(policies, sampler, opt);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_record(a[i], b[i]));
}

TEST_CASE("no policy beats the stochastic program") {
  const auto sampler = data_sampler({}, days(), fixture::simple_models());
  const std::vector<Policy> policies{benchmark_policy(), zero_policy(), full_policy(),
                                     agent_policy("rl", untrained_agent())};
  EvalOptions opt;
  opt.n_episodes = 40;
  opt.seed = 11;
  const auto recs = evaluate(policies, sampler, opt);
  long ok = 0;
  for (const auto& r : recs) {
    if (r.status == EvalStatus::SpFailed) continue;
    CHECK(r.f <= r.f_sp + 1e-6 * (1 + std::abs(r.f_sp)));
    if (r.status == EvalStatus::Ok && r.policy != kSpPolicy) {
      CHECK(r.ratio <= 1.0 + 1e-6);
      ++ok;
    }
  }
  CHECK(ok >= 100);
}

TEST_CASE("summaries") {
  SUBCASE("single row") {
    const auto s = summarize({row("a", 0.9)});
    REQUIRE(s.size() == 1);
    CHECK(s[0].mean_ratio == 0.9);
    CHECK(s[0].median_ratio == 0.9);
    CHECK(s[0].share_within_95 == 0.0);
    CHECK(s[0].share_below_85 == 0.0);
  }
  SUBCASE("all optimal") {
    const auto s = summarize({row("a", 1.0), row("a", 1.0), row("a", 1.0)});
    CHECK(s[0].share_within_95 == 1.0);
  }
  SUBCASE("constant actions fill one bin") {
    const auto s = summarize({row("a", 1.0, std::vector<double>(24, 0.5))});
    CHECK(std::count_if(s[0].action_hist.begin(), s[0].action_hist.end(), [](long c) { return c > 0; }) == 1);
    CHECK(s[0].action_hist[10] == 24);
  }
  SUBCASE("decisions above one go to the overflow bin") {
    const auto s = summarize({row("a", 1.0, {1.0, 1.7, 0.0, std::nan("")})});
    CHECK(s[0].action_hist[19] == 1);
    CHECK(s[0].action_hist[20] == 1);
    CHECK(s[0].action_hist[0] == 1);
    CHECK(s[0].mean_action == doctest::Approx(2.7 / 3));
  }
  SUBCASE("failures and exclusions are counted, not averaged") {
    auto failed = row("a", 0.0);
    failed.status = EvalStatus::PolicyFailed;
    auto excluded = row("a", 0.0);
    excluded.status = EvalStatus::Excluded;
    const auto s = summarize({row("a", 0.8), row("a", 0.6), failed, excluded, row("b", 0.5)});
    REQUIRE(s.size() == 2);
    CHECK(s[0].episodes == 2);
    CHECK(s[0].failed == 1);
    CHECK(s[0].excluded == 1);
    CHECK(s[0].mean_ratio == doctest::Approx(0.7));
    CHECK(s[0].median_ratio == doctest::Approx(0.7));
    CHECK(s[0].share_below_85 == 1.0);
    CHECK(s[1].policy == "b");
  }
  SUBCASE("order does not matter") {
    std::vector<EvalRecord> recs;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 101; ++k) recs.push_back(row("a", u(rng), {u(rng), u(rng)}));
    const auto s1 = summarize(recs);
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto s2 = summarize(recs);
    CHECK(s1[0].mean_ratio == s2[0].mean_ratio);
    CHECK(s1[0].median_ratio == s2[0].median_ratio);
    CHECK(s1[0].mean_action == s2[0].mean_action);
    CHECK(s1[0].ratio_hist == s2[0].ratio_hist);
  }
  CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("bin edges") {
  CHECK(action_bin(0.0) == 0);
  CHECK(action_bin(0.05) == 1);
  CHECK(action_bin(0.15) == 3);
  CHECK(action_bin(1.0) == 19);
  CHECK(action_bin(1.0 + 1e-12) == 19);
  CHECK(action_bin(1.01) == 20);
  CHECK(ratio_bin(-0.2) == 0);
  CHECK(ratio_bin(0.0) == 1);
  CHECK(ratio_bin(1.0) == 20);
  CHECK(ratio_bin(1.5) == 21);
}

TEST_CASE("records survive a CSV round trip") {
  const auto sampler = data_sampler({}, days(), fixture::simple_models());
  EvalOptions opt;
  opt.n_episodes = 5;
  const auto recs = evaluate({benchmark_policy(), full_policy()}, sampler, opt);
  std::stringstream csv;
  write_records_csv(recs, csv);
  const auto back = read_records_csv(csv);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(same_record(recs[i], back[i]));

  const auto s = summarize(recs);
  std::ostringstream sum, hist;
  write_summary_csv(s, sum);
  write_histogram_csv(s, hist);
  CHECK(sum.str()[0] == '#');
  CHECK(hist.str().find("action,bench,1,inf,") != std::string::npos);

  std::istringstream bad("episode,seed,policy\n");
  CHECK_THROWS_AS(read_records_csv(bad), SchemaError);
}
