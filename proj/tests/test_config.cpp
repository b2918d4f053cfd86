#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "windbid/config.hpp"
#include "windbid/errors.hpp"

using namespace windbid;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

}  // namespace

TEST_CASE("defaults carry the published constants") {
  const RunConfig c;
  CHECK(c.episode.n_scenarios == 10);
  CHECK(c.fit.price_p == 5);
  CHECK(c.fit.price_q == 2);
  CHECK(c.fit.wind_p == 3);
  CHECK(c.fit.wind_q == 0);
  CHECK(c.agent.hidden == std::vector<int>{16, 16, 16});
  CHECK(c.train.steps == 500000);
  CHECK(c.train.short_steps == 10000);
  CHECK(c.eval_episodes == 2000);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("key = value overrides") {
  const auto c = parse(
      "# comment\n"
      "seed = 42\n"
      "scenario.count = 4   # trailing comment\n"
      "agent.hidden = 8, 8\n"
      "market.discharge = divide\n"
      "battery.eta_ch_lo = 0.9\n"
      "penalty.cover_da = false\n"
      "\n");
  CHECK(c.seed == 42);
  CHECK(c.episode.n_scenarios == 4);
  CHECK(c.agent.hidden == std::vector<int>{8, 8});
  CHECK(c.market.discharge == DischargeConvention::Divide);
  CHECK(c.episode.eta_ch.lo == 0.9);
  CHECK_FALSE(c.episode.penalty.cover_da);
}

TEST_CASE("bad configuration names the line") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("seed = 1\nno_such.key = 3\n", "test.cfg:2"));
  CHECK(fails_with("agent.tau = fast\n", "agent.tau"));
  CHECK(fails_with("agent.tau = 0\n", "soft-update"));
  CHECK(fails_with("just words\n", "key = value"));
  CHECK(fails_with("scenario.count = 0\n", "scenario count"));
  CHECK(fails_with("battery.eta_ch_lo = 0.99\nbattery.eta_ch_hi = 0.9\n", "eta_ch"));
  CHECK(fails_with("data.prices = a.csv\n", "together"));
  CHECK(fails_with("curve.cut_in = 30\n", "cut"));
}

TEST_CASE("resolved entries round-trip") {
  RunConfig c;
  c.seed = 99;
  c.agent.actor_lr = 3.3e-4;
  c.episode.p_max_factor = {0.2, 0.3};
  c.data.prices = "p.csv";
  c.data.wind = "w.csv";
  std::ostringstream out;
  write_config(c, out);
  const auto back = parse(out.str());
  CHECK(config_entries(back) == config_entries(c));
  CHECK(back.agent.actor_lr == 3.3e-4);
}

TEST_CASE("file hashing") {
  const std::string path = "sha_test.txt";
  {
    std::ofstream f(path, std::ios::binary);
    f << "abc";
  }
  CHECK(sha256_file(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::remove(path.c_str());
  CHECK_THROWS_AS(sha256_file("no/such/file"), DataError);
}
