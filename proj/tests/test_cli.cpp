#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string log = "cli_out.txt";
  const std::string cmd = std::string(WINDBID_CLI) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("solve-day on the bundled Instance A fixture prints 800") {
  const auto r = run("solve-day --episode " WINDBID_DATA "/instance_a.json --out-dir cli_tmp");
  CHECK(r.code == 0);
  CHECK(r.out.find("f_sp 800\n") != std::string::npos);
  CHECK(r.out.find("bid 10 0\n") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 2);
  CHECK(run("train --no-such-flag").code == 2);
  const auto steps = run("train --steps 0 --out-dir cli_tmp");
  CHECK(steps.code == 2);
  CHECK(steps.out.find("below batch size") != std::string::npos);
  CHECK(run("solve-day --episode missing.json --out-dir cli_tmp").code == 3);
  {
    std::ofstream bad("bad.cfg");
    bad << "agent.tau = 7\n";
  }
  CHECK(run("bench --config bad.cfg --out-dir cli_tmp").code == 3);
  {
    std::ofstream inf("infeasible.json");
    inf << slurp(WINDBID_DATA "/instance_a.json");
  }
  // Terminal energy above capacity: the SP cannot be solved.
  std::string doc = slurp("infeasible.json");
  doc.replace(doc.find("\"e_final\": 0"), 12, "\"e_final\": 5");
  doc.replace(doc.find("\"e_max\": 0"), 10, "\"e_max\": 9");
  doc.replace(doc.find("\"e_init\": 0"), 11, "\"e_init\": 4");
  {
    std::ofstream inf("infeasible.json");
    inf << doc;
  }
  CHECK(run("solve-day --episode infeasible.json --out-dir cli_tmp").code == 4);
}

TEST_CASE("evaluate twice with one seed gives identical CSVs") {
  std::filesystem::remove_all("cli_eval");
  const std::string common = " --config cli_small.cfg --seed 7 ";
  {
    std::ofstream cfg("cli_small.cfg");
    cfg << "data.synth_days = 20\nagent.batch_size = 8\ntrain.log_interval = 10\n";
  }
  REQUIRE(run("train --steps 20" + common + "--out-dir cli_eval").code == 0);
  CHECK(std::filesystem::exists("cli_eval/agent.json"));
  CHECK(std::filesystem::exists("cli_eval/agent_log.csv"));
  CHECK(std::filesystem::exists("cli_eval/manifest-train-agent.json"));
  REQUIRE(run("evaluate --episodes 6 --agent cli_eval/agent.json" + common + "--out-dir cli_eval/a").code == 0);
  REQUIRE(run("evaluate --episodes 6 --agent cli_eval/agent.json" + common + "--out-dir cli_eval/b").code == 0);
  for (const char* f : {"eval_records.csv", "summary.csv", "histogram.csv", "manifest-evaluate.json"})
    CHECK(slurp(std::string("cli_eval/a/") + f) == slurp(std::string("cli_eval/b/") + f));
  CHECK(slurp("cli_eval/a/summary.csv").find("\nrl,") != std::string::npos);

  const auto fit = run("fit-noise" + common + "--out-dir cli_eval");
  CHECK(fit.code == 0);
  CHECK(std::filesystem::exists("cli_eval/noise_models.json"));
  CHECK(run("bench --episodes 3 --models cli_eval/noise_models.json" + common + "--out-dir cli_eval/c").code == 0);
  CHECK(run("synth --days 2 --out-dir cli_eval/d").code == 0);
  CHECK(run("bench --episodes 2 --config cli_small.cfg --out-dir cli_eval/e").code == 0);
}
