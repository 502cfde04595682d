#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "doctest.h"
#include "mixcde/mcmc.hpp"
#include "mixcde/serialize.hpp"
#include "support.hpp"

using namespace mixcde;
using testing::CommandResult;
using testing::run_command;

namespace {

std::string cli() { return MIXCDE_CLI_PATH; }

std::string quoted(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("cli: help and usage errors") {
  const CommandResult help = run_command(cli() + " --help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("simulate") != std::string::npos);
  CHECK(help.output.find("fit") != std::string::npos);
  CHECK(help.output.find("compare") != std::string::npos);
  CHECK(help.output.find("theory-check") != std::string::npos);
  CHECK(help.output.find("rate-study") != std::string::npos);

  CHECK(run_command(cli() + " frobnicate").exit_code == 2);
  CHECK(run_command(cli()).exit_code == 2);  // a subcommand is required
  CHECK(run_command(cli() + " simulate").exit_code == 2);  // --out is required
}

TEST_CASE("cli: simulate writes loadable datasets") {
  testing::TempDir dir;
  const std::string p1 = dir.file("a.csv");
  const CommandResult r1 =
      run_command(cli() + " simulate --out " + quoted(p1) + " --n 50 --seed 11");
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("wrote " + p1) != std::string::npos);
  const Dataset d1 = load_dataset_csv(p1);
  CHECK(d1.n() == 50);
  CHECK(d1.d_x() == 1);

  SUBCASE("same seed gives a byte-identical file, different seed differs") {
    const std::string p2 = dir.file("b.csv");
    run_command(cli() + " simulate --out " + quoted(p2) + " --n 50 --seed 11");
    CHECK(testing::read_file(p2) == testing::read_file(p1));
    const std::string p3 = dir.file("c.csv");
    run_command(cli() + " simulate --out " + quoted(p3) + " --n 50 --seed 12");
    CHECK(testing::read_file(p3) != testing::read_file(p1));
  }
  SUBCASE("replications spread over a directory") {
    const std::string sub = dir.file("batch");
    const CommandResult r =
        run_command(cli() + " simulate --out " + quoted(sub) + " --n 20 --replications 3");
    CHECK(r.exit_code == 0);
    const Dataset a = load_dataset_csv(sub + "/data_000.csv");
    const Dataset b = load_dataset_csv(sub + "/data_001.csv");
    const Dataset c = load_dataset_csv(sub + "/data_002.csv");
    CHECK(a.n() == 20);
    CHECK_FALSE(a.y == b.y);
    CHECK_FALSE(b.y == c.y);
  }
  SUBCASE("normal covariates and higher dimension") {
    const std::string p = dir.file("n.csv");
    const CommandResult r = run_command(cli() + " simulate --out " + quoted(p) +
                                        " --n 30 --dx 3 --covariates normal --seed 2");
    CHECK(r.exit_code == 0);
    CHECK(load_dataset_csv(p).d_x() == 3);
    CHECK(run_command(cli() + " simulate --out " + quoted(p) + " --covariates triangular")
              .exit_code == 3);
  }
}

TEST_CASE("cli: fit produces a chain and predictive curves") {
  testing::TempDir dir;
  const std::string data = dir.file("train.csv");
  REQUIRE(run_command(cli() + " simulate --out " + quoted(data) + " --n 40 --seed 5").exit_code ==
          0);

  const std::string chain_path = dir.file("chain.jsonl");
  const CommandResult fit = run_command(cli() + " fit --data " + quoted(data) + " --out " +
                                        quoted(chain_path) +
                                        " --iters 250 --burnin 50 --grid-ny 25 --seed 5");
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("200 draws") != std::string::npos);

  const Chain chain = load_chain(chain_path);
  CHECK(chain.draws.size() == 200);
  for (const MixtureTheta& t : chain.draws) t.validate();

  const std::string curves = chain_path + ".curves.csv";
  const std::string text = testing::read_file(curves);
  CHECK(text.rfind("# mixcde-curves v1\n", 0) == 0);
  CHECK(text.find("x1,y,mean,q5e-05,q0.99995\n") != std::string::npos);
  // Three default x points, 25 y points each, plus two header lines.
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 3 * 25);

  SUBCASE("custom quantiles change the curve columns") {
    const std::string c2 = dir.file("bands.csv");
    const CommandResult r = run_command(
        cli() + " fit --data " + quoted(data) + " --out " + quoted(dir.file("ch2.jsonl")) +
        " --curves " + quoted(c2) + " --iters 120 --burnin 40 --quantiles 0.1 0.9");
    CHECK(r.exit_code == 0);
    CHECK(testing::read_file(c2).find("x1,y,mean,q0.1,q0.9\n") != std::string::npos);
  }
  SUBCASE("missing data file is a runtime failure") {
    const CommandResult r = run_command(cli() + " fit --data " + quoted(dir.file("no.csv")) +
                                        " --out " + quoted(dir.file("x.jsonl")));
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("error:") != std::string::npos);
  }
}

TEST_CASE("cli: compare runs are reproducible byte for byte") {
  testing::TempDir dir;
  const std::string base = " compare --n 40 --replications 2 --iters 200 --burnin 50"
                           " --grid-ny 25 --kernel-restarts 2 --seed 3 --out ";
  const std::string c1 = dir.file("r1.csv");
  const std::string c2 = dir.file("r2.csv");
  const CommandResult r1 = run_command(cli() + base + quoted(c1));
  CHECK(r1.exit_code == 0);
  const CommandResult r2 = run_command(cli() + base + quoted(c2));
  CHECK(r2.exit_code == 0);

  const std::string t1 = testing::read_file(c1);
  CHECK(t1 == testing::read_file(c2));
  CHECK(t1.rfind("# mixcde-compare v1\n", 0) == 0);
  CHECK(t1.find("g0,d_x,n,Bayes,Kernel,B-K,%(B<K),t-stat\n") != std::string::npos);
  CHECK(t1.find("uniform,1,40,") != std::string::npos);

  // The JSON report carries per-replication detail.
  std::ifstream js(c1 + ".json");
  REQUIRE(js.good());
  nlohmann::json j;
  js >> j;
  CHECK(j.at("format") == "mixcde-compare");
  CHECK(j.at("rows").size() == 1);
  CHECK(j.at("rows")[0].at("reps").size() == 2);
  CHECK(j.at("rows")[0].at("n") == 40);
  CHECK(j.at("rows")[0].at("bayes_mean").get<double>() > 0.0);

  SUBCASE("command-line flags override the config file") {
    const std::string cfg_path = dir.file("cfg.toml");
    testing::write_file(cfg_path,
                        "n = 9999\nreplications = 2\niters = 200\nburnin = 50\n"
                        "grid_ny = 25\nkernel_restarts = 2\nseed = 3\n");
    const std::string c3 = dir.file("r3.csv");
    const CommandResult r3 = run_command(cli() + " compare --config " + quoted(cfg_path) +
                                         " --n 40 --out " + quoted(c3));
    CHECK(r3.exit_code == 0);
    CHECK(testing::read_file(c3) == t1);  // --n beat the config's n = 9999
  }
}

TEST_CASE("cli: theory checks pass and the failure path works") {
  testing::TempDir dir;
  const std::string report = dir.file("theory.json");
  const CommandResult ok = run_command(cli() + " theory-check --seed 1 --json " + quoted(report));
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("ok   contraction-rate") != std::string::npos);
  CHECK(ok.output.find("ok   covering-unit-instance") != std::string::npos);
  CHECK(ok.output.find("ok   weight-tail-bound") != std::string::npos);
  CHECK(ok.output.find("FAIL") == std::string::npos);
  CHECK(ok.output.find("all 8 checks passed") != std::string::npos);

  std::ifstream js(report);
  REQUIRE(js.good());
  nlohmann::json j;
  js >> j;
  CHECK(j.at("failures") == 0);
  CHECK(j.at("results").size() == 8);

  SUBCASE("an injected failure flips the exit code") {
    const CommandResult bad = run_command(cli() + " theory-check --seed 1 --inject-failure");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("FAIL covering-unit-instance") != std::string::npos);
    CHECK(bad.output.find("1 of 8 checks failed") != std::string::npos);
  }
}

TEST_CASE("cli: rate study produces slope estimates on a small grid") {
  testing::TempDir dir;
  const std::string out = dir.file("rate.csv");
  const CommandResult r = run_command(cli() + " rate-study --n-list 20 40 80 --replications 2" +
                                      " --iters 150 --burnin 30 --seed 9 --out " + quoted(out));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("slope") != std::string::npos);

  const std::string text = testing::read_file(out);
  CHECK(text.rfind("# mixcde-rate-study v1\n", 0) == 0);
  CHECK(text.find("n,replication,seed,mae\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2 + 6);  // 3 sizes x 2 replications

  std::ifstream js(out + ".json");
  REQUIRE(js.good());
  nlohmann::json j;
  js >> j;
  CHECK(j.at("format") == "mixcde-rate-study");
  const double slope = j.at("slope").get<double>();
  CHECK(std::isfinite(slope));
  CHECK(j.at("slope_lo").get<double>() <= slope);
  CHECK(j.at("slope_hi").get<double>() >= slope);

  SUBCASE("fewer than three sizes is rejected") {
    const CommandResult bad = run_command(cli() + " rate-study --n-list 20 40 --out " +
                                          quoted(dir.file("x.csv")));
    CHECK(bad.exit_code == 3);
  }
}
