#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pass/experiment.hpp"
#include "pass/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace pass;

namespace {

std::string cli() {
  const char* path = std::getenv("PASS_CLI");
  REQUIRE_MESSAGE(path != nullptr, "PASS_CLI must point at the pass_cli binary");
  return path;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pass_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI with `args`, stderr captured into `err_file` when given.
int run(const std::string& args, const fs::path& err_file = {}) {
  std::string cmd = "\"" + cli() + "\" " + args + " > /dev/null";
  cmd += err_file.empty() ? " 2> /dev/null" : " 2> \"" + err_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

}  // namespace

TEST_CASE("simulate: four files, byte-identical rerun, config hash in manifest") {
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  const std::string args = "simulate --scenario I --n 100 --N 2000 --p 200 --seed 7 --test-size 500";
  REQUIRE(run(args + " --out " + a.string()) == 0);
  REQUIRE(run(args + " --out " + b.string()) == 0);
  int count = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++count;
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(count == 4);
  const Json manifest = read_json(a / "manifest.json");
  ExperimentConfig cfg;
  cfg.scenario = "I";
  cfg.n = 100;
  cfg.N = 2000;
  cfg.p = 200;
  cfg.seed = 7;
  cfg.test_size = 500;
  cfg.out = a.string();
  CHECK(manifest.at("config_hash").get<std::string>() == hex64(config_hash(cfg)));
  CHECK(manifest.at("seed").get<std::uint64_t>() == 7);
}

TEST_CASE("usage and config errors exit 1") {
  const fs::path d = scratch("usage");
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("simulate --scenario iii --p 10 --n 10 --N 50 --out " + d.string()) == 1);
  std::ofstream(d / "bad.json") << "{\"scenario\": \"I\", \"no_such_key\": 1}";
  CHECK(run("simulate --config " + (d / "bad.json").string() + " --out " + d.string()) == 1);
}

TEST_CASE("data errors exit 2") {
  const fs::path d = scratch("data_err");
  CHECK(run("fit --real-data /nonexistent.csv --method lasso --out " + d.string()) == 2);
  // Labeled-only data: ULASSO needs unlabeled rows.
  REQUIRE(run("simulate --scenario I --n 200 --N 200 --p 12 --seed 3 --test-size 0 --out " +
              d.string()) == 0);
  CHECK(run("fit --real-data " + (d / "train.csv").string() + " --method ulasso --out " +
            (d / "fit").string()) == 2);
}

TEST_CASE("fit: PASS has nonzero rho in most seeds; the alpha cache is hit on rerun") {
  int nonzero = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const fs::path d = scratch("fit_" + std::to_string(seed));
    REQUIRE(run("fit --scenario I --n 100 --N 2000 --p 200 --method pass --seed " +
                std::to_string(seed) + " --out " + d.string()) == 0);
    const Json model = read_json(d / "model.json");
    if (model.at("rho").get<double>() != 0.0) ++nonzero;
    if (seed == 1) {
      CHECK_FALSE(model.at("alpha_cache_hit").get<bool>());
      REQUIRE(run("fit --scenario I --n 100 --N 2000 --p 200 --method pass --seed 1 --out " +
                      d.string(),
                  d / "stderr.txt") == 0);
      CHECK(slurp(d / "stderr.txt").find("cache hit") != std::string::npos);
      CHECK(read_json(d / "model.json").at("alpha_cache_hit").get<bool>());
    }
  }
  CHECK(nonzero >= 15);
}

TEST_CASE("fit then evaluate on simulated files") {
  const fs::path d = scratch("fit_eval");
  REQUIRE(run("simulate --scenario I --n 100 --N 600 --p 20 --seed 4 --test-size 400 --out " +
              d.string()) == 0);
  REQUIRE(run("fit --real-data " + (d / "train.csv").string() + " --method lasso --out " +
              (d / "fit").string()) == 0);
  REQUIRE(run("evaluate --model " + (d / "fit" / "model.json").string() + " --test " +
              (d / "test.csv").string() + " --truth " + (d / "truth.json").string() +
              " --out " + (d / "eval").string()) == 0);
  const Json m = read_json(d / "eval" / "metrics.json");
  CHECK(m.at("auc").get<double>() > 0.6);
  CHECK(m.contains("er"));
  CHECK(m.contains("mse_p"));
  CHECK(m.contains("bss"));
  CHECK(m.at("truth").get<std::string>() == "exact");
}

TEST_CASE("bench: one row per replicate x method x metric, paired folds, outputs") {
  const fs::path d = scratch("bench");
  REQUIRE(run("bench --scenario I --n 60 --N 300 --p 10 --test-size 200 --reps 2 --seed 4 "
              "--method lasso --method pass --out " + d.string()) == 0);
  std::istringstream csv(slurp(d / "results.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "replicate,method,metric,value,n,N,p,scenario,seed");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2 * 2 * 3);
  const Json summary = read_json(d / "summary.json");
  CHECK(summary.at("paired_folds").get<bool>());
  for (const char* f : {"config.json", "manifest.json", "boxplot_auc.svg"})
    CHECK(fs::exists(d / f));
}

TEST_CASE("bench: results CSV identical across thread counts; flags override the config") {
  const fs::path d = scratch("determinism");
  std::ofstream(d / "cfg.json")
      << R"({"scenario": "II", "n": 60, "N": 300, "p": 10, "test_size": 100, "reps": 3,
             "seed": 9, "methods": ["lasso", "ss_prior", "pass"], "threads": 1})";
  const std::string base = "bench --config " + (d / "cfg.json").string() + " --no-svg";
  REQUIRE(run(base + " --out " + (d / "t1").string()) == 0);
  REQUIRE(run(base + " --threads 3 --out " + (d / "t3").string()) == 0);
  CHECK(slurp(d / "t1" / "results.csv") == slurp(d / "t3" / "results.csv"));
  CHECK(read_json(d / "t3" / "config.json").at("threads").get<int>() == 3);
  CHECK_FALSE(fs::exists(d / "t1" / "boxplot_auc.svg"));
}

TEST_CASE("bench: failure threshold maps to exit code 3") {
  BenchResult r;
  r.replicates.resize(10);
  r.failed_replicates = 1;
  CHECK_FALSE(r.over_failure_threshold(0.1));
  r.failed_replicates = 2;
  CHECK(r.over_failure_threshold(0.1));

  // ss_prior without unlabeled rows fails every replicate.
  const fs::path d = scratch("fail");
  std::ofstream(d / "cfg.json") << R"({"scenario": "I", "n": 30, "N": 30, "p": 10,
      "test_size": 50, "reps": 2, "seed": 1, "methods": ["ss_prior"], "n_folds": 5})";
  CHECK(run("bench --config " + (d / "cfg.json").string() + " --no-svg --out " +
            (d / "o").string()) == 3);
}

TEST_CASE("config round trip and hash ignores threads") {
  ExperimentConfig cfg;
  cfg.scenario = "VI";
  cfg.methods = {"lasso", "lasso_200", "pass"};
  cfg.kappa_grid = {1.0, 3.0};
  const ExperimentConfig back = config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  ExperimentConfig threaded = cfg;
  threaded.threads = 8;
  CHECK(config_hash(threaded) == config_hash(cfg));
  ExperimentConfig other = cfg;
  other.seed = 2;
  CHECK(config_hash(other) != config_hash(cfg));
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK(parse_method_name("lasso_200").labels == 200);
  CHECK_THROWS_AS(parse_method_name("lasso_x"), ConfigError);
}
