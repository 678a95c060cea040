#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef RBB_CLI_PATH
#error "RBB_CLI_PATH must point at the rbb executable"
#endif

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rbb_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CommandResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command = std::string(RBB_CLI_PATH) + " " + args + " > " +
                              out.string() + " 2> " + err.string();
  const int status = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

std::vector<std::string> csv_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_CASE("simulate on two nodes keeps every load at one") {
  const fs::path dir = scratch_dir("two_nodes");
  const fs::path out = dir / "run";
  const CommandResult r =
      run_cli("simulate --n 2 --rounds 10 --trace --out " + out.string(), dir);
  CHECK(r.exit_code == 0);
  const std::vector<std::string> lines = csv_lines(out / "run.csv");
  REQUIRE(lines.size() == 12);
  CHECK(lines[0] == "round,max_load,empty_fraction,legitimate,fault,process");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t a = lines[i].find(',');
    const std::size_t b = lines[i].find(',', a + 1);
    CHECK(lines[i].substr(a + 1, b - a - 1) == "1");
  }
}

TEST_CASE("zero-round simulate writes exactly the initial row") {
  const fs::path dir = scratch_dir("zero_rounds");
  const fs::path out = dir / "run";
  const CommandResult r = run_cli("simulate --n 4 --rounds 0 --out " + out.string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(csv_lines(out / "run.csv").size() == 2);
}

TEST_CASE("identical simulate invocations produce identical artifacts") {
  const fs::path dir = scratch_dir("repeatable");
  const std::string base =
      "simulate --n 6 --rounds 40 --strategy random --trace --seed 99 --out ";
  const CommandResult a = run_cli(base + (dir / "a").string(), dir);
  const CommandResult b = run_cli(base + (dir / "b").string(), dir);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(slurp(dir / "a" / "run.jsonl") == slurp(dir / "b" / "run.jsonl"));
  CHECK(slurp(dir / "a" / "run.csv") == slurp(dir / "b" / "run.csv"));
  CHECK_FALSE(slurp(dir / "a" / "run.jsonl").empty());
}

TEST_CASE("usage errors exit with code 2") {
  const fs::path dir = scratch_dir("usage_errors");
  CHECK(run_cli("simulate --n 4 --bogus 3", dir).exit_code == 2);
  CHECK(run_cli("simulate --n 4 --topology torus", dir).exit_code == 2);
  CHECK(run_cli("simulate --n 4 --placement pile:3", dir).exit_code == 2);
  CHECK(run_cli("simulate --n 4 --placement point:9", dir).exit_code == 2);
  CHECK(run_cli("simulate --n 4 --faults periodic:0:uniform_reshuffle", dir).exit_code == 2);
  CHECK(run_cli("simulate --n 1", dir).exit_code == 2);
  CHECK(run_cli("sweep --preset nope --out " + (dir / "o").string(), dir).exit_code == 2);
}

TEST_CASE("empty sweep config is a usage error") {
  const fs::path dir = scratch_dir("empty_config");
  const fs::path cfg = dir / "empty.cfg";
  std::ofstream(cfg) << "# nothing to do\n; still nothing\n";
  const CommandResult r =
      run_cli("sweep " + cfg.string() + " --out " + (dir / "o").string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("no experiments defined") != std::string::npos);
}

TEST_CASE("unwritable output directory exits with code 3") {
  const fs::path dir = scratch_dir("unwritable");
  const fs::path blocker = dir / "blocker";
  std::ofstream(blocker) << "file\n";
  const CommandResult r =
      run_cli("simulate --n 4 --out " + (blocker / "sub").string(), dir);
  CHECK(r.exit_code == 3);
}

TEST_CASE("sweep writes one results row per repetition and a summary") {
  const fs::path dir = scratch_dir("sweep_tiny");
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << "[cli_tiny]\n"
                        "topology = complete\n"
                        "n = 4, 6\n"
                        "m = n\n"
                        "rounds = 3n\n"
                        "repetitions = 3\n"
                        "seed = 12\n";
  const fs::path out = dir / "out";
  const CommandResult first =
      run_cli("sweep " + cfg.string() + " --out " + out.string(), dir);
  CHECK(first.exit_code == 0);
  CHECK(first.out.find("cli_tiny") != std::string::npos);
  REQUIRE(fs::exists(out / "results.csv"));
  CHECK(csv_lines(out / "results.csv").size() == 7);
  REQUIRE(fs::exists(out / "summary_cli_tiny.json"));
  const nlohmann::json summary = nlohmann::json::parse(slurp(out / "summary_cli_tiny.json"));
  CHECK(summary.at("experiment") == "cli_tiny");
  CHECK(summary.at("cells").size() == 2);
  const std::string original = slurp(out / "results.csv");

  const CommandResult resumed =
      run_cli("sweep " + cfg.string() + " --out " + out.string(), dir);
  CHECK(resumed.exit_code == 0);
  CHECK(resumed.out.find("skipped") != std::string::npos);
  CHECK(slurp(out / "results.csv") == original);

  const CommandResult forced =
      run_cli("sweep " + cfg.string() + " --out " + out.string() + " --force", dir);
  CHECK(forced.exit_code == 0);
  CHECK(forced.out.find("skipped") == std::string::npos);
  CHECK(slurp(out / "results.csv") == original);
}

TEST_CASE("sweep output does not depend on the worker count") {
  const fs::path dir = scratch_dir("sweep_workers");
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << "[workers]\n"
                        "topology = complete\n"
                        "n = 8\n"
                        "m = n\n"
                        "rounds = 2n\n"
                        "repetitions = 6\n"
                        "seed = 3\n";
  const CommandResult one = run_cli(
      "sweep " + cfg.string() + " --out " + (dir / "w1").string() + " --workers 1", dir);
  const CommandResult eight = run_cli(
      "sweep " + cfg.string() + " --out " + (dir / "w8").string() + " --workers 8", dir);
  CHECK(one.exit_code == 0);
  CHECK(eight.exit_code == 0);
  CHECK(slurp(dir / "w1" / "results.csv") == slurp(dir / "w8" / "results.csv"));
  CHECK(slurp(dir / "w1" / "summary_workers.json") ==
        slurp(dir / "w8" / "summary_workers.json"));
}

TEST_CASE("report summarizes a results file") {
  const fs::path dir = scratch_dir("report");
  const fs::path cfg = dir / "tiny.cfg";
  std::ofstream(cfg) << "[rep_demo]\n"
                        "topology = complete\n"
                        "n = 4, 6\n"
                        "m = n\n"
                        "rounds = 3n\n"
                        "repetitions = 3\n"
                        "seed = 12\n";
  const fs::path out = dir / "out";
  REQUIRE(run_cli("sweep " + cfg.string() + " --out " + out.string(), dir).exit_code == 0);

  const CommandResult r = run_cli("report " + (out / "results.csv").string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("rep_demo: 6 runs") != std::string::npos);
  CHECK(r.out.find("converged 6/6") != std::string::npos);
  CHECK(r.out.find("median convergence time") != std::string::npos);
}

TEST_CASE("report handles an empty results file") {
  const fs::path dir = scratch_dir("report_empty");
  const fs::path results = dir / "results.csv";
  std::ofstream(results)
      << "experiment,seed,n,m,topology,strategy,alpha,convergence_time,convergence_censored,"
         "stability_horizon,stability_censored,parallel_cover_time,cover_censored,"
         "min_progress,max_load_overall,mean_empty_fraction,process\n";
  const CommandResult r = run_cli("report " + results.string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("no runs") != std::string::npos);
}

TEST_CASE("report rejects a foreign schema") {
  const fs::path dir = scratch_dir("report_schema");
  const fs::path results = dir / "results.csv";
  std::ofstream(results) << "wrong,header\n1,2\n";
  const CommandResult r = run_cli("report " + results.string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("schema mismatch") != std::string::npos);
}

TEST_CASE("presets are listed, shown and exported") {
  const fs::path dir = scratch_dir("presets");
  const CommandResult list = run_cli("presets", dir);
  CHECK(list.exit_code == 0);
  for (const char* name :
       {"coupon_collector", "memoryless_steady_state", "stability", "convergence_linearity",
        "parallel_cover", "fifo_progress", "early_load_floor", "dominating_growth",
        "fault_recovery", "more_balls", "ring"}) {
    CHECK(list.out.find(name) != std::string::npos);
  }

  const CommandResult show = run_cli("presets --show coupon_collector", dir);
  CHECK(show.exit_code == 0);
  CHECK(show.out.find("[coupon_collector]") != std::string::npos);
  CHECK(show.out.find("process = single_ball") != std::string::npos);
  CHECK(run_cli("presets --show nope", dir).exit_code == 2);

  const CommandResult exported = run_cli("presets --write " + (dir / "cfg").string(), dir);
  CHECK(exported.exit_code == 0);
  CHECK(fs::exists(dir / "cfg" / "coupon_collector.cfg"));
  CHECK(slurp(dir / "cfg" / "coupon_collector.cfg") == show.out);
}

TEST_CASE("cover subcommand reports the empirical walk statistics") {
  const fs::path dir = scratch_dir("cover");
  const fs::path csv = dir / "cover.csv";
  const CommandResult r =
      run_cli("cover --n 8 --runs 20 --seed 3 --csv " + csv.string(), dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("mean cover time") != std::string::npos);
  CHECK(r.out.find("analytic mean") != std::string::npos);
  const std::vector<std::string> lines = csv_lines(csv);
  REQUIRE(lines.size() == 21);
  CHECK(lines[0] == "run,cover_time");
}

TEST_CASE("baseline subcommand runs the comparison processes") {
  const fs::path dir = scratch_dir("baseline");
  const CommandResult memoryless = run_cli(
      "baseline --process memoryless --n 50 --rounds 100 --out " + (dir / "m").string(), dir);
  CHECK(memoryless.exit_code == 0);
  CHECK(fs::exists(dir / "m" / "run.csv"));

  const CommandResult dominating = run_cli(
      "baseline --process dominating --n 16 --m n --rounds 64 --out " + (dir / "d").string(),
      dir);
  CHECK(dominating.exit_code == 0);

  const CommandResult walk = run_cli(
      "baseline --process single_ball --n 16 --rounds 4000 --out " + (dir / "s").string(),
      dir);
  CHECK(walk.exit_code == 0);

  CHECK(run_cli("baseline --process base --n 16 --out " + (dir / "b").string(), dir)
            .exit_code == 2);
}
