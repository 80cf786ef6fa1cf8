// Exercises the built command-line binary end to end. The binary path comes
// from the PHYLODIV_BIN environment variable (set by ctest).

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string binary_path() {
  const char* bin = std::getenv("PHYLODIV_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PHYLODIV_BIN must point at the CLI binary");
  return bin;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

CommandResult run_command(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "cmd_output.txt";
  const std::string cmd =
      "cd '" + dir.string() + "' && '" + binary_path() + "' " + args + " > '" + out.string() +
      "' 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  result.output = ss.str();
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE_MESSAGE(is.good(), "missing file: " << path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("phylodiv_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

constexpr const char* kSmallRunArgs =
    "--problem exploration --selection lexicase --pop_size 16 --generations 30 "
    "--genome_length 6 --record_interval 10 --seed 5";

}  // namespace

TEST_CASE("cli run: missing config file fails with a diagnostic") {
  TempDir tmp;
  const auto result = run_command("run --config does_not_exist.cfg", tmp.path);
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("does_not_exist.cfg") != std::string::npos);
}

TEST_CASE("cli run: bad config key fails naming the key") {
  TempDir tmp;
  std::ofstream(tmp.path / "bad.cfg") << "pop_size = banana\n";
  const auto result = run_command("run --config bad.cfg", tmp.path);
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("pop_size") != std::string::npos);
}

TEST_CASE("cli run: config file plus flag overrides, generations 0 gives one record") {
  TempDir tmp;
  std::ofstream(tmp.path / "run.cfg") << "problem = exploration\n"
                                      << "pop_size = 10\n"
                                      << "generations = 50\n"
                                      << "genome_length = 5\n"
                                      << "seed = 2\n";
  const auto result = run_command("run --config run.cfg --generations 0", tmp.path);
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp(tmp.path / "timeseries.csv");
  // header plus exactly one record
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find("\n0,") != std::string::npos);
}

TEST_CASE("cli run: identical invocations produce identical outputs") {
  TempDir tmp;
  const std::string args = std::string(kSmallRunArgs) +
                           " --timeseries_path a.csv --snapshot_path a_phylo.csv";
  REQUIRE(run_command("run " + args, tmp.path).exit_code == 0);
  const std::string first_ts = slurp(tmp.path / "a.csv");
  const std::string first_ph = slurp(tmp.path / "a_phylo.csv");
  REQUIRE(run_command("run " + args, tmp.path).exit_code == 0);
  CHECK(slurp(tmp.path / "a.csv") == first_ts);
  CHECK(slurp(tmp.path / "a_phylo.csv") == first_ph);
}

TEST_CASE("cli batch: replicates, manifest, reruns identical") {
  TempDir tmp;
  const std::string args = std::string("batch ") + kSmallRunArgs +
                           " --replicates 3 --seed-base 40 --outdir reps --jobs 2";
  REQUIRE(run_command(args, tmp.path).exit_code == 0);
  const std::string manifest = slurp(tmp.path / "reps/manifest.txt");
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 3);
  CHECK(manifest.find("40") != std::string::npos);
  CHECK(manifest.find("41") != std::string::npos);
  CHECK(manifest.find("42") != std::string::npos);
  for (const int seed : {40, 41, 42}) {
    CHECK(fs::exists(tmp.path / ("reps/rep_" + std::to_string(seed) + "_timeseries.csv")));
    CHECK(fs::exists(tmp.path / ("reps/rep_" + std::to_string(seed) + "_phylogeny.csv")));
  }
  const std::string rep40 = slurp(tmp.path / "reps/rep_40_timeseries.csv");
  const std::string rep41 = slurp(tmp.path / "reps/rep_41_timeseries.csv");
  CHECK(rep40 != rep41);  // distinct seeds

  REQUIRE(run_command(args, tmp.path).exit_code == 0);
  CHECK(slurp(tmp.path / "reps/manifest.txt") == manifest);
  CHECK(slurp(tmp.path / "reps/rep_40_timeseries.csv") == rep40);

  // a one-replicate batch is equivalent to a plain run at the same seed
  REQUIRE(run_command(std::string("run ") + kSmallRunArgs +
                          " --seed 40 --timeseries_path solo.csv --snapshot_path solo_phylo.csv",
                      tmp.path)
              .exit_code == 0);
  CHECK(slurp(tmp.path / "solo.csv") == rep40);
  CHECK(slurp(tmp.path / "solo_phylo.csv") == slurp(tmp.path / "reps/rep_40_phylogeny.csv"));
}

TEST_CASE("cli analyze: unknown column lists available ones") {
  TempDir tmp;
  REQUIRE(run_command(std::string("run ") + kSmallRunArgs, tmp.path).exit_code == 0);
  const auto result =
      run_command("analyze timeseries.csv --pair bogus_column:best_fitness --lags 10", tmp.path);
  CHECK(result.exit_code != 0);
  CHECK(result.output.find("bogus_column") != std::string::npos);
  CHECK(result.output.find("mpd_mean") != std::string::npos);  // lists the header
}

TEST_CASE("cli analyze: self-pair smoke run and manifest batch analysis") {
  TempDir tmp;
  REQUIRE(run_command(std::string("batch ") + kSmallRunArgs +
                          " --replicates 3 --seed-base 7 --outdir b --jobs 2",
                      tmp.path)
              .exit_code == 0);

  // a series against itself at lag 10 computes without error
  auto result = run_command(
      "analyze b/rep_7_timeseries.csv --pair best_fitness:best_fitness --lags 10", tmp.path);
  CHECK(result.exit_code == 0);

  // manifest of 3 replicates: 3 rows per (direction, lag); two directions
  result = run_command(
      "analyze --manifest b/manifest.txt --pair mpd_mean:best_fitness --lags 10,20 "
      "--te-out te.csv --spearman-out sp.csv",
      tmp.path);
  REQUIRE(result.exit_code == 0);
  const std::string te = slurp(tmp.path / "te.csv");
  CHECK(std::count(te.begin(), te.end(), '\n') == 1 + 3 * 2 * 2);
  CHECK(te.find("replicate,source,target,lag,te_nats") == 0);
  const std::string sp = slurp(tmp.path / "sp.csv");
  CHECK(std::count(sp.begin(), sp.end(), '\n') == 1 + 3);
}
