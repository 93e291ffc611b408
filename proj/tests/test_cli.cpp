#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "strkern_cli_test";

/// Runs the CLI with stdout/stderr captured to files; returns the exit code.
int strkern(const std::string& args) {
  const std::string cmd = std::string(STRKERN_BIN) + " " + args + " > " +
                          (kWork / "stdout.txt").string() + " 2> " +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out() { return slurp(kWork / "stdout.txt"); }

fs::path only_run(const fs::path& dir) {
  fs::path found;
  for (const auto& e : fs::directory_iterator(dir / "runs")) found = e.path();
  return found;
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workspace() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE("end-to-end pipeline through the command line") {
  Workspace ws;
  const auto corpus = (kWork / "c.jsonl").string();
  REQUIRE(strkern("synth --output " + corpus +
                  " --train 40 --valid 20 --test 20 --length 25 --plant ZORGLUB --seed 4") == 0);
  CHECK(strkern("stats --corpus " + corpus) == 0);
  CHECK(out().find("train") != std::string::npos);

  const auto base_dir = kWork / "base";
  const auto da_dir = kWork / "da";
  REQUIRE(strkern("run --corpus " + corpus + " --ngrams 3,4 --lambdas 0.1,0.01 --workers 1 --out " +
                  base_dir.string()) == 0);
  CHECK(out().find("PBSK") != std::string::npos);
  REQUIRE(strkern("run --corpus " + corpus + " --ngrams 3,4 --lambdas 0.1,0.01 --workers 1 --da --out " +
                  da_dir.string()) == 0);
  CHECK(out().find("+ DA") != std::string::npos);

  const auto base_run = only_run(base_dir);
  const auto da_run = only_run(da_dir);
  CHECK(strkern("compare " + base_run.string() + " " + da_run.string() +
                " --name-a PBSK --name-b PBSK+DA") == 0);
  CHECK(out().find("McNemar") != std::string::npos);
  CHECK(strkern("compare " + base_run.string() + " " + (base_run / "report.json").string()) == 0);
  CHECK(out().find("statistic=0") != std::string::npos);

  const auto curves_dir = kWork / "curves";
  CHECK(strkern("curves " + da_run.string() + " --out " + curves_dir.string()) == 0);
  CHECK(fs::exists(curves_dir / "baseline_lambda_curve.tsv"));

  CHECK(strkern("explain --run " + base_run.string() + " --corpus " + corpus + " --top 10") == 0);
  const auto ngrams = slurp(base_run / "ngrams.tsv");
  CHECK(ngrams.rfind("class\trank\tfeature\tscore\n", 0) == 0);
  CHECK(ngrams.find("satirical\t1\t") != std::string::npos);

  SUBCASE("rerun yields the same report apart from timing") {
    auto before = nlohmann::json::parse(slurp(base_run / "report.json"));
    REQUIRE(strkern("run --corpus " + corpus + " --ngrams 3,4 --lambdas 0.1,0.01 --workers 3 --out " +
                    base_dir.string()) == 0);
    auto after = nlohmann::json::parse(slurp(base_run / "report.json"));
    before.erase("timing");
    after.erase("timing");
    CHECK(before == after);
  }

  SUBCASE("config file") {
    std::ofstream(kWork / "run.toml") << "corpus = \"" << corpus << "\"\n"
                                      << "ngrams = [3]\nlambdas = [0.1]\nrepresentation = \"hisk\"\n";
    CHECK(strkern("run --config " + (kWork / "run.toml").string()) == 0);
    CHECK(out().find("HISK (n=3)") != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  Workspace ws;
  const auto corpus = (kWork / "c.jsonl").string();
  REQUIRE(strkern("synth --output " + corpus + " --train 20 --valid 10 --test 10") == 0);

  CHECK(strkern("") == 2);
  CHECK(strkern("run --corpus " + corpus + " --representation rbf") == 2);
  CHECK(strkern("run --corpus " + corpus + " --representation dense") == 2);
  CHECK(strkern("run --corpus " + corpus + " --ngrams 0") == 2);
  CHECK(strkern("run --corpus " + corpus + " --lambdas -1") == 2);
  CHECK(strkern("--help") == 0);

  CHECK(strkern("run --corpus " + (kWork / "missing.jsonl").string()) == 3);
  std::ofstream(kWork / "bad.jsonl") << "{not json\n";
  CHECK(strkern("stats --corpus " + (kWork / "bad.jsonl").string()) == 3);
  CHECK(slurp(kWork / "stderr.txt").find("line 1") != std::string::npos);
  std::ofstream(kWork / "cross.jsonl")
      << R"({"id":"1","title":"t","body":"b","label":"regular","source":"A","split":"train"})" << "\n"
      << R"({"id":"2","title":"t","body":"b","label":"regular","source":"A","split":"test"})" << "\n";
  CHECK(strkern("stats --corpus " + (kWork / "cross.jsonl").string()) == 3);

  std::ofstream(kWork / "bad.fsdm") << "FSDM v9 1 1\nx\t1\n";
  CHECK(strkern("run --corpus " + corpus + " --representation dense --dense " +
                (kWork / "bad.fsdm").string()) == 3);

  // features that cannot be solved for at any lambda
  {
    std::ofstream nan_file(kWork / "nan.fsdm");
    nan_file << "FSDM v1 40 2\n";
    for (int i = 0; i < 40; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "syn-%06d", i);
      nan_file << id << "\tnan 1\n";
    }
  }
  CHECK(strkern("run --corpus " + corpus + " --representation dense --dense " +
                (kWork / "nan.fsdm").string()) == 4);
  const auto lock_dir = kWork / "locked";
  fs::create_directories(lock_dir);
  std::ofstream(lock_dir / ".lock") << "1\n";
  CHECK(strkern("run --corpus " + corpus + " --ngrams 3 --out " + lock_dir.string()) == 2);
}
