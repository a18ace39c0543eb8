#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "srlab/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> all{"srlab"};
  all.insert(all.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : all) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = srlab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("srlab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("round reports the candidates and q_r") {
  auto r = run({"round", "--value", "1.3125", "--p", "2", "--r", "1"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "q_r        = 1/2"));
  CHECK(contains(r.out, "floor_p    = 1\n"));
  CHECK(contains(r.out, "ceil_p     = 1.5\n"));

  r = run({"round", "--value", "1.5", "--p", "2", "--r", "4"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "q_r        = 0\n"));
  CHECK(contains(r.out, "deterministic"));
}

TEST_CASE("round empirical frequency") {
  const auto r = run({"round", "--value", "1.3125", "--p", "2", "--r", "3", "--samples", "8000", "--seed", "7"});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("up_freq    = ");
  REQUIRE(pos != std::string::npos);
  const double freq = std::stod(r.out.substr(pos + 13));
  CHECK(std::fabs(freq - 0.625) <= 0.02);
}

TEST_CASE("exit codes") {
  CHECK(run({"round", "--value", "1.0", "--p", "2", "--r", "1", "--bogus"}).code == 2);
  CHECK(run({"round", "--p", "2", "--r", "1"}).code == 2);
  CHECK(run({"round", "--value", "1.3", "--p", "2", "--r", "60"}).code == 2);
  CHECK(run({"round", "--value", "1e-310", "--p", "11", "--r", "3"}).code == 1);
  CHECK(run({}).code == 2);
  CHECK(run({"suggest-r", "--n", "1"}).code == 2);
  CHECK(run({"sum", "--n", "10,5", "--trials", "2"}).code == 2);
  CHECK(run({"sum", "--n", "10", "--r", "3,x"}).code == 2);
  const auto e = run({"sum", "--n", "10", "--trials", "0"});
  CHECK(e.code == 2);
  CHECK(contains(e.err, "error: "));
}

TEST_CASE("help lists every flag") {
  const auto r = run({"sum", "--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--p", "--r", "--trials", "--seed", "--threads", "--n", "--n-max", "--n-step", "--input",
                           "--out", "--config", "--no-rn"}) {
    CHECK(contains(r.out, flag));
  }
}

TEST_CASE("suggest-r") {
  CHECK(run({"suggest-r", "--n", "6000"}).out == "7\n");
  CHECK(run({"suggest-r", "--n", "64000"}).out == "8\n");
  CHECK(run({"suggest-r", "--n", "4"}).out == "1\n");
}

TEST_CASE("n grid from a maximum") {
  using V = std::vector<std::int64_t>;
  CHECK(srlab::cli::n_grid_from_max(6000, 1000) == V{2, 1000, 2000, 3000, 4000, 5000, 6000});
  CHECK(srlab::cli::n_grid_from_max(250, 100) == V{2, 100, 200, 250});
  CHECK(srlab::cli::n_grid_from_max(5, 1) == V{2, 3, 4, 5});
}

TEST_CASE("sum writes CSV files and is reproducible") {
  const fs::path a = fresh_dir("sum_a");
  const fs::path b = fresh_dir("sum_b");
  auto r = run({"sum", "--p", "11", "--r", "3,7", "--n", "10,50", "--trials", "5", "--seed", "1", "--out", a.string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "wrote 3 file(s)"));
  r = run({"sum", "--p", "11", "--r", "3,7", "--n", "10,50", "--trials", "5", "--seed", "1", "--threads", "2", "--out",
           b.string()});
  REQUIRE(r.code == 0);
  for (const char* name : {"sum_p11_rn.csv", "sum_p11_r3.csv", "sum_p11_r7.csv"}) {
    CHECK(slurp(a / name) == slurp(b / name));
  }
}

TEST_CASE("config file with flag precedence") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# comment\np = 8\nr = 2 # two bits\nvalue = 1.3125\nsamples = 0\n";
  auto r = run({"round", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "SR_{8,2}"));
  r = run({"round", "--config", cfg.string(), "--p", "2", "--r=3"});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "SR_{2,3}"));
  CHECK(contains(r.out, "q_r        = 5/8"));

  std::ofstream(dir / "bad.cfg") << "nonsense = 1\n";
  CHECK(run({"round", "--config", (dir / "bad.cfg").string()}).code == 2);
  CHECK(run({"round", "--config", (dir / "missing.cfg").string()}).code == 2);
}

TEST_CASE("dot with an input file") {
  const fs::path dir = fresh_dir("dot");
  std::ofstream(dir / "in.csv") << "1,2\n3,4\n# trailing comment\n0.5,0.5\n";
  const auto r = run({"dot", "--n", "3", "--r", "4", "--trials", "3", "--input", (dir / "in.csv").string(), "--out",
                      dir.string()});
  CHECK(r.code == 0);
  CHECK(contains(slurp(dir / "dot_p11_r4.csv"), "3,SR4,0,0"));
}

TEST_CASE("rosenbrock and bounds-table") {
  const fs::path dir = fresh_dir("rosen");
  auto r = run({"rosenbrock", "--r", "8", "--iters", "10", "--trials", "3", "--t", "0.001", "--start", "0,0", "--out",
                dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "rosenbrock_p11_binary64.csv"));
  CHECK(fs::exists(dir / "rosenbrock_p11_r8.csv"));
  r = run({"rosenbrock", "--r", "8", "--iters", "10", "--trials", "3", "--start", "0,0", "--start", "0.5,0.5", "--out",
           dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "rosenbrock-s1_p11_rn.csv"));
  CHECK(run({"rosenbrock", "--start", "0", "--out", dir.string()}).code == 2);

  r = run({"bounds-table", "--p", "11", "--lambda", "0.1", "--n-max", "6000", "--n-step", "2000", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(contains(slurp(dir / "bounds-table_p11_det.csv"), "6000,det,"));
  CHECK(run({"bounds-table", "--lambda", "2", "--n", "10", "--out", dir.string()}).code == 2);
}
