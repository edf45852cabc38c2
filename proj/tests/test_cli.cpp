#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout and stderr merged.
Run lyaplab(const std::string& args) {
  const std::string cmd = std::string("\"") + LYAPLAB_CLI + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lyaplab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string out_dir() const { return (dir_ / "out").string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ExperimentWritesAReport) {
  const auto cfg = write("ex.toml", "[experiment]\nkind = \"example_bound\"\n[knobs]\nmax_period = 6\n");
  const auto r = lyaplab("experiment example_bound --config " + cfg + " --seed 7 --out " + out_dir());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS AC2 periodic_lower_bound"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(fs::path(out_dir()) / "example_bound-seed7.json"));
}

TEST_F(Cli, CsvFormatOverride) {
  const auto cfg = write("ex.toml", "seed = 2\n[experiment]\nkind = \"example_bound\"\n[knobs]\nmax_period = 4\n");
  const auto r = lyaplab("experiment example_bound --config " + cfg + " --format csv --out " + out_dir());
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream in(fs::path(out_dir()) / "example_bound-seed2.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "path,value");
}

TEST_F(Cli, MalformedConfigExitsTwoWithLocation) {
  const auto cfg = write("bad.toml", "seed = 1\n[experiment]\nkind = \"example_bound\"\n[subshift]\ntheta = 2.0\n");
  const auto r = lyaplab("experiment example_bound --config " + cfg + " --out " + out_dir());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.toml:5"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("subshift.theta"), std::string::npos) << r.out;
}

TEST_F(Cli, UnknownFieldAndSyntaxErrorsExitTwo) {
  const auto typo = write("typo.toml", "seed = 1\nsed = 2\n");
  const auto r1 = lyaplab("periodic --config " + typo + " --out " + out_dir());
  EXPECT_EQ(r1.code, 2);
  EXPECT_NE(r1.out.find("typo.toml:2"), std::string::npos) << r1.out;
  const auto broken = write("broken.toml", "seed = [1,\n");
  EXPECT_EQ(lyaplab("periodic --config " + broken).code, 2);
  EXPECT_EQ(lyaplab("experiment not_a_kind --seed 1").code, 2);
  EXPECT_EQ(lyaplab("estimate --format xml --seed 1").code, 2);
  EXPECT_EQ(lyaplab("").code, 2);
}

TEST_F(Cli, EstimateCsvRow) {
  const auto cfg = write("diag.toml",
                         "seed = 1\n[cocycle]\ntype = \"constant\"\nmatrix = [[2.0, 0.0], [0.0, 0.5]]\n"
                         "[knobs]\nn = 200\nsamples = 3\n");
  const auto r = lyaplab("estimate --config " + cfg + " --format csv --out " + out_dir());
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream in(fs::path(out_dir()) / "estimate-seed1.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "gamma_1,gamma_2,se_1,se_2,n,samples,seed");
  EXPECT_EQ(row.rfind("0.693147180559", 0), 0u) << row;
  EXPECT_NE(row.find(",-0.693147180559"), std::string::npos) << row;
}

TEST_F(Cli, SameSeedSameHash) {
  const auto cfg = write("s.toml", "[knobs]\nmax_order = 4\nkingman_samples = 100\n");
  const auto a = lyaplab("experiment semicontinuity --config " + cfg + " --seed 5 --out " + out_dir());
  const auto b = lyaplab("experiment semicontinuity --config " + cfg + " --seed 5 --out " + out_dir());
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  const auto hash = [](const std::string& s) { return s.substr(s.rfind(" hash ") + 6); };
  EXPECT_EQ(hash(a.out), hash(b.out));
  const auto c = lyaplab("experiment semicontinuity --config " + cfg + " --seed 6 --out " + out_dir());
  EXPECT_NE(hash(a.out), hash(c.out));
}

TEST_F(Cli, FailedVerdictExitsOne) {
  // an unattainable tolerance makes the convergence verdict fail
  const auto cfg = write("strict.toml",
                         "seed = 11\n[cocycle]\ntype = \"random_locally_constant\"\ndimension = 2\nseed = 3\n"
                         "[knobs]\nn = 2000\nsamples = 4\nlevels = [1, 2]\ntolerance = 1e-12\n");
  const auto r = lyaplab("experiment main_theorem --config " + cfg + " --out " + out_dir());
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("FAIL AC4 final_error"), std::string::npos) << r.out;
}
