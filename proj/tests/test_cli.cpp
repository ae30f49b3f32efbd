#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "wg_cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "wgcli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = wgcli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) v.push_back(l);
  return v;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("wgcli_test_" + name)).string();
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
  const Result r = call({"condition", "--frob"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(call({"two-level", "--smoother", "jacobi"}).code, 2);
  EXPECT_EQ(call({"mesh-info", "--family", "type3"}).code, 2);
  EXPECT_EQ(call({"mesh-info", "--family", "type2", "--degree", "2"}).code, 2);
  EXPECT_EQ(call({"mesh-info", "--levels", "-1"}).code, 2);
  EXPECT_EQ(call({"two-level", "--m", "1,x"}).code, 2);
  EXPECT_EQ(call({"two-level", "--tol", "2"}).code, 2);
  EXPECT_EQ(call({"mesh-info", "--config", temp_path("missing.cfg")}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const Result r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("two-level"), std::string::npos);
}

TEST(Cli, MeshInfo) {
  const Result r = call({"mesh-info", "--levels", "2"});
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], "level,vertices,edges,boundary_edges,cells,h,interior_unknowns,face_unknowns,unknowns");
  EXPECT_EQ(l[1], "0,13,28,8,16,0.5,16,40,56");
  const Result t = call({"mesh-info", "--pattern", "two-triangle", "--family", "type1", "--levels", "0"});
  EXPECT_EQ(lines(t.out)[1], "0,4,5,4,2,1.4142135623730951,2,1,3");
}

TEST(Cli, TwoLevelIsDeterministic) {
  const std::vector<std::string> args{"two-level", "--levels", "2", "--m", "1,3", "--seed", "9"};
  const Result a = call(args), b = call(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto l = lines(a.out);
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[1].rfind("0,1,sgs,exact,", 0), 0u);
  EXPECT_EQ(l[6].rfind("2,3,sgs,exact,", 0), 0u);
}

TEST(Cli, MultiLevelStartsAtLevelOne) {
  const Result r = call({"multi-level", "--levels", "2", "--m", "2", "--smoother", "richardson"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[1].rfind("1,2,richardson,vcycle,", 0), 0u);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const std::string cfg = temp_path("run.cfg");
  {
    std::ofstream f(cfg);
    f << "# sweep\nlevels = 1\nm=2\nfamily=type1\n";
  }
  const Result a = call({"two-level", "--config", cfg});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(lines(a.out).size(), 3u);
  const Result b = call({"two-level", "--config", cfg, "--levels", "0"});
  ASSERT_EQ(lines(b.out).size(), 2u);
  EXPECT_EQ(lines(b.out)[1], lines(a.out)[1]);
  {
    std::ofstream f(cfg);
    f << "levels=1\ncolour=blue\n";
  }
  EXPECT_EQ(call({"mesh-info", "--config", cfg}).code, 2);
  std::remove(cfg.c_str());
}

TEST(Cli, OutputFileAndTable) {
  const std::string path = temp_path("cond.csv");
  const Result r = call({"condition", "--levels", "1", "--out", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(lines(ss.str()).size(), 3u);
  EXPECT_EQ(ss.str().rfind("level,h,unknowns,lambda_min,lambda_max,kappa", 0), 0u);
  std::remove(path.c_str());

  const Result t = call({"mesh-info", "--levels", "0", "--table"});
  EXPECT_EQ(lines(t.out)[0].find(','), std::string::npos);
  EXPECT_EQ(lines(t.out)[1].rfind("    0", 0), 0u);
}

TEST(Cli, ExportMatrix) {
  const Result r = call({"export-matrix", "--pattern", "two-triangle"});
  ASSERT_EQ(r.code, 0);
  const auto l = lines(r.out);
  EXPECT_EQ(l[0], "%%MatrixMarket matrix coordinate real symmetric");
  EXPECT_EQ(l[1].rfind("4 4 ", 0), 0u);
}

TEST(Cli, VerifyPasses) {
  const Result r = call({"verify", "--levels", "2"});
  EXPECT_EQ(r.code, 0) << r.out;
  const auto l = lines(r.out);
  EXPECT_EQ(l.size(), 18u);
  for (const auto& s : l) EXPECT_EQ(s.rfind("PASS ", 0), 0u) << s;
}

TEST(Cli, NumericalFailureExitsOne) {
  // the error contracts geometrically, so this target needs more than the iteration cap
  const Result r = call({"two-level", "--levels", "0", "--m", "1", "--tol", "1e-300"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("did not converge"), std::string::npos);
}
