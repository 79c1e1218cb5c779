#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "malnorm/malnorm.hpp"
#include "test_support.hpp"

namespace malnorm {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  const fs::path err = testing::temp_dir() / "cli_stderr.txt";
  const std::string cmd = std::string("\"") + MALNORM_CLI_PATH + "\" " + args + " 2>\"" +
                          err.string() + "\"";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = testing::temp_dir() / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

TEST(Cli, MalOfIdentityIsZero) {
  const auto p = write_file("id3.txt", "3 3 real\n1 0 0\n0 1 0\n0 0 1\n");
  const auto r = cli("mal " + p.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("value").get<double>(), 0.0);
  EXPECT_EQ(j.at("solver"), "dense");
  EXPECT_EQ(j.at("n"), 3);
}

TEST(Cli, MalSolversAgreeOnSampledMatrix) {
  const auto p = testing::temp_dir() / "ginibre5.txt";
  ASSERT_EQ(cli("sample --kind ginibre-complex --n 5 --seed 9 --output " + p.string()).code, 0);
  const auto x = std::get<ComplexMatrix>(read_matrix_file(p.string()));
  EXPECT_EQ(x, std::get<ComplexMatrix>(sample_ensemble({EnsembleKind::ginibre_complex, 5, 9}, 0)));
  const double exact = mal_exact(x).value;
  for (const char* solver : {"dense", "lanczos", "local-opt"}) {
    const auto r = cli(std::string("mal --solver ") + solver + " " + p.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(Json::parse(r.out).at("value").get<double>(), exact, 1e-7 * exact) << solver;
  }
}

TEST(Cli, SelftestPasses) {
  const auto r = cli("selftest --instances 20");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(Json::parse(r.out).at("pass").get<bool>());
}

TEST(Cli, ConstructIsByteReproducible) {
  const auto a = cli("construct --n 8 --seed 7");
  const auto b = cli("--seed 7 construct --n 8");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = Json::parse(a.out);
  EXPECT_EQ(j.at("status"), "PASS");
  EXPECT_LE(j.at("x_opnorm").get<double>(), 9.0 + 1e-9);
  EXPECT_NE(cli("construct --n 8 --seed 8").out, a.out);
}

TEST(Cli, ExpanderReport) {
  const auto u = testing::temp_dir() / "u.txt", v = testing::temp_dir() / "v.txt";
  ASSERT_EQ(cli("sample --kind haar-unitary --n 4 --seed 1 --output " + u.string()).code, 0);
  ASSERT_EQ(cli("sample --kind haar-unitary --n 4 --seed 1 --index 1 --output " + v.string()).code, 0);
  const auto r = cli("expander " + u.string() + " " + v.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("k"), 2);
  EXPECT_LE(j.at("edge_delta").get<double>(), j.at("norm_Eh").get<double>() + 1e-9);
  EXPECT_NEAR(j.at("hastings_threshold").get<double>(), std::sqrt(3.0) / 2.0, 1e-15);
}

TEST(Cli, CampaignFitAndThreads) {
  const auto cfg = write_file("cli_campaign.cfg",
                              "ensemble = j-orthogonal\n"
                              "n_values = 4..9\n"
                              "samples_per_n = 8\n"
                              "seed = 31\n");
  const auto out1 = testing::temp_dir() / "cli_t1.jsonl", out3 = testing::temp_dir() / "cli_t3.jsonl";
  fs::remove(out1);
  fs::remove(out3);
  const auto a = cli("campaign --config " + cfg.string() + " --threads 1 --output " + out1.string());
  const auto b = cli("campaign --config " + cfg.string() + " --threads 3 --output " + out3.string());
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(out1), slurp(out3));
  EXPECT_EQ(Json::parse(a.out).at("computed"), 48);

  const auto again = cli("campaign --config " + cfg.string() + " --output " + out1.string());
  EXPECT_EQ(Json::parse(again.out).at("computed"), 0);
  EXPECT_EQ(Json::parse(again.out).at("skipped"), 48);

  const auto f = cli("fit --in " + out1.string() + " --target mean");
  ASSERT_EQ(f.code, 0) << f.err;
  const auto j = Json::parse(f.out);
  EXPECT_EQ(j.at("points").size(), 4u);
  EXPECT_EQ(j.at("min_n"), 6);
  EXPECT_TRUE(j.at("fit").contains("ci95"));
}

TEST(Cli, CloudCsvAndSvg) {
  const auto svg = testing::temp_dir() / "cloud.svg";
  const auto a = cli("cloud --kind j-unitary --n 5 --samples 3 --seed 2 --svg " + svg.string());
  const auto b = cli("cloud --kind j-unitary --n 5 --samples 3 --seed 2");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("re,im\n", 0), 0u);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 16);
  EXPECT_NE(slurp(svg).find("<circle"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  auto r = cli("");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  r = cli("frobnicate");
  EXPECT_EQ(r.code, 2);
  r = cli("sample --kind gue --n 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  r = cli("--tolerance 0 construct --n 4");
  EXPECT_EQ(r.code, 2);
  r = cli("--threads 0 selftest");
  EXPECT_EQ(r.code, 2);
  r = cli("fit --in x.jsonl --target median");
  EXPECT_EQ(r.code, 2);
  r = cli("mal /nonexistent/matrix.txt");
  EXPECT_EQ(r.code, 1);
  const auto bad = write_file("bad_unitary.txt", "2 2 real\n2 0\n0 1\n");
  r = cli("expander " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

}  // namespace
}  // namespace malnorm
