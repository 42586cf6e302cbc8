#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "polytrope/output.hpp"

using namespace polytrope;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

OutputRecord run_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  const auto r = run(args);
  EXPECT_EQ(r.code, 0) << r.err;
  return parse_json_record(r.out);
}

std::vector<double> numbers(const OutputRecord& rec, const std::string& name) {
  const auto* c = rec.find(name);
  EXPECT_NE(c, nullptr) << name;
  std::vector<double> v;
  if (c) {
    for (const auto& cell : c->values) v.push_back(std::get<double>(cell));
  }
  return v;
}

double meta(const OutputRecord& rec, const std::string& key) {
  for (const auto& [k, v] : rec.metadata) {
    if (k == key) return std::get<double>(v);
  }
  ADD_FAILURE() << "missing metadata " << key;
  return std::nan("");
}

}  // namespace

TEST(CliSolve, IndexThreeEndsAtSurface) {
  const auto rec = run_json({"solve", "--n", "3"});
  const auto xi = numbers(rec, "xi");
  const auto th = numbers(rec, "theta");
  EXPECT_NEAR(xi.back(), 6.897, 1e-3);
  EXPECT_NEAR(th.back(), 0.0, 1e-12);
  EXPECT_EQ(numbers(rec, "m_over_M").back(), 1.0);
  EXPECT_EQ(meta(rec, "tol"), 1e-10);
  for (const char* col : {"dtheta", "u", "v", "w", "z", "omega", "rho_over_rho_c", "r_over_R"}) {
    EXPECT_NE(rec.find(col), nullptr) << col;
  }
}

TEST(CliSolve, IndexFiveMatchesClosedForm) {
  const auto rec = run_json({"solve", "--n", "5", "--grid", "0:20"});
  const auto xi = numbers(rec, "xi");
  const auto th = numbers(rec, "theta");
  ASSERT_EQ(xi.size(), 201u);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    EXPECT_NEAR(th[i], 1.0 / std::sqrt(1.0 + xi[i] * xi[i] / 3.0), 1e-9);
  }
}

TEST(CliSolve, UniformDensityHasNoDensityGradient) {
  const auto rec = run_json({"solve", "--n", "0"});
  for (double w : numbers(rec, "w")) EXPECT_EQ(w, 0.0);
}

TEST(CliSolve, IndexOneOmitsOmega) {
  const auto rec = run_json({"solve", "--n", "1", "--grid", "0:3:4"});
  EXPECT_EQ(rec.find("omega"), nullptr);
}

TEST(CliSolve, GridErrors) {
  EXPECT_EQ(run({"solve", "--n", "3", "--grid", "0:7"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--n", "3", "--grid", "2:1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--n", "3", "--grid", "0:1:x"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--n", "7"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--n", "3", "--tol", "1e-3"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve"}).code, cli::kExitUsage);
}

TEST(CliTable1, DefaultRows) {
  const auto rec = run_json({"table1"});
  const auto n = numbers(rec, "n");
  ASSERT_EQ(n.size(), 8u);
  const auto& om = rec.find("omega0")->values;
  EXPECT_EQ(std::get<std::string>(om[1]), "...");
  EXPECT_TRUE(std::isnan(std::get<double>(rec.find("xi1")->values[7])));  // inf -> null
}

TEST(CliTable1, SingleIndices) {
  auto rec = run_json({"table1", "--n-list", "2"});
  EXPECT_NEAR(numbers(rec, "xi1")[0], 4.353, 5e-4);
  EXPECT_NEAR(numbers(rec, "rho_c_over_rho_mean")[0], 11.403, 5e-4);
  rec = run_json({"table1", "--n-list", "4.5"});
  EXPECT_NEAR(numbers(rec, "xi1")[0], 31.836, 5e-4);
  EXPECT_NEAR(numbers(rec, "omega0")[0], 0.394, 5e-4);
}

TEST(CliApprox, PadeZeroAndErrors) {
  const auto rec = run_json({"approx", "--n", "3", "--kinds", "all"});
  EXPECT_NEAR(meta(rec, "pade_zero"), 6.921, 1e-3);
  const auto xi = numbers(rec, "xi");
  const auto err = numbers(rec, "taylor10_error");
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] > 2.5) {
      EXPECT_GT(std::abs(err[i]), 0.1) << xi[i];
    }
  }
  EXPECT_NE(rec.find("picard_overestimates"), nullptr);
}

TEST(CliApprox, PicardExactForUniformDensity) {
  const auto rec = run_json({"approx", "--n", "0", "--kinds", "picard"});
  for (double e : numbers(rec, "picard_error")) EXPECT_NEAR(e, 0.0, 1e-9);
}

TEST(CliApprox, PadeNeedsIndexThree) {
  const auto r = run({"approx", "--n", "2", "--kinds", "pade"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("n = 3"), std::string::npos);
}

TEST(CliNoether, IndexFiveChargeVanishes) {
  const auto rec = run_json({"noether", "--n", "5"});
  for (double g : numbers(rec, "g")) EXPECT_LT(std::abs(g), 1e-8);
}

TEST(CliNoether, IndexThreeResidual) {
  const auto rec = run_json({"noether", "--n", "3"});
  EXPECT_LT(meta(rec, "max_residual"), 1e-6);
}

TEST(CliNoether, IndexOneIsUsageError) {
  const auto r = run({"noether", "--n", "1"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("omega undefined for n=1"), std::string::npos);
}

TEST(CliAstro, Chandrasekhar) {
  const auto rec = run_json({"astro", "chandrasekhar", "--mu-e", "2"});
  EXPECT_NEAR(numbers(rec, "mass_msun")[0], 1.456, 0.005 * 1.456);
}

TEST(CliAstro, Eddington) {
  const auto rec = run_json({"astro", "eddington", "--mass", "18.3", "--mu", "1"});
  EXPECT_NEAR(numbers(rec, "beta")[0], 0.7245, 1e-3);
}

TEST(CliAstro, EntropyGradientVanishesForAdiabaticIndex) {
  const auto rec = run_json({"astro", "entropy", "--n", "1.5"});
  EXPECT_NEAR(numbers(rec, "dS_gas_dlogP")[0], 0.0, 1e-12);
}

TEST(CliAstro, ConstantsFile) {
  const std::string path = ::testing::TempDir() + "cli_constants.txt";
  std::ofstream(path) << "M_sun = 2e30\n";
  const auto a = run_json({"astro", "chandrasekhar"});
  const auto b = run_json({"astro", "chandrasekhar", "--constants", path});
  EXPECT_NEAR(numbers(b, "mass_msun")[0] / numbers(a, "mass_msun")[0], 1.98841 / 2.0, 1e-12);
  EXPECT_EQ(run({"astro", "chandrasekhar", "--constants", "/nonexistent"}).code, cli::kExitUsage);
}

TEST(Cli, EveryCommandReportsTolerance) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"solve", "--n", "2", "--tol", "1e-9"},
           {"table1", "--n-list", "3", "--tol", "1e-9"},
           {"approx", "--n", "3", "--tol", "1e-9"},
           {"noether", "--n", "3", "--tol", "1e-9"},
           {"astro", "chandrasekhar", "--tol", "1e-9"},
           {"astro", "eddington", "--mass", "1", "--tol", "1e-9"},
           {"astro", "entropy", "--tol", "1e-9"}}) {
    EXPECT_EQ(meta(run_json(args), "tol"), 1e-9) << args[0];
  }
}

TEST(Cli, CsvIsDeterministicAndHonoursDigits) {
  const auto a = run({"solve", "--n", "1.5", "--digits", "6"});
  const auto b = run({"solve", "--n", "1.5", "--digits", "6"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\n0.0182688,0.999944,-0.00608928,"), std::string::npos);
  EXPECT_EQ(run({"solve", "--n", "1.5", "--digits", "20"}).code, cli::kExitUsage);
}

TEST(Cli, WritesToFile) {
  const std::string path = ::testing::TempDir() + "cli_out.csv";
  const auto r = run({"table1", "--n-list", "3", "--out", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first, "# schema_version=1");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--n", "3", "--format", "xml"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}
