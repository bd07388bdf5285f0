#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nlspec/cli.hpp"

namespace fs = std::filesystem;
using namespace nlspec;

namespace {
fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / name;
  fs::remove_all(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_binary(const std::string& args) {
  const int status = std::system((std::string(NLSPEC_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSpectrum = R"({
  "command": "spectrum",
  "kernel": {"family": "bump", "width": 0.3, "dim": 1},
  "domain": {"variant": "interval", "a": 0, "b": 1},
  "grid": {"n_cells": 512},
  "rayleigh": {"trials": 10},
  "output": {"csv": "s.csv", "svg": "s.svg"}
})";
}  // namespace

TEST(Run, SpectrumWritesCsvWithTraceResidual) {
  const fs::path dir = fresh_dir("cli_spectrum");
  const auto r = run_config(write_config(dir, "s.json", kSpectrum).string(), dir / "out");
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const std::string csv = slurp(dir / "out" / "s.csv");
  EXPECT_NE(csv.find("# trace_residual,"), std::string::npos);
  EXPECT_NE(csv.find("index,mu,lambda,gap,simple"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "s.svg"));
  const auto& run = std::get<SpectrumRun>(r.outcome->report);
  EXPECT_LT(run.trace_residual, 1e-10);
  EXPECT_NEAR(run.solve.spectrum.lambda1(), 0.0491, 1e-3);
}

TEST(Run, RepeatedRunsAreByteIdentical) {
  const fs::path dir = fresh_dir("cli_repeat");
  const auto cfg = write_config(dir, "s.json", kSpectrum).string();
  ASSERT_EQ(run_config(cfg, dir / "a").exit_code, 0);
  ASSERT_EQ(run_config(cfg, dir / "b").exit_code, 0);
  EXPECT_EQ(slurp(dir / "a" / "s.csv"), slurp(dir / "b" / "s.csv"));
  EXPECT_EQ(slurp(dir / "a" / "s.svg"), slurp(dir / "b" / "s.svg"));
}

TEST(Run, MalformedJsonExitsOneWithoutOutput) {
  const fs::path dir = fresh_dir("cli_malformed");
  const auto r = run_config(write_config(dir, "bad.json", R"({"command": "spectrum", )").string(), dir / "out");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("malformed JSON"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Run, UnknownFieldIsAConfigError) {
  const fs::path dir = fresh_dir("cli_unknown");
  std::string text = kSpectrum;
  text.replace(text.find("\"grid\""), 6, "\"grdi\"");
  const auto r = run_config(write_config(dir, "u.json", text).string(), dir / "out");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("grdi"), std::string::npos);
}

TEST(Run, PreconditionViolationNamesModuleAndInvariant) {
  const fs::path dir = fresh_dir("cli_precondition");
  const auto r = run_config(write_config(dir, "p.json", R"({
    "command": "perforated", "kernel": {"family": "bump", "width": 0.3, "dim": 2},
    "base": [[0, 1], [0, 1]], "hole_fraction": 0.25, "eps": [0.3, 0.15], "grid": {"n_cells": 16}})")
                                .string(),
                            dir / "out");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.message.find("experiments: eps_grid_alignment"), std::string::npos) << r.message;
}

TEST(Run, ForcedFailureExitsTwoNamingInvariant) {
  const fs::path dir = fresh_dir("cli_forced");
  const auto r = run_config(std::string(NLSPEC_SOURCE_DIR) + "/tests/data/forced_failure.json", dir);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.message.find("spectral: lambda1_in_unit_interval"), std::string::npos) << r.message;
  EXPECT_TRUE(fs::exists(dir / "forced_failure.csv"));
}

TEST(Run, KernelsConfigReportsUnitMass) {
  const fs::path dir = fresh_dir("cli_kernels");
  const auto r = run_config(std::string(NLSPEC_SOURCE_DIR) + "/configs/kernels.json", dir);
  ASSERT_EQ(r.exit_code, 0) << r.message;
  EXPECT_EQ(std::get<KernelTable>(r.outcome->report).kernels.size(), 18u);
}

TEST(Binary, ExitCodes) {
  const fs::path dir = fresh_dir("cli_binary");
  const std::string data = std::string(NLSPEC_SOURCE_DIR) + "/tests/data/";
  EXPECT_EQ(run_binary(data + "malformed.json --out-dir " + (dir / "m").string()), 1);
  EXPECT_FALSE(fs::exists(dir / "m"));
  EXPECT_EQ(run_binary(data + "forced_failure.json --out-dir " + (dir / "f").string()), 2);
  EXPECT_EQ(run_binary(data + "does_not_exist.json"), 1);
  EXPECT_EQ(run_binary(""), 1);
  EXPECT_EQ(run_binary(data + "forced_failure.json --threads 0"), 1);
  EXPECT_EQ(run_binary(std::string(NLSPEC_SOURCE_DIR) + "/configs/kernels.json --threads 2 --out-dir " +
                       (dir / "k").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "k" / "kernels.csv"));
  EXPECT_EQ(run_binary("--help"), 0);
}
