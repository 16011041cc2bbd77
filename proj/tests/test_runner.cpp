// Copyright 2026 The jcsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "jcsim/runner.hpp"

namespace jcsim {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(testing::TempDir()) / ("jcsim_" + name);
  fs::remove_all(d);
  return d;
}

TEST(Config, FlatTextWithCommentsAndAngles) {
  const RunConfig c = RunConfig::parse(
      "# comment\n"
      "system.g_mhz = 11.3  # trailing\n"
      "givens.thetas = 0, pi/4, 3pi/4, pi\n"
      "open_system = false\n");
  EXPECT_DOUBLE_EQ(c.real("system.g_mhz", 0.0), 11.3);
  const auto th = c.reals("givens.thetas", {});
  ASSERT_EQ(th.size(), 4u);
  EXPECT_DOUBLE_EQ(th[2], 0.75 * kPi);
  EXPECT_FALSE(c.flag("open_system", true));
  EXPECT_DOUBLE_EQ(c.real("missing", 2.5), 2.5);
  EXPECT_TRUE(c.unused().empty());
}

TEST(Config, JsonMirrorFlattens) {
  const RunConfig c = RunConfig::parse(R"({"system": {"chi_mhz": 1.7}, "givens": {"thetas": [0, "pi/2"]}, "seed": 4})");
  EXPECT_DOUBLE_EQ(c.real("system.chi_mhz", 0.0), 1.7);
  EXPECT_DOUBLE_EQ(c.reals("givens.thetas", {})[1], kPi / 2);
  EXPECT_EQ(c.seed("seed", 0), 4u);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(RunConfig::parse("a = 1\na = 2\n"), Error);
  EXPECT_THROW(RunConfig::parse("no equals sign\n"), Error);
  EXPECT_THROW(RunConfig::parse("{bad json"), Error);
  const RunConfig c = RunConfig::parse("x = 1.5q\nb = maybe\nn = 2.5\n");
  EXPECT_THROW(c.real("x", 0.0), Error);
  EXPECT_THROW(c.flag("b", false), Error);
  EXPECT_THROW(c.integer("n", 0), Error);
  EXPECT_EQ(parse_real("-0.5pi"), -0.5 * kPi);
}

TEST(Config, MissingFileIsAConfigError) {
  const RunConfig c = RunConfig::parse("calibration.table = /nonexistent/table.csv\n");
  try {
    (void)setup_from(c);
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(Config, ErrorSetsFormAMonotoneChain) {
  const ChannelToggles a = parse_error_set("pulse-length"), b = parse_error_set("t1"), c = parse_error_set("all");
  EXPECT_FALSE(a.transmon_loss || a.dephasing || a.cavity_loss);
  EXPECT_TRUE(b.transmon_loss && b.cavity_loss && !b.dephasing);
  EXPECT_TRUE(c.transmon_loss && c.cavity_loss && c.dephasing);
  EXPECT_THROW(parse_error_set("some"), Error);
}

TEST(Hash, Fnv1aReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
}

TEST(Runner, NoopWritesNothing) {
  const fs::path d = fresh_dir("noop");
  const RunReport r = run_protocol("noop", RunConfig{}, d.string(), 0, true);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_FALSE(fs::exists(d));
}

TEST(Runner, UnknownProtocolAndKeysAreConfigErrors) {
  EXPECT_EQ(run_protocol("frobnicate", RunConfig{}, fresh_dir("x").string(), 0, false).exit_code, kExitConfig);
  const RunReport r = run_protocol("spectrum", RunConfig::parse("spectrum.nmax = 3\n"), fresh_dir("y").string(), 0, false);
  EXPECT_EQ(r.exit_code, kExitConfig);
  EXPECT_NE(r.message.find("spectrum.nmax"), std::string::npos);
  EXPECT_NE(r.message.find("spectrum:"), std::string::npos);
}

TEST(Runner, SpectrumSummaryListsHashedFiles) {
  const fs::path d = fresh_dir("spectrum");
  const RunReport r = run_protocol("spectrum", RunConfig{}, d.string(), 0, true);
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  const auto s = nlohmann::json::parse(slurp(d / "summary.json"));
  EXPECT_EQ(s["protocol"], "spectrum");
  ASSERT_EQ(s["files"].size(), 2u);
  for (const auto& f : s["files"]) {
    const std::string body = slurp(d / f["name"].get<std::string>());
    EXPECT_EQ(f["fnv1a64"], hex64(fnv1a64(body)));
    EXPECT_EQ(f["bytes"], body.size());
  }
  for (const auto& c : s["checks"]) EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
  EXPECT_LT(s["results"]["max_level_relative_error"].get<double>(), 1e-10);
}

TEST(Runner, ToleranceMissGivesExitFour) {
  // the unoptimized initial guess misses the ideal-fidelity bound
  const RunConfig c = RunConfig::parse(
      "target = sup:0:1,2:1\nsim.cavity_levels = 4\nreconstruct = false\nmultitone.max_iterations = 0\n");
  const fs::path d = fresh_dir("miss");
  EXPECT_EQ(run_protocol("multitone", c, d.string(), 0, true).exit_code, kExitTolerance);
  EXPECT_TRUE(fs::exists(d / "summary.json"));
  EXPECT_EQ(run_protocol("multitone", c, fresh_dir("miss2").string(), 0, false).exit_code, kExitOk);
}

TEST(Runner, HardwareCsvColumns) {
  const fs::path d = fresh_dir("hardware");
  const RunReport r = run_protocol("hardware", RunConfig::parse("squid.points = 11\nfilter.points = 5\n"), d.string(), 0, true);
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  std::istringstream sp(slurp(d / "squid_spectrum.csv"));
  std::string header;
  std::getline(sp, header);
  EXPECT_EQ(header, "phi_over_phi0,freq_GHz,sens_GHz_per_Phi0");
  std::istringstream fs_(slurp(d / "filter_s21.csv"));
  std::getline(fs_, header);
  EXPECT_EQ(header, "freq_GHz,s21_dB");
  const auto s = nlohmann::json::parse(slurp(d / "summary.json"));
  EXPECT_NEAR(s["results"]["ec_GHz"].get<double>(), 0.12086, 1e-5);
}

TEST(Runner, TomographyThenReconstructRoundTrip) {
  const fs::path d = fresh_dir("tomo");
  const RunConfig c = RunConfig::parse("target = fock:1\ngrid.points = 11\ntomography.measured = false\n");
  ASSERT_EQ(run_protocol("tomography", c, d.string(), 0, false).exit_code, kExitOk);
  const fs::path cfg = d / "rec.cfg";
  std::ofstream(cfg) << "reconstruct.input = wigner_exact.csv\ntarget = fock:1\nbayes.repetitions = 100000\n";
  const fs::path out = fresh_dir("rec");
  const RunReport r = run_protocol("reconstruct", RunConfig::load(cfg.string()), out.string(), 0, false);
  ASSERT_EQ(r.exit_code, kExitOk) << r.message;
  const auto s = nlohmann::json::parse(slurp(out / "summary.json"));
  EXPECT_NEAR(s["results"]["reconstruction"]["li_fidelity"].get<double>(), 1.0, 1e-9);
  EXPECT_GT(s["results"]["reconstruction"]["fidelity_mean"].get<double>(), 0.99);
  EXPECT_EQ(s["results"]["fidelity_line"].get<std::string>().rfind("F = ", 0), 0u);
}

TEST(Runner, IdenticalSeedsGiveIdenticalBytes) {
  const RunConfig c = RunConfig::parse(
      "target = sup:0:1,1:1\nsim.hamiltonian = jc\nsim.cavity_levels = 4\ngrid.points = 9\nbayes.samples = 64\n"
      "bayes.thinning = 8\nbayes.burn_in = 500\nerrors = all\n");
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  ASSERT_EQ(run_protocol("prepare", c, a.string(), 11, false).exit_code, kExitOk);
  ASSERT_EQ(run_protocol("prepare", c, b.string(), 11, false).exit_code, kExitOk);
  for (const auto& e : fs::directory_iterator(a)) EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
}

}  // namespace
}  // namespace jcsim
