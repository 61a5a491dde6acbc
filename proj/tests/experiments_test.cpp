// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "riszf/experiments.hpp"
#include "riszf/selfcheck.hpp"

namespace riszf {
namespace {

using Series = std::map<std::pair<std::string, std::string>, std::vector<double>>;

// Sum rows keyed by (sweep label, method), in sweep order.
Series sums(const ExperimentResult& res) {
  Series out;
  for (const CsvRow& r : res.rows)
    if (r.user == 0) out[{r.sweep_param, r.method}].push_back(r.rate);
  return out;
}

Series sum_errors(const ExperimentResult& res) {
  Series out;
  for (const CsvRow& r : res.rows)
    if (r.user == 0) out[{r.sweep_param, r.method}].push_back(r.std_err);
  return out;
}

ExperimentSpec golden_spec() {
  ExperimentSpec s;
  s.sweep_param = "N";
  s.sweep_values = {4, 9};
  s.methods = {kClosedForm, kLosFreeBound, kLargeN, kRisFree};
  s.scenario.M = 16;
  s.scenario.K = 2;
  s.scenario.rician_delta = 0.0;
  s.scenario.seed = 7;
  return s;
}

TEST(Csv, HeaderAndMetadata) {
  const std::string csv = to_csv(run_sweep(golden_spec()));
  std::istringstream is(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  std::size_t i = 0;
  while (i < lines.size() && lines[i].rfind("# ", 0) == 0) ++i;
  ASSERT_GT(i, 0u);
  ASSERT_LT(i, lines.size());
  EXPECT_EQ(lines[i], "sweep_param,value,method,user,rate,std_err,seed");
  // 2 points x 4 methods x (2 users + sum)
  EXPECT_EQ(lines.size() - i - 1, 2u * 4u * 3u);
  EXPECT_EQ(lines[i + 1].substr(0, 18), "N,4,closed-form,1,");
  EXPECT_NE(lines[i + 3].find(",sum,"), std::string::npos);
}

TEST(Csv, MatchesGoldenFile) {
  const std::string path = std::string(RISZF_GOLDEN_DIR) + "/small_sweep.csv";
  std::ifstream f(path);
  ASSERT_TRUE(f.good()) << path;
  std::stringstream want;
  want << f.rdbuf();
  EXPECT_EQ(to_csv(run_sweep(golden_spec())), want.str());
}

TEST(Csv, ByteIdenticalAcrossWorkerCounts) {
  ExperimentSpec s = golden_spec();
  s.methods = {kMcZf, kClosedForm, kRisFree};
  s.scenario.rician_delta = 1.0;
  s.scenario.mc_trials = 200;
  s.sweep_values = {4, 9, 16};
  s.workers = 1;
  const std::string a = to_csv(run_sweep(s));
  s.workers = 3;
  EXPECT_EQ(to_csv(run_sweep(s)), a);
  s.workers = 8;
  EXPECT_EQ(to_csv(run_sweep(s)), a);
}

TEST(Spec, Validation) {
  ExperimentSpec s = golden_spec();
  s.sweep_values = {};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s.sweep_values = {9, 4};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s.sweep_values = {4, 4};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s = golden_spec();
  s.methods = {};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s.methods = {"bogus"};
  EXPECT_THROW(run_sweep(s), ConfigError);
  s = golden_spec();
  s.sweep_param = "no_such_field";
  EXPECT_THROW(run_sweep(s), ConfigError);
  s = golden_spec();
  s.sweep_values = {4, 8};
  EXPECT_THROW(run_fig2(s), ConfigError);
  s.sweep_values = {4.5};
  EXPECT_THROW(run_sweep(s), ConfigError);

  ExperimentSpec f3 = fig3_spec(ScenarioConfig{});
  f3.sweep_values = {2, 64};
  EXPECT_THROW(run_fig3(f3), ConfigError);
  ExperimentSpec f4 = fig4_spec(ScenarioConfig{});
  f4.sweep_values = {-1.0, 1.0};
  EXPECT_THROW(run_fig4(f4), ConfigError);
}

TEST(Fig2, Trends) {
  ScenarioConfig cfg;
  cfg.mc_trials = 300;
  ExperimentSpec s = fig2_spec(cfg);
  s.sweep_values = {16, 36, 64, 100};
  s.restarts = 2;
  const ExperimentResult res = run_fig2(s);
  const Series sr = sums(res);
  const auto& bound = sr.at({"N", kClosedForm});
  const auto& mc = sr.at({"N", kMcZf});
  const auto& risfree = sr.at({"N", kRisFree});
  const auto& exact = sr.at({"N", kLosFreeBound});
  const auto& large = sr.at({"N", kLargeN});
  const auto& random = sr.at({"N", std::string(kClosedForm) + "-random"});
  ASSERT_EQ(bound.size(), 4u);
  for (std::size_t i = 1; i < bound.size(); ++i) {
    EXPECT_GT(bound[i], bound[i - 1]);
    EXPECT_GT(mc[i], mc[i - 1]);
    EXPECT_EQ(risfree[i], risfree[0]);
    EXPECT_LE(exact[i], bound[i] + 1e-12);
    EXPECT_GT(large[i], 0.0);
  }
  for (std::size_t i = 0; i < bound.size(); ++i) EXPECT_GE(bound[i], random[i]);
  EXPECT_TRUE(sr.count({"N", kMcMrc}));
  EXPECT_TRUE(sr.count({"N", std::string(kMcZf) + "-random"}));
  bool noted = false;
  for (const auto& m : res.metadata) noted = noted || m.find("mc-mrc") != std::string::npos;
  EXPECT_TRUE(noted);
}

// The large-array approximation closes in on the phase-free bound as N grows.
// Not monotone at small N when two users see the RIS from nearly the same
// direction, so compare against the small-array end of the range.
TEST(Fig2, LargeArrayApproximationTightens) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto gap = [seed](int N) {
      ScenarioConfig cfg;
      cfg.seed = seed;
      cfg.N = N;
      const auto csi = build_statistical_csi(cfg);
      const LinkBudget l = link_budget(cfg);
      const double e = phase_free_rate_bound(csi, l.p_watts, l.noise_watts, LowerBoundMode::kExact).sum();
      const double a = phase_free_rate_bound(csi, l.p_watts, l.noise_watts, LowerBoundMode::kLargeArray).sum();
      return std::abs(a - e) / e;
    };
    const double big = gap(1024);
    EXPECT_LT(big, 0.005) << seed;
    EXPECT_LT(big, gap(16)) << seed;
    EXPECT_LT(big, gap(36)) << seed;
  }
}

TEST(Fig3, PlateauUnderLinearPowerScaling) {
  ScenarioConfig cfg;
  cfg.mc_trials = 300;
  const ExperimentResult res = run_fig3(fig3_spec(cfg));
  const Series sr = sums(res), se = sum_errors(res);
  const auto& bound = sr.at({"M", kClosedForm});
  const auto& mc = sr.at({"M", kMcZf});
  const auto& mc_se = se.at({"M", kMcZf});
  ASSERT_EQ(bound.size(), 4u);
  EXPECT_LT(std::abs(bound[3] - bound[2]) / bound[2], 0.02);
  EXPECT_GT(bound[3], 0.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(std::abs(mc[i] - bound[i]), 3 * mc_se[i] + 0.03 * mc[i]);
  bool noted = false;
  for (const auto& m : res.metadata) noted = noted || m.find("linear watts") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(Fig3, QuadraticScalingDecays) {
  ExperimentSpec s = fig3_spec(ScenarioConfig{});
  s.methods = {kClosedForm};
  s.power_exponent = 2.0;
  const auto bound = sums(run_fig3(s)).at({"M", kClosedForm});
  for (std::size_t i = 1; i < bound.size(); ++i) EXPECT_LT(bound[i], 0.6 * bound[i - 1]);
}

TEST(Fig4, CrossoverInClosedForm) {
  // Averaged over angle draws; a single draw with nearly collinear user
  // directions can invert the 700 m ordering.
  double far[2] = {0, 0}, near[2] = {0, 0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    ExperimentSpec s = fig4_spec(cfg);
    s.methods = {kClosedForm};
    s.sweep_values = {0.1, 10.0};
    const Series sr = sums(run_fig4(s));
    for (int i = 0; i < 2; ++i) {
      far[i] += sr.at({"rician_delta@d_ib_m=700", kClosedForm})[i];
      near[i] += sr.at({"rician_delta@d_ib_m=300", kClosedForm})[i];
    }
  }
  EXPECT_LT(far[1], far[0]);
  EXPECT_GT(near[1], near[0]);
}

TEST(Fig4, RayleighPointIgnoresPhaseInitialization) {
  ExperimentSpec s = fig4_spec(ScenarioConfig{});
  s.methods = {kClosedForm, kRandomPhase, kOptimizedPhase};
  s.sweep_values = {0.0};
  s.d_ib_cases = {700.0};
  const Series sr = sums(run_fig4(s));
  EXPECT_NEAR(sr.at({"rician_delta@d_ib_m=700", kClosedForm})[0],
              sr.at({"rician_delta@d_ib_m=700", std::string(kClosedForm) + "-random"})[0], 1e-9);

  // Same channel statistics, five different ascent seeds.
  ScenarioConfig cfg;
  cfg.rician_delta = 0.0;
  const auto csi = build_statistical_csi(cfg);
  const LinkBudget link = link_budget(cfg);
  const ObjectiveContext ctx = build_objective_context(csi, link.p_watts, link.noise_watts);
  const double ref = optimize_phases(ctx, 1, 1).final_objective();
  for (std::uint64_t seed = 2; seed <= 5; ++seed)
    EXPECT_NEAR(optimize_phases(ctx, 1, seed).final_objective(), ref, 1e-9);
}

TEST(PlotScript, ReferencesCsv) {
  std::ostringstream os;
  write_plot_script(os, "out/fig2.csv");
  const std::string s = os.str();
  EXPECT_NE(s.find("import matplotlib"), std::string::npos);
  EXPECT_NE(s.find("\"out/fig2.csv\""), std::string::npos);
  EXPECT_NE(s.find("savefig"), std::string::npos);
}

TEST(SelfCheck, PassesAndNegativeControlFails) {
  SelfCheckOptions opts;
  opts.wishart_draws = 100000;
  const auto ok = run_selfcheck(opts);
  std::ostringstream os;
  EXPECT_TRUE(print_selfcheck(os, ok)) << os.str();
  bool saw_wishart = false;
  for (const auto& r : ok) saw_wishart = saw_wishart || r.name.find("Wishart") != std::string::npos;
  EXPECT_TRUE(saw_wishart);

  opts.inject_gradient_fault = true;
  const auto bad = run_selfcheck(opts);
  std::ostringstream os2;
  EXPECT_FALSE(print_selfcheck(os2, bad));
  for (const auto& r : bad)
    if (r.name.find("gradient") != std::string::npos) EXPECT_FALSE(r.passed) << r.name;
}

}  // namespace
}  // namespace riszf
