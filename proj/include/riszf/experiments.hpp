// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "riszf/analysis.hpp"
#include "riszf/channels.hpp"
#include "riszf/detection.hpp"
#include "riszf/optimizer.hpp"
#include "riszf/parallel.hpp"
#include "riszf/scenario.hpp"

namespace riszf {

// Evaluators. Phase-dependent ones (mc-zf, mc-mrc, closed-form) run once per
// selected phase design; rows for the random design carry a "-random" suffix.
inline constexpr const char* kMcZf = "mc-zf";
inline constexpr const char* kMcMrc = "mc-mrc";
inline constexpr const char* kClosedForm = "closed-form";
inline constexpr const char* kLosFreeBound = "los-free-bound";
inline constexpr const char* kLargeN = "large-n";
inline constexpr const char* kRisFree = "ris-free";
// Phase designs.
inline constexpr const char* kRandomPhase = "random-phase";
inline constexpr const char* kOptimizedPhase = "optimized-phase";

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> all{kMcZf,   kMcMrc,   kClosedForm,  kLosFreeBound,
                                            kLargeN, kRisFree, kRandomPhase, kOptimizedPhase};
  return all;
}

inline constexpr const char* kCsvHeader = "sweep_param,value,method,user,rate,std_err,seed";

struct ExperimentSpec {
  std::string name = "custom-sweep";  // fig2-rate-vs-N | fig3-power-scaling | fig4-rician-sweep | custom-sweep
  std::string sweep_param;            // any scenario key
  std::vector<double> sweep_values;
  std::vector<std::string> methods;
  ScenarioConfig scenario;
  std::string output_path;
  int restarts = 1;
  unsigned workers = 1;
  // Power-scaled sweep: p = power_constant / M^power_exponent in watts.
  // Enabled when power_scaling is set.
  bool power_scaling = false;
  double power_constant = 10.0;
  double power_exponent = 1.0;
  // When set, the sweep runs once per RIS-BS distance.
  std::vector<double> d_ib_cases;
};

struct CsvRow {
  std::string sweep_param;
  double value = 0.0;
  std::string method;
  int user = 0;  // 0 marks the sum row
  double rate = 0.0;
  double std_err = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  std::vector<std::string> metadata;  // emitted as '#' lines before the header
  std::vector<CsvRow> rows;
};

inline bool has_method(const std::vector<std::string>& methods, const std::string& m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

inline void validate(const ExperimentSpec& spec) {
  if (spec.sweep_values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < spec.sweep_values.size(); ++i)
    if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
      throw ConfigError("sweep values must be strictly increasing");
  if (spec.methods.empty()) throw ConfigError("at least one method is required");
  for (const auto& m : spec.methods)
    if (!has_method(known_methods(), m)) throw ConfigError("unknown method '" + m + "'");
  if (spec.restarts < 1) throw ConfigError("restarts must be >= 1");
}

namespace detail {

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline void append_rows(std::vector<CsvRow>& rows, const std::string& param, double value, const std::string& method,
                        const RateReport& rep, std::uint64_t seed) {
  for (Eigen::Index k = 0; k < rep.per_user.size(); ++k)
    rows.push_back({param, value, method, static_cast<int>(k + 1), rep.per_user(k),
                    rep.std_err.size() ? rep.std_err(k) : 0.0, seed});
  rows.push_back({param, value, method, 0, rep.sum, rep.sum_std_err, seed});
}

/// Evaluates every requested method at one scenario.
inline std::vector<CsvRow> evaluate_point(const ScenarioConfig& cfg, const LinkBudget& link, const ExperimentSpec& spec,
                                          const std::string& param_label, double value, unsigned inner_workers) {
  const StatisticalCsi csi = build_statistical_csi(cfg);
  const auto& m = spec.methods;
  const bool wants_phase_methods = has_method(m, kMcZf) || has_method(m, kMcMrc) || has_method(m, kClosedForm);
  const bool random_design = has_method(m, kRandomPhase);
  const bool optimized_design = has_method(m, kOptimizedPhase) || !random_design;

  std::vector<CsvRow> rows;
  const MonteCarloOptions mc{cfg.mc_trials, cfg.seed, inner_workers};
  auto run_design = [&](const PhaseShiftVector& phases, const std::string& suffix) {
    if (has_method(m, kClosedForm))
      append_rows(rows, param_label, value, kClosedForm + suffix,
                  to_report(zf_rate_bound(csi, phases, link.p_watts, link.noise_watts)), cfg.seed);
    if (has_method(m, kMcZf))
      append_rows(rows, param_label, value, kMcZf + suffix, monte_carlo_rate(csi, phases, Detector::kZf, link, mc),
                  cfg.seed);
    if (has_method(m, kMcMrc))
      append_rows(rows, param_label, value, kMcMrc + suffix, monte_carlo_rate(csi, phases, Detector::kMrc, link, mc),
                  cfg.seed);
  };

  if (wants_phase_methods && optimized_design) {
    const ObjectiveContext ctx = build_objective_context(csi, link.p_watts, link.noise_watts);
    const AscentTrace best = optimize_phases(ctx, spec.restarts, cfg.seed, {}, inner_workers);
    run_design(best.final_phases, "");
  }
  if (wants_phase_methods && random_design) {
    Rng rng = substream(cfg.seed, Stream::kRandomPhase);
    run_design(random_phase_baseline(cfg.N, rng), "-random");
  }
  if (has_method(m, kLosFreeBound))
    append_rows(rows, param_label, value, kLosFreeBound,
                to_report(phase_free_rate_bound(csi, link.p_watts, link.noise_watts, LowerBoundMode::kExact)), cfg.seed);
  if (has_method(m, kLargeN))
    append_rows(rows, param_label, value, kLargeN,
                to_report(phase_free_rate_bound(csi, link.p_watts, link.noise_watts, LowerBoundMode::kLargeArray)),
                cfg.seed);
  if (has_method(m, kRisFree))
    append_rows(rows, param_label, value, kRisFree, to_report(ris_free_rate(csi, link.p_watts, link.noise_watts)),
                cfg.seed);
  return rows;
}

inline std::string scenario_summary(const ScenarioConfig& c) {
  std::ostringstream os;
  os.precision(10);
  os << "M=" << c.M << " N=" << c.N << " K=" << c.K << " p_dbm=" << c.p_dbm << " noise_dbm=" << c.noise_dbm
     << " rician_delta=" << c.rician_delta << " d_ui_m=" << c.d_ui_m << " d_ib_m=" << c.d_ib_m
     << " spacing_ratio=" << c.spacing_ratio << " pathloss_exponents=" << c.pathloss_exponents[0] << ','
     << c.pathloss_exponents[1] << ',' << c.pathloss_exponents[2] << " pathloss_ref_db=" << c.pathloss_ref_db
     << " seed=" << c.seed << " mc_trials=" << c.mc_trials;
  return os.str();
}

}  // namespace detail

/// Runs the sweep. Points are evaluated on a worker pool; rows come back in
/// sweep order, so the output does not depend on the worker count.
inline ExperimentResult run_sweep(const ExperimentSpec& spec) {
  validate(spec);
  validate(spec.scenario);
  struct Point {
    ScenarioConfig cfg;
    LinkBudget link;
    std::string label;
    double value;
  };
  std::vector<Point> points;
  const std::vector<double> cases = spec.d_ib_cases.empty() ? std::vector<double>{spec.scenario.d_ib_m}
                                                            : spec.d_ib_cases;
  for (double d_ib : cases) {
    std::string label = spec.sweep_param;
    if (!spec.d_ib_cases.empty()) label += "@d_ib_m=" + detail::format_number(d_ib);
    for (double v : spec.sweep_values) {
      ScenarioConfig cfg = spec.scenario;
      cfg.d_ib_m = d_ib;
      const bool integral = spec.sweep_param == "M" || spec.sweep_param == "N" || spec.sweep_param == "K" ||
                            spec.sweep_param == "seed" || spec.sweep_param == "mc_trials";
      if (integral && v != std::floor(v)) throw ConfigError("sweep of '" + spec.sweep_param + "' needs integers");
      set_scenario_field(cfg, spec.sweep_param,
                         integral ? std::to_string(static_cast<long long>(v)) : detail::format_number(v));
      validate(cfg);
      LinkBudget link = link_budget(cfg);
      if (spec.power_scaling) link.p_watts = spec.power_constant / std::pow(static_cast<double>(cfg.M), spec.power_exponent);
      points.push_back({cfg, link, label, v});
    }
  }

  std::vector<std::vector<CsvRow>> per_point(points.size());
  const unsigned outer = std::max(1u, spec.workers);
  const unsigned inner = points.size() >= outer ? 1u : outer;
  parallel_for(points.size(), outer, [&](std::size_t i) {
    const Point& pt = points[i];
    per_point[i] = detail::evaluate_point(pt.cfg, pt.link, spec, pt.label, pt.value, inner);
  });

  ExperimentResult res;
  res.metadata.push_back("experiment: " + spec.name);
  res.metadata.push_back("scenario: " + detail::scenario_summary(spec.scenario));
  res.metadata.push_back("sweep: " + spec.sweep_param);
  if (spec.power_scaling)
    res.metadata.push_back("power scaling: p = " + detail::format_number(spec.power_constant) + " / M^" +
                           detail::format_number(spec.power_exponent) + " W (linear watts, replaces p_dbm)");
  if (has_method(spec.methods, kMcMrc))
    res.metadata.push_back("mc-mrc uses the phases optimized for the ZF bound");
  res.metadata.push_back("restarts: " + std::to_string(spec.restarts));
  res.metadata.push_back("user 0 in the user column is reported as 'sum'");
  for (auto& rows : per_point) res.rows.insert(res.rows.end(), rows.begin(), rows.end());
  return res;
}

inline void write_csv(std::ostream& os, const ExperimentResult& res) {
  for (const auto& line : res.metadata) os << "# " << line << '\n';
  os << kCsvHeader << '\n';
  for (const CsvRow& r : res.rows) {
    os << r.sweep_param << ',' << detail::format_number(r.value) << ',' << r.method << ','
       << (r.user == 0 ? std::string("sum") : std::to_string(r.user)) << ',' << detail::format_number(r.rate) << ','
       << detail::format_number(r.std_err) << ',' << r.seed << '\n';
  }
}

inline std::string to_csv(const ExperimentResult& res) {
  std::ostringstream os;
  write_csv(os, res);
  return os.str();
}

inline ExperimentSpec fig2_spec(const ScenarioConfig& scenario) {
  ExperimentSpec s;
  s.name = "fig2-rate-vs-N";
  s.sweep_param = "N";
  s.sweep_values = {16, 36, 64, 100, 144};
  s.methods = {kMcZf, kMcMrc, kClosedForm, kRisFree, kLosFreeBound, kLargeN, kRandomPhase, kOptimizedPhase};
  s.scenario = scenario;
  return s;
}

inline ExperimentSpec fig3_spec(const ScenarioConfig& scenario) {
  ExperimentSpec s;
  s.name = "fig3-power-scaling";
  s.sweep_param = "M";
  s.sweep_values = {64, 128, 256, 512};
  s.methods = {kMcZf, kClosedForm, kRisFree};
  s.scenario = scenario;
  s.power_scaling = true;
  return s;
}

inline ExperimentSpec fig4_spec(const ScenarioConfig& scenario) {
  ExperimentSpec s;
  s.name = "fig4-rician-sweep";
  s.sweep_param = "rician_delta";
  s.sweep_values = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  s.methods = {kMcZf, kClosedForm};
  s.scenario = scenario;
  s.d_ib_cases = {700.0, 300.0};
  return s;
}

inline ExperimentResult run_fig2(const ExperimentSpec& spec) {
  for (double n : spec.sweep_values)
    if (n != std::floor(n) || exact_sqrt(static_cast<int>(n)) == 0)
      throw ConfigError("fig2 sweeps N over perfect squares");
  return run_sweep(spec);
}

inline ExperimentResult run_fig3(const ExperimentSpec& spec) {
  for (double m : spec.sweep_values)
    if (m <= spec.scenario.K) throw ConfigError("fig3 needs every M > K");
  return run_sweep(spec);
}

inline ExperimentResult run_fig4(const ExperimentSpec& spec) {
  for (double d : spec.sweep_values)
    if (d < 0.0) throw ConfigError("fig4 needs delta >= 0");
  return run_sweep(spec);
}

/// Matplotlib script that plots the sum rows of a CSV written by write_csv.
inline void write_plot_script(std::ostream& os, const std::string& csv_path) {
  os << "import csv\nimport collections\nimport matplotlib.pyplot as plt\n\n"
     << "series = collections.defaultdict(list)\n"
     << "with open(" << '"' << csv_path << '"' << ") as f:\n"
     << "    rows = [r for r in csv.DictReader(line for line in f if not line.startswith('#'))]\n"
     << "for r in rows:\n"
     << "    if r['user'] == 'sum':\n"
     << "        series[(r['sweep_param'], r['method'])].append((float(r['value']), float(r['rate'])))\n"
     << "for (param, method), pts in sorted(series.items()):\n"
     << "    xs, ys = zip(*sorted(pts))\n"
     << "    plt.plot(xs, ys, marker='o', label=f'{method} ({param})')\n"
     << "plt.ylabel('sum rate (bit/s/Hz)')\nplt.legend()\nplt.grid(True)\n"
     << "plt.savefig(" << '"' << csv_path << ".png" << '"' << ")\n";
}

}  // namespace riszf
