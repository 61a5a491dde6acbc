// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner: figure sweeps as CSV, plus the property self-check.
// Exit status: 0 success, 1 failed check, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riszf/riszf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  int restarts = 1;
  std::string values;
  std::string methods;
  std::string plot_script;
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> xs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      xs.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw riszf::ConfigError("bad list entry '" + item + "'");
    }
  }
  return xs;
}

std::vector<std::string> parse_names(const std::string& s) {
  std::vector<std::string> xs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) xs.push_back(item);
  return xs;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "scenario file (key = value per line)");
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--trials", a.trials, "Monte Carlo trials per point");
  cmd->add_option("--out", a.out, "CSV output path (stdout when omitted)");
  cmd->add_option("--restarts", a.restarts, "phase-optimization restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--values", a.values, "comma-separated sweep values");
  cmd->add_option("--methods", a.methods, "comma-separated methods");
  cmd->add_option("--plot-script", a.plot_script, "also write a matplotlib script here");
}

riszf::ScenarioConfig load_scenario(const CommonArgs& a) {
  riszf::ScenarioConfig cfg;
  if (!a.config.empty()) cfg = riszf::load_scenario_file(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.mc_trials = *a.trials;
  riszf::validate(cfg);
  return cfg;
}

void apply_overrides(riszf::ExperimentSpec& spec, const CommonArgs& a) {
  if (!a.values.empty()) spec.sweep_values = parse_list(a.values);
  if (!a.methods.empty()) spec.methods = parse_names(a.methods);
  spec.restarts = a.restarts;
  spec.output_path = a.out;
  spec.workers = riszf::worker_count();
}

void emit(const riszf::ExperimentResult& res, const CommonArgs& a) {
  if (a.out.empty()) {
    riszf::write_csv(std::cout, res);
  } else {
    std::ofstream f(a.out);
    if (!f) throw riszf::ConfigError("cannot write " + a.out);
    riszf::write_csv(f, res);
  }
  if (!a.plot_script.empty()) {
    std::ofstream f(a.plot_script);
    if (!f) throw riszf::ConfigError("cannot write " + a.plot_script);
    riszf::write_plot_script(f, a.out.empty() ? "results.csv" : a.out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided massive MIMO uplink with ZF detection: rate bounds, Monte Carlo and phase design"};
  app.require_subcommand(1);

  CommonArgs fig2_args, fig3_args, fig4_args, sweep_args;
  auto* fig2 = app.add_subcommand("fig2", "rate versus number of RIS elements N");
  add_common(fig2, fig2_args);
  auto* fig3 = app.add_subcommand("fig3", "rate versus M with p = c / M watts");
  add_common(fig3, fig3_args);
  double fig3_constant = 10.0;
  double fig3_exponent = 1.0;
  fig3->add_option("--power-constant", fig3_constant, "c in p = c / M^e (watts)");
  fig3->add_option("--power-exponent", fig3_exponent, "e in p = c / M^e");
  auto* fig4 = app.add_subcommand("fig4", "rate versus Rician factor for two RIS-BS distances");
  add_common(fig4, fig4_args);
  std::string fig4_distances = "700,300";
  fig4->add_option("--d-ib", fig4_distances, "comma-separated RIS-BS distances (m)");
  auto* sweep = app.add_subcommand("sweep", "sweep any scenario key");
  add_common(sweep, sweep_args);
  std::string sweep_param;
  sweep->add_option("--param", sweep_param, "scenario key to sweep")->required();

  auto* selfcheck = app.add_subcommand("selfcheck", "run the property checks");
  std::uint64_t check_seed = 1;
  bool inject_fault = false;
  selfcheck->add_option("--seed", check_seed, "RNG seed");
  selfcheck->add_flag("--inject-gradient-fault", inject_fault, "negative control: flip the gradient sign");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*selfcheck) {
      riszf::SelfCheckOptions opts;
      opts.seed = check_seed;
      opts.inject_gradient_fault = inject_fault;
      return riszf::print_selfcheck(std::cout, riszf::run_selfcheck(opts)) ? kExitOk : kExitCheckFailed;
    }
    if (*fig2) {
      auto spec = riszf::fig2_spec(load_scenario(fig2_args));
      apply_overrides(spec, fig2_args);
      emit(riszf::run_fig2(spec), fig2_args);
    } else if (*fig3) {
      auto spec = riszf::fig3_spec(load_scenario(fig3_args));
      apply_overrides(spec, fig3_args);
      spec.power_constant = fig3_constant;
      spec.power_exponent = fig3_exponent;
      emit(riszf::run_fig3(spec), fig3_args);
    } else if (*fig4) {
      auto spec = riszf::fig4_spec(load_scenario(fig4_args));
      apply_overrides(spec, fig4_args);
      spec.d_ib_cases = parse_list(fig4_distances);
      emit(riszf::run_fig4(spec), fig4_args);
    } else if (*sweep) {
      riszf::ExperimentSpec spec;
      spec.name = "custom-sweep";
      spec.scenario = load_scenario(sweep_args);
      spec.sweep_param = sweep_param;
      spec.methods = {riszf::kClosedForm, riszf::kMcZf};
      apply_overrides(spec, sweep_args);
      emit(riszf::run_sweep(spec), sweep_args);
    }
  } catch (const riszf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const riszf::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}
