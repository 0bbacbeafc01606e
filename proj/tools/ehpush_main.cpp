// Command-line driver: solve for optimal policies, evaluate threshold
// policies exactly or by simulation, and run the experiment sweeps.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ehpush/dp.hpp"
#include "ehpush/experiment.hpp"

namespace {

using namespace ehpush;

struct ScenarioCli {
  std::string preset = "paper-v";
  std::string config_path;
  std::vector<std::string> overrides;

  ScenarioSpec resolve() const {
    auto base = named_preset(preset);
    if (!base) throw CLI::ValidationError("--preset", "unknown preset '" + preset + "'");
    ScenarioSpec scenario = *base;
    if (!config_path.empty()) load_config_file(scenario, config_path);
    for (const auto& kv : overrides) apply_config_line(scenario, kv);
    return scenario;
  }
};

void add_scenario_options(CLI::App* cmd, ScenarioCli& cli) {
  cmd->add_option("--preset", cli.preset, "Named scenario preset (paper-v)")
      ->capture_default_str();
  cmd->add_option("--config", cli.config_path,
                  "Flat key=value scenario file ('#' comments)");
  cmd->add_option("--set", cli.overrides,
                  "Scenario override, e.g. --set update_prob=0.4 (repeatable)");
}

ModelParams build_params(const ScenarioSpec& scenario) {
  std::vector<std::string> warnings;
  ModelParams params = scenario.build(&warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return params;
}

StationaryPolicy resolve_policy(const std::string& kind_name,
                                const std::string& policy_file,
                                const TransitionKernel& kernel,
                                ThresholdPolicySpec* spec_out = nullptr) {
  if (!policy_file.empty()) {
    LoadedPolicy loaded = load_policy_file(policy_file);
    const StateSpace& space = kernel.space();
    if (loaded.battery_units != space.battery_units() ||
        loaded.classes != space.classes() || loaded.catalog != space.catalog_size())
      throw std::invalid_argument(
          "policy file dimensions do not match the scenario");
    validate_policy(loaded.policy, kernel);
    return loaded.policy;
  }
  const auto kind = parse_policy_kind(kind_name);
  if (!kind)
    throw std::invalid_argument("unknown policy '" + kind_name +
                                "' (potb|aptb|eetb|gotb|sod|dp)");
  if (*kind == PolicyKind::DpOptimal) {
    return policy_iteration(kernel).policy;
  }
  const ThresholdPolicySpec spec = make_threshold_spec(*kind, kernel.params());
  if (spec_out) *spec_out = spec;
  return build_policy(spec, kernel.params());
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

int cmd_thresholds(const ScenarioCli& cli) {
  const ScenarioSpec scenario = cli.resolve();
  const ModelParams params = build_params(scenario);

  std::printf("unit energy: %.6g J, mean unicast energy: %.6g units\n",
              params.grid.unit_energy_j, mean_unicast_energy(params.grid));
  std::printf("class boundaries (m):");
  for (double d : params.grid.boundaries_m) std::printf(" %.4f", d);
  std::printf("\n\n");

  const int c_po = push_only_threshold(params);
  std::printf("potb: C_thr=%d  push-prob=%.6g  blocking-limit=%.6g  lower-bound=%.6g\n",
              c_po, steady_push_probability(c_po, params.catalog.update_prob, params.catalog_size()),
              push_only_blocking_limit(params), blocking_lower_bound(params, c_po));

  const ThresholdPolicySpec aptb = make_threshold_spec(PolicyKind::AlwaysPush, params);
  std::printf("aptb: C_thr=%d  blocking-limit=%s\n", aptb.push_threshold,
              std::isnan(aptb.predicted_blocking)
                  ? "n/a (arrivals below the always-push budget)"
                  : std::to_string(aptb.predicted_blocking).c_str());

  const int c_ee = energy_efficient_threshold(params);
  const UnicastCutoff cut = unicast_cutoff(params, c_ee);
  std::printf("eetb: C_thr=%d  cutoff-class=%d  eta=%.6g  push-budget=%.6g units\n",
              c_ee, cut.class_cutoff, cut.eta, cut.push_budget);
  if (params.arrival.mean >= cut.push_budget)
    std::printf("eetb: blocking-limit=%.6g  lower-bound=%.6g\n",
                energy_efficient_blocking_limit(params),
                blocking_lower_bound(params, c_ee));
  else
    std::printf("eetb: degenerate (arrival mean %.6g below push budget)\n",
                params.arrival.mean);

  const ThresholdPolicySpec gotb = greedy_threshold_search(params);
  std::printf("gotb: C_thr=%d  cutoff-class=%d  eta=%.6g  predicted=%.6g\n",
              gotb.push_threshold, gotb.unicast_cutoff_class, gotb.eta,
              gotb.predicted_blocking);
  return 0;
}

int cmd_solve(const ScenarioCli& cli, const std::string& out_path, int max_iter) {
  const ModelParams params = build_params(cli.resolve());
  TransitionKernel kernel(params);
  std::printf("state space: %d states\n", kernel.space().size());
  PolicyIterationOptions options;
  options.max_iterations = max_iter;
  const PolicyIterationResult result = policy_iteration(kernel, {}, options);
  for (const auto& rec : result.trace)
    std::printf("iteration %d: average-cost=%.12g changed=%d\n", rec.iteration,
                rec.average_cost, rec.changed_states);
  std::printf("optimal blocking: %.12g (evaluation residual %.3g, optimality residual %.3g)\n",
              result.evaluation.average_cost, result.evaluation.max_residual,
              result.bellman_residual);
  if (!out_path.empty()) {
    save_policy_file(out_path, result.policy, params);
    std::printf("policy written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_analyze(const ScenarioCli& cli, const std::string& policy_name,
                const std::string& policy_file) {
  const ModelParams params = build_params(cli.resolve());
  TransitionKernel kernel(params);
  ThresholdPolicySpec spec;
  spec.push_threshold = -1;
  const StationaryPolicy policy =
      resolve_policy(policy_name, policy_file, kernel, &spec);
  const PolicyAnalysis analysis = analyze_policy(policy, kernel);
  if (spec.push_threshold >= 0)
    std::printf("thresholds: C_thr=%d cutoff-class=%d\n", spec.push_threshold,
                spec.unicast_cutoff_class);
  std::printf("fsmc blocking: %.12g\n", analysis.blocking);
  std::printf("action frequencies: sleep=%.6g unicast=%.6g push=%.6g\n",
              analysis.action_frequency[0], analysis.action_frequency[1],
              analysis.action_frequency[2]);
  std::printf("mean battery: %.6g units, balance residual %.3g\n",
              analysis.mean_battery, analysis.balance_residual);
  return 0;
}

int cmd_simulate(const ScenarioCli& cli, const std::string& policy_name,
                 const std::string& policy_file, std::uint64_t slots,
                 std::uint64_t warmup, std::uint64_t seed) {
  const ModelParams params = build_params(cli.resolve());
  TransitionKernel kernel(params);
  const StationaryPolicy policy = resolve_policy(policy_name, policy_file, kernel);
  const SimReport report = run(kernel, policy, slots, warmup, seed);
  std::printf("slots counted: %llu, requests: %llu, blocked: %llu\n",
              static_cast<unsigned long long>(report.counted_slots),
              static_cast<unsigned long long>(report.requests),
              static_cast<unsigned long long>(report.blocked));
  std::printf("blocking per slot: %.8g (95%% ci +/- %.3g)\n",
              report.blocking_per_slot, report.ci_radius_95);
  std::printf("blocking per request: %.8g\n", report.blocking_per_request);
  std::printf("action frequencies: sleep=%.6g unicast=%.6g push=%.6g\n",
              report.action_frequency[0], report.action_frequency[1],
              report.action_frequency[2]);
  std::printf("mean battery: %.6g units\n", report.mean_battery);
  return 0;
}

int cmd_sweep(const ScenarioCli& cli, const std::string& axis_name,
              const std::string& values_csv, const std::string& policies_csv,
              const std::string& methods_csv, const std::string& out_path,
              std::uint64_t slots, std::uint64_t warmup, std::uint64_t seed,
              std::size_t dp_cap) {
  ExperimentSpec spec;
  spec.scenario = cli.resolve();
  const auto axis = parse_sweep_axis(axis_name);
  if (!axis) throw std::invalid_argument("unknown sweep axis '" + axis_name + "' (pc|A|pu|emax)");
  spec.axis = *axis;
  spec.values = parse_values(values_csv);
  std::stringstream policies(policies_csv);
  std::string item;
  while (std::getline(policies, item, ',')) {
    const auto kind = parse_policy_kind(item);
    if (!kind) throw std::invalid_argument("unknown policy '" + item + "'");
    spec.policies.push_back(*kind);
  }
  std::stringstream methods(methods_csv);
  while (std::getline(methods, item, ',')) {
    const auto method = parse_method(item);
    if (!method) throw std::invalid_argument("unknown method '" + item + "'");
    spec.methods.push_back(*method);
  }
  spec.slots = slots;
  spec.warmup = warmup;
  spec.seed = seed;
  spec.dp_state_cap = dp_cap;

  const std::vector<ResultRow> rows = run_experiment(spec);
  if (out_path.empty() || out_path == "-") {
    write_csv(std::cout, rows);
  } else {
    write_csv_file(out_path, rows);
    std::cerr << rows.size() << " rows written to " << out_path << "\n";
    write_compare_report(std::cout, compare_report(rows));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ehpush: content-push policy toolkit for an energy-harvesting small cell"};
  app.require_subcommand(1);

  ScenarioCli solve_cli, analyze_cli, simulate_cli, sweep_cli, thresholds_cli;

  auto* solve = app.add_subcommand(
      "solve", "Find the optimal policy by average-cost policy iteration");
  add_scenario_options(solve, solve_cli);
  std::string solve_out;
  int solve_max_iter = 1000;
  solve->add_option("--out", solve_out, "Write the policy file here");
  solve->add_option("--max-iter", solve_max_iter, "Iteration cap")->capture_default_str();

  auto* analyze = app.add_subcommand(
      "analyze", "Exact stationary evaluation of a policy");
  add_scenario_options(analyze, analyze_cli);
  std::string analyze_policy_name = "potb", analyze_policy_file;
  analyze->add_option("--policy", analyze_policy_name,
                      "potb|aptb|eetb|gotb|sod|dp")->capture_default_str();
  analyze->add_option("--policy-file", analyze_policy_file,
                      "Policy file from 'solve'");

  auto* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo run");
  add_scenario_options(simulate, simulate_cli);
  std::string sim_policy_name = "potb", sim_policy_file;
  std::uint64_t sim_slots = 1'000'000, sim_warmup = 10'000, sim_seed = 1;
  simulate->add_option("--policy", sim_policy_name, "potb|aptb|eetb|gotb|sod|dp")
      ->capture_default_str();
  simulate->add_option("--policy-file", sim_policy_file, "Policy file from 'solve'");
  simulate->add_option("--slots", sim_slots, "Total slots")->capture_default_str();
  simulate->add_option("--warmup", sim_warmup, "Discarded slots")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Experiment sweep, CSV output");
  add_scenario_options(sweep, sweep_cli);
  std::string sweep_axis = "pc", sweep_values, sweep_policies = "potb,aptb,eetb,gotb,sod",
              sweep_methods = "closed-form,fsmc", sweep_out;
  std::uint64_t sweep_slots = 1'000'000, sweep_warmup = 10'000, sweep_seed = 1;
  std::size_t sweep_dp_cap = 50'000;
  sweep->add_option("--axis", sweep_axis, "pc|A|pu|emax")->capture_default_str();
  sweep->add_option("--values", sweep_values, "Comma-separated sweep values")
      ->required();
  sweep->add_option("--policies", sweep_policies, "Comma-separated policies")
      ->capture_default_str();
  sweep->add_option("--methods", sweep_methods,
                    "Comma-separated: closed-form|fsmc|mc|dp")
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "CSV path ('-' for stdout)");
  sweep->add_option("--slots", sweep_slots, "MC slots per row")->capture_default_str();
  sweep->add_option("--warmup", sweep_warmup, "MC warm-up slots")->capture_default_str();
  sweep->add_option("--seed", sweep_seed, "MC base seed")->capture_default_str();
  sweep->add_option("--dp-cap", sweep_dp_cap, "Skip dp above this state count")
      ->capture_default_str();

  auto* thresholds = app.add_subcommand(
      "thresholds", "Print the closed-form thresholds and blocking limits");
  add_scenario_options(thresholds, thresholds_cli);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(solve_cli, solve_out, solve_max_iter);
    if (analyze->parsed())
      return cmd_analyze(analyze_cli, analyze_policy_name, analyze_policy_file);
    if (simulate->parsed())
      return cmd_simulate(simulate_cli, sim_policy_name, sim_policy_file,
                          sim_slots, sim_warmup, sim_seed);
    if (sweep->parsed())
      return cmd_sweep(sweep_cli, sweep_axis, sweep_values, sweep_policies,
                       sweep_methods, sweep_out, sweep_slots, sweep_warmup,
                       sweep_seed, sweep_dp_cap);
    if (thresholds->parsed()) return cmd_thresholds(thresholds_cli);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
