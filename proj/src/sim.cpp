#include "ehpush/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace ehpush {

namespace {

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void SimConfig::validate() const {
  params.validate();
  if (horizon == 0 || warmup >= horizon)
    throw std::invalid_argument("sim config: need horizon > warmup >= 0");
  if (policy.size() !=
      static_cast<std::size_t>((params.battery_units + 1) *
                               (2 * params.classes() + 1) *
                               (params.catalog_size() + 1)))
    throw std::invalid_argument("sim config: policy length mismatch");
}

std::pair<SystemState, int> step(const SystemState& state, Action action,
                                 std::mt19937_64& rng,
                                 const TransitionKernel& kernel) {
  if (!feasible_actions(state, kernel.params()).contains(action))
    throw std::invalid_argument("step: infeasible action");
  const int cost = stage_cost(state, action);

  // Battery: spend, then absorb the arrival (overflow truncates at E_max).
  const int remaining = state.energy - kernel.spend(state.request, action);
  const auto& energy = kernel.energy_row(remaining);
  int next_energy = energy.back().first;
  {
    double u = uniform01(rng);
    for (const auto& [level, p] : energy) {
      if (u < p) {
        next_energy = level;
        break;
      }
      u -= p;
    }
  }

  // Catalog update / push outcome.
  const auto push = kernel.push_row(state.pushed, action);
  int next_pushed = push.back().first;
  if (push.size() > 1 && uniform01(rng) < push.front().second)
    next_pushed = push.front().first;

  // Next request, drawn against the new pushed count.
  const auto& requests = kernel.request_row(next_pushed);
  SystemState next{next_energy, requests.back().request,
                   requests.back().near_flag, next_pushed};
  {
    double u = uniform01(rng);
    for (const auto& outcome : requests) {
      if (u < outcome.prob) {
        next.request = outcome.request;
        next.near_flag = outcome.near_flag;
        break;
      }
      u -= outcome.prob;
    }
  }
  return {next, cost};
}

SimReport run(const TransitionKernel& kernel, const StationaryPolicy& policy,
              std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed,
              SystemState initial) {
  if (horizon == 0 || warmup >= horizon)
    throw std::invalid_argument("run: need horizon > warmup >= 0");
  validate_policy(policy, kernel);

  std::mt19937_64 rng(seed);
  SystemState state = initial;
  SimReport report;
  std::uint64_t action_counts[3] = {0, 0, 0};
  double battery_sum = 0.0;

  for (std::uint64_t k = 0; k < horizon; ++k) {
    const Action u = policy[kernel.space().index(state)];
    const bool counted = k >= warmup;
    if (counted) {
      ++report.counted_slots;
      report.requests += state.request > 0;
      ++action_counts[static_cast<int>(u)];
      battery_sum += state.energy;
    }
    auto [next, cost] = step(state, u, rng, kernel);
    if (counted) report.blocked += cost;
    state = next;
  }

  const double n = static_cast<double>(report.counted_slots);
  report.blocking_per_slot = report.blocked / n;
  report.blocking_per_request =
      report.requests ? static_cast<double>(report.blocked) / report.requests : 0.0;
  for (int a = 0; a < 3; ++a) report.action_frequency[a] = action_counts[a] / n;
  report.mean_battery = battery_sum / n;
  const double p = report.blocking_per_slot;
  report.ci_radius_95 = 1.96 * std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
  return report;
}

SimReport run(const SimConfig& config) {
  config.validate();
  TransitionKernel kernel(config.params);
  return run(kernel, config.policy, config.horizon, config.warmup, config.seed,
             config.initial);
}

}  // namespace ehpush
