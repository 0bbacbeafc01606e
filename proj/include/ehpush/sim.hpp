#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "ehpush/chain.hpp"
#include "ehpush/report.hpp"

namespace ehpush {

struct SimConfig {
  ModelParams params;
  StationaryPolicy policy;
  std::uint64_t horizon = 0;      // total slots
  std::uint64_t warmup = 10'000;  // slots discarded before counting
  std::uint64_t seed = 1;
  SystemState initial{0, 0, 0, 0};

  void validate() const;
};

struct SimReport {
  std::uint64_t blocked = 0;
  std::uint64_t counted_slots = 0;
  std::uint64_t requests = 0;
  double blocking_per_slot = 0.0;     // blocked / counted slots (the objective)
  double blocking_per_request = 0.0;  // blocked / request-bearing slots
  std::array<double, 3> action_frequency{};
  double mean_battery = 0.0;
  double ci_radius_95 = 0.0;  // binomial, on the per-slot estimate

  bool operator==(const SimReport&) const = default;
};

// One slot: samples the energy arrival, the catalog update, and the next
// request from the same tables the kernel exposes, so the empirical law of
// (state, action) -> next state is exactly transition(state, action).
// Returns the next state and the slot's blocking cost. mt19937_64 plus
// explicit inverse-CDF draws keep trajectories bit-identical for a seed.
std::pair<SystemState, int> step(const SystemState& state, Action action,
                                 std::mt19937_64& rng,
                                 const TransitionKernel& kernel);

SimReport run(const SimConfig& config);
SimReport run(const TransitionKernel& kernel, const StationaryPolicy& policy,
              std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed,
              SystemState initial = {0, 0, 0, 0});

inline BlockingReport mc_report(const SimReport& report) {
  return {report.blocking_per_slot, Provenance::MonteCarlo, report.counted_slots,
          report.ci_radius_95};
}

}  // namespace ehpush
