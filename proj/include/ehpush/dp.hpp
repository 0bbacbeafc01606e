#pragma once

#include <span>

#include "ehpush/chain.hpp"

namespace ehpush {

struct EvaluationResult {
  double average_cost = 0.0;  // long-run blocking probability of the policy
  std::vector<double> h;      // differential values, h[anchor] == 0
  int anchor = 0;             // last state in the enumeration order
  double max_residual = 0.0;  // certified on the full state space
};

struct IterationRecord {
  int iteration = 0;
  double average_cost = 0.0;
  int changed_states = 0;
};

struct PolicyIterationOptions {
  int max_iterations = 1000;
  double residual_tol = 1e-9;
};

struct PolicyIterationResult {
  StationaryPolicy policy;
  EvaluationResult evaluation;
  std::vector<IterationRecord> trace;
  double bellman_residual = 0.0;  // max | lambda + h - min_u q |
};

StationaryPolicy all_sleep_policy(const TransitionKernel& kernel);

// Solves the evaluation equations for a fixed policy. The solve runs on the
// collapsed (battery, pushed-count) chain and the result is certified
// equation-by-equation against the full kernel; a full-space direct solve is
// the fallback if certification fails. Throws on reducible policy chains.
EvaluationResult policy_evaluation(const StationaryPolicy& policy,
                                   const TransitionKernel& kernel,
                                   double residual_tol = 1e-9);

// Greedy policy against differential values h; ties go to the lowest action
// index (sleep < unicast < push).
StationaryPolicy policy_improvement(std::span<const double> h,
                                    const TransitionKernel& kernel);

// Alternates evaluation and improvement until the policy repeats. The
// average-cost trace is checked non-increasing; exceeding the iteration cap
// throws.
PolicyIterationResult policy_iteration(const TransitionKernel& kernel,
                                       StationaryPolicy initial = {},
                                       PolicyIterationOptions options = {});

}  // namespace ehpush
