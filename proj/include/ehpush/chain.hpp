#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <vector>

#include "ehpush/mdp.hpp"
#include "ehpush/report.hpp"

namespace ehpush {

using StationaryPolicy = std::vector<Action>;

// Throws unless every assigned action is feasible in its state.
void validate_policy(const StationaryPolicy& policy, const TransitionKernel& kernel);

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Row x is the next-state pmf under the policy's action; row-stochastic.
RowMatrix induced_chain(const StationaryPolicy& policy, const TransitionKernel& kernel);

struct StationaryDistribution {
  std::vector<double> pi;
  double balance_residual = 0.0;  // ||pi P - pi||_inf after the solve
};

// Stationary distribution of the chain restricted to what is reachable from
// `start_index`; transient states get 0. Throws if more than one closed
// class is reachable. Direct sparse solve with a damped power-iteration
// fallback; the residual contract is < 1e-9 either way.
StationaryDistribution stationary_distribution(const RowMatrix& chain,
                                               int start_index = 0);

double blocking_probability(const StationaryPolicy& policy,
                            const StationaryDistribution& dist,
                            const TransitionKernel& kernel);

// ---- generic solvers on explicit sparse rows ----

struct AverageCostSolution {
  double average_cost = 0.0;
  std::vector<double> h;      // differential values, h[anchor] == 0
  double max_residual = 0.0;  // max | lambda + h - g - P h |
};

// Solves lambda + h(x) = g(x) + sum_y P(x,y) h(y) with h(anchor) = 0 pinned.
// Throws if the direct solve fails outright (reducible chain); callers check
// max_residual against their tolerance.
AverageCostSolution solve_average_cost(const std::vector<SparseRow>& rows,
                                       const std::vector<double>& cost,
                                       int anchor);

struct StationarySolution {
  std::vector<double> pi;
  double balance_residual = 0.0;
  std::vector<int> recurrent;  // indices of the closed class
};

StationarySolution solve_stationary(const std::vector<SparseRow>& rows, int start);

// One representative node per closed communicating class of the whole graph.
std::vector<int> closed_class_representatives(const std::vector<SparseRow>& rows);

// ---- collapsed (battery, pushed-count) view of a fixed policy ----
//
// The kernel factors as P(E'|E,Q,u) P(C'|C,u) P(Q',I'|C'), so (E_k, C_k) is
// itself Markov and the full stationary distribution is pi(E,C) * P(Q,I|C).
// Collapsing makes large-battery analyses cheap without approximation.

struct CollapsedSystem {
  int battery_levels = 0;  // E_max + 1
  int push_counts = 0;     // N + 1
  std::vector<SparseRow> rows;
  std::vector<double> expected_cost;                // per (E, C) cell
  std::vector<std::array<double, 3>> action_prob;   // per (E, C) cell

  int cell(int energy, int pushed) const { return energy * push_counts + pushed; }
};

CollapsedSystem collapse_policy(const StationaryPolicy& policy,
                                const TransitionKernel& kernel);

struct PolicyAnalysis {
  double blocking = 0.0;
  std::array<double, 3> action_frequency{};
  double mean_battery = 0.0;
  double balance_residual = 0.0;
  std::vector<double> collapsed_pi;
};

// Exact stationary evaluation of a policy via the collapsed chain.
PolicyAnalysis analyze_policy(const StationaryPolicy& policy,
                              const TransitionKernel& kernel);

// Expands a collapsed stationary vector to the full state order.
std::vector<double> expand_collapsed_pi(const std::vector<double>& collapsed_pi,
                                        const TransitionKernel& kernel);

inline BlockingReport fsmc_report(const PolicyAnalysis& analysis) {
  return {analysis.blocking, Provenance::Fsmc, 0, 0.0};
}

}  // namespace ehpush
