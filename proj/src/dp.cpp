#include "ehpush/dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehpush {

namespace {

// h(x) = g(x, u) - lambda + sum_{E',C'} P(E'|..) P(C'|..) w(E', C'), which is
// the evaluation equation with the request factor of the next state already
// summed into w.
std::vector<double> expand_differential(const StationaryPolicy& policy,
                                        const TransitionKernel& kernel,
                                        double lambda,
                                        const std::vector<double>& w) {
  const StateSpace& space = kernel.space();
  const int c_count = space.catalog_size() + 1;
  std::vector<double> h(space.size());
  for (int x = 0; x < space.size(); ++x) {
    const SystemState s = space.state(x);
    const Action u = policy[x];
    const int remaining = s.energy - kernel.spend(s.request, u);
    double future = 0.0;
    for (const auto& [next_c, pc] : kernel.push_row(s.pushed, u)) {
      double inner = 0.0;
      for (const auto& [next_e, pe] : kernel.energy_row(remaining))
        inner += pe * w[next_e * c_count + next_c];
      future += pc * inner;
    }
    h[x] = stage_cost(s, u) - lambda + future;
  }
  return h;
}

double full_residual(const StationaryPolicy& policy, const TransitionKernel& kernel,
                     double lambda, const std::vector<double>& h) {
  double worst = 0.0;
  SparseRow row;
  for (int x = 0; x < kernel.space().size(); ++x) {
    kernel.row(x, policy[x], row);
    double lhs = lambda + h[x] - kernel.cost(x, policy[x]);
    for (const auto& [y, p] : row) lhs -= p * h[y];
    worst = std::max(worst, std::abs(lhs));
  }
  return worst;
}

[[noreturn]] void report_reducible(const CollapsedSystem& sys,
                                   const std::string& why) {
  // Name the offending structure: the closed classes of the policy chain.
  const std::vector<int> reps = closed_class_representatives(sys.rows);
  if (reps.size() > 1) {
    std::string cells;
    for (std::size_t i = 0; i < reps.size() && i < 4; ++i) {
      cells += (i ? ", " : "") + std::string("(E=") +
               std::to_string(reps[i] / sys.push_counts) +
               ",C=" + std::to_string(reps[i] % sys.push_counts) + ")";
    }
    throw std::runtime_error(
        "policy evaluation failed: the policy chain is reducible with " +
        std::to_string(reps.size()) + " closed classes, e.g. around cells " +
        cells + "; " + why);
  }
  throw std::runtime_error("policy evaluation failed: " + why);
}

EvaluationResult evaluate_full_space(const StationaryPolicy& policy,
                                     const TransitionKernel& kernel) {
  const int n = kernel.space().size();
  std::vector<SparseRow> rows(n);
  std::vector<double> cost(n);
  for (int x = 0; x < n; ++x) {
    kernel.row(x, policy[x], rows[x]);
    cost[x] = kernel.cost(x, policy[x]);
  }
  AverageCostSolution sol = solve_average_cost(rows, cost, n - 1);
  return {sol.average_cost, std::move(sol.h), n - 1, sol.max_residual};
}

}  // namespace

StationaryPolicy all_sleep_policy(const TransitionKernel& kernel) {
  return StationaryPolicy(kernel.space().size(), Action::Sleep);
}

EvaluationResult policy_evaluation(const StationaryPolicy& policy,
                                   const TransitionKernel& kernel,
                                   double residual_tol) {
  validate_policy(policy, kernel);
  const int n = kernel.space().size();
  const CollapsedSystem sys = collapse_policy(policy, kernel);

  EvaluationResult result;
  result.anchor = n - 1;
  try {
    const int nz = static_cast<int>(sys.rows.size());
    AverageCostSolution sol =
        solve_average_cost(sys.rows, sys.expected_cost, nz - 1);
    result.average_cost = sol.average_cost;
    result.h = expand_differential(policy, kernel, sol.average_cost, sol.h);
    const double shift = result.h[result.anchor];
    for (double& v : result.h) v -= shift;
    result.max_residual =
        full_residual(policy, kernel, result.average_cost, result.h);
  } catch (const std::exception&) {
    result.max_residual = 1.0;
  }

  if (result.max_residual >= residual_tol) {
    // Rare fallback: solve the evaluation equations on the full space.
    try {
      result = evaluate_full_space(policy, kernel);
    } catch (const std::exception& e) {
      report_reducible(sys, e.what());
    }
    if (result.max_residual >= residual_tol)
      report_reducible(sys, "residual " + std::to_string(result.max_residual) +
                                " above tolerance");
  }
  if (result.average_cost < -1e-12 || result.average_cost > 1.0 + 1e-12)
    throw std::runtime_error("policy evaluation: average cost outside [0, 1]");
  result.average_cost = std::clamp(result.average_cost, 0.0, 1.0);
  return result;
}

StationaryPolicy policy_improvement(std::span<const double> h,
                                    const TransitionKernel& kernel) {
  const int n = kernel.space().size();
  if (static_cast<int>(h.size()) != n)
    throw std::invalid_argument("policy_improvement: h has wrong length");
  StationaryPolicy policy(n, Action::Sleep);
  SparseRow row;
  for (int x = 0; x < n; ++x) {
    const ActionSet actions = kernel.feasible(x);
    double best_q = 0.0;
    Action best = Action::Sleep;
    bool first = true;
    for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
      if (!actions.contains(u)) continue;
      kernel.row(x, u, row);
      double q = kernel.cost(x, u);
      for (const auto& [y, p] : row) q += p * h[y];
      // Ties within solver noise keep the lower action index; a later action
      // must beat the incumbent by a clear margin.
      if (first || q < best_q - 1e-12) {
        best_q = q;
        best = u;
        first = false;
      }
    }
    policy[x] = best;
  }
  return policy;
}

PolicyIterationResult policy_iteration(const TransitionKernel& kernel,
                                       StationaryPolicy initial,
                                       PolicyIterationOptions options) {
  PolicyIterationResult result;
  result.policy = initial.empty() ? all_sleep_policy(kernel) : std::move(initial);

  double previous_cost = 2.0;  // above any valid average cost
  SparseRow row;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.evaluation =
        policy_evaluation(result.policy, kernel, options.residual_tol);
    const double lambda = result.evaluation.average_cost;
    if (lambda > previous_cost + 1e-10)
      throw std::runtime_error(
          "policy iteration: average cost increased from " +
          std::to_string(previous_cost) + " to " + std::to_string(lambda));
    previous_cost = lambda;

    // Greedy step with incumbent retention: a state switches only when some
    // action beats its current one by a clear margin, and then takes the
    // argmin under the lowest-index tie rule. Retention is what rules out
    // cycling among equally good policies.
    StationaryPolicy improved = policy_improvement(result.evaluation.h, kernel);
    int changed = 0;
    for (int x = 0; x < kernel.space().size(); ++x) {
      if (improved[x] == result.policy[x]) continue;
      kernel.row(x, result.policy[x], row);
      double incumbent_q = kernel.cost(x, result.policy[x]);
      for (const auto& [y, p] : row) incumbent_q += p * result.evaluation.h[y];
      kernel.row(x, improved[x], row);
      double candidate_q = kernel.cost(x, improved[x]);
      for (const auto& [y, p] : row) candidate_q += p * result.evaluation.h[y];
      if (candidate_q < incumbent_q - 1e-12)
        ++changed;
      else
        improved[x] = result.policy[x];
    }
    result.trace.push_back({iter, lambda, changed});

    if (changed == 0) {
      // Fixed point: the evaluation of the returned policy satisfies the
      // optimality equation; measure the residual against the greedy values.
      double worst = 0.0;
      SparseRow row;
      for (int x = 0; x < kernel.space().size(); ++x) {
        const ActionSet actions = kernel.feasible(x);
        double best_q = 0.0;
        bool first = true;
        for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
          if (!actions.contains(u)) continue;
          kernel.row(x, u, row);
          double q = kernel.cost(x, u);
          for (const auto& [y, p] : row) q += p * result.evaluation.h[y];
          if (first || q < best_q) {
            best_q = q;
            first = false;
          }
        }
        worst = std::max(worst, std::abs(lambda + result.evaluation.h[x] - best_q));
      }
      result.bellman_residual = worst;
      return result;
    }
    result.policy = std::move(improved);
  }
  throw std::runtime_error(
      "policy iteration: no convergence within the iteration cap");
}

}  // namespace ehpush
