#include "ehpush/chain.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehpush {

namespace {

std::string state_label(const TransitionKernel& kernel, int index) {
  const SystemState s = kernel.space().state(index);
  return "(E=" + std::to_string(s.energy) + ",Q=" + std::to_string(s.request) +
         ",I=" + std::to_string(s.near_flag) + ",C=" + std::to_string(s.pushed) + ")";
}

std::vector<int> reachable_from(const std::vector<SparseRow>& rows, int start) {
  std::vector<char> seen(rows.size(), 0);
  std::vector<int> stack{start}, order;
  seen[start] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    order.push_back(x);
    for (const auto& [y, p] : rows[x]) {
      if (p > 0.0 && !seen[y]) {
        seen[y] = 1;
        stack.push_back(y);
      }
    }
  }
  std::sort(order.begin(), order.end());
  return order;
}

// Iterative Tarjan over the reachable subgraph; returns the component id per
// local node plus the component count.
struct SccResult {
  std::vector<int> comp;
  int count = 0;
};

SccResult tarjan_scc(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  SccResult res;
  res.comp.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0;

  struct Frame {
    int v;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.v].size()) {
        const int w = adj[f.v][f.edge++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          while (true) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            res.comp[w] = res.count;
            if (w == f.v) break;
          }
          ++res.count;
        }
        const int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  return res;
}

double balance_residual(const std::vector<SparseRow>& rows,
                        const std::vector<double>& pi) {
  std::vector<double> flow(pi.size(), 0.0);
  for (std::size_t x = 0; x < rows.size(); ++x) {
    if (pi[x] == 0.0) continue;
    for (const auto& [y, p] : rows[x]) flow[y] += pi[x] * p;
  }
  double res = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x)
    res = std::max(res, std::abs(flow[x] - pi[x]));
  return res;
}

}  // namespace

void validate_policy(const StationaryPolicy& policy, const TransitionKernel& kernel) {
  if (static_cast<int>(policy.size()) != kernel.space().size())
    throw std::invalid_argument("policy: wrong length for the state space");
  for (int x = 0; x < kernel.space().size(); ++x) {
    if (!kernel.feasible(x).contains(policy[x]))
      throw std::invalid_argument("policy: infeasible action " +
                                  std::string(action_name(policy[x])) +
                                  " at state " + state_label(kernel, x));
  }
}

RowMatrix induced_chain(const StationaryPolicy& policy, const TransitionKernel& kernel) {
  validate_policy(policy, kernel);
  const int n = kernel.space().size();
  RowMatrix chain(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  SparseRow row;
  for (int x = 0; x < n; ++x) {
    kernel.row(x, policy[x], row);
    for (const auto& [y, p] : row) triplets.emplace_back(x, y, p);
  }
  chain.setFromTriplets(triplets.begin(), triplets.end());
  return chain;
}

StationarySolution solve_stationary(const std::vector<SparseRow>& rows, int start) {
  const int n = static_cast<int>(rows.size());
  if (start < 0 || start >= n)
    throw std::invalid_argument("stationary solve: bad start state");

  const std::vector<int> reach = reachable_from(rows, start);
  const int nr = static_cast<int>(reach.size());
  std::vector<int> local(n, -1);
  for (int i = 0; i < nr; ++i) local[reach[i]] = i;

  std::vector<std::vector<int>> adj(nr);
  for (int i = 0; i < nr; ++i)
    for (const auto& [y, p] : rows[reach[i]])
      if (p > 0.0) adj[i].push_back(local[y]);

  const SccResult scc = tarjan_scc(adj);
  std::vector<char> closed(scc.count, 1);
  for (int i = 0; i < nr; ++i)
    for (int j : adj[i])
      if (scc.comp[j] != scc.comp[i]) closed[scc.comp[i]] = 0;

  int closed_comp = -1;
  for (int c = 0; c < scc.count; ++c) {
    if (!closed[c]) continue;
    if (closed_comp != -1) {
      int a = -1, b = -1;
      for (int i = 0; i < nr && (a == -1 || b == -1); ++i) {
        if (scc.comp[i] == closed_comp && a == -1) a = reach[i];
        if (scc.comp[i] == c && b == -1) b = reach[i];
      }
      throw std::runtime_error(
          "stationary solve: multiple recurrent classes reachable; states " +
          std::to_string(a) + " and " + std::to_string(b) + " do not communicate");
    }
    closed_comp = c;
  }
  if (closed_comp == -1)
    throw std::runtime_error("stationary solve: no closed class found");

  std::vector<int> recurrent;
  for (int i = 0; i < nr; ++i)
    if (scc.comp[i] == closed_comp) recurrent.push_back(reach[i]);
  const int k = static_cast<int>(recurrent.size());
  std::vector<int> pos(n, -1);
  for (int i = 0; i < k; ++i) pos[recurrent[i]] = i;

  // (P_rr - I)^T pi = 0 with the first balance row replaced by normalization.
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < k; ++i) {
    for (const auto& [y, p] : rows[recurrent[i]]) {
      if (p == 0.0) continue;
      const int j = pos[y];
      if (j < 0)
        throw std::runtime_error("stationary solve: closed class leaks");
      if (j != 0) triplets.emplace_back(j, i, p);
    }
  }
  for (int i = 1; i < k; ++i) triplets.emplace_back(i, i, -1.0);
  for (int i = 0; i < k; ++i) triplets.emplace_back(0, i, 1.0);

  Eigen::SparseMatrix<double> a(k, k);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs[0] = 1.0;

  StationarySolution out;
  out.recurrent = recurrent;
  out.pi.assign(n, 0.0);

  bool solved = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() == Eigen::Success) {
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() == Eigen::Success) {
      // SparseLU can hand back a low-accuracy solution even on well-behaved
      // systems; a few refinement sweeps with the existing factorization
      // restore full precision.
      for (int sweep = 0; sweep < 3; ++sweep) {
        const Eigen::VectorXd residual = a * x - rhs;
        if (residual.cwiseAbs().maxCoeff() < 1e-13) break;
        x -= lu.solve(residual).eval();
      }
      double total = 0.0;
      for (int i = 0; i < k; ++i) total += x[i];
      for (int i = 0; i < k; ++i)
        out.pi[recurrent[i]] = std::max(0.0, x[i] / total);
      out.balance_residual = balance_residual(rows, out.pi);
      solved = out.balance_residual < 1e-9;
    }
  }

  if (!solved) {
    // Damped power iteration pi <- pi * (I + P)/2 on the closed class; the
    // damping removes periodicity.
    std::vector<double> pi(k, 1.0 / k), next(k, 0.0);
    for (long it = 0; it < 10'000'000; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int i = 0; i < k; ++i) {
        next[i] += 0.5 * pi[i];
        for (const auto& [y, p] : rows[recurrent[i]]) next[pos[y]] += 0.5 * pi[i] * p;
      }
      double diff = 0.0, total = 0.0;
      for (int i = 0; i < k; ++i) total += next[i];
      for (int i = 0; i < k; ++i) {
        next[i] /= total;
        diff = std::max(diff, std::abs(next[i] - pi[i]));
      }
      pi.swap(next);
      if (diff < 1e-14) break;
    }
    for (int i = 0; i < k; ++i) out.pi[recurrent[i]] = pi[i];
    out.balance_residual = balance_residual(rows, out.pi);
    if (out.balance_residual >= 1e-9)
      throw std::runtime_error(
          "stationary solve: residual " + std::to_string(out.balance_residual) +
          " after direct solve and power iteration");
  }
  return out;
}

std::vector<int> closed_class_representatives(const std::vector<SparseRow>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<std::vector<int>> adj(n);
  for (int x = 0; x < n; ++x)
    for (const auto& [y, p] : rows[x])
      if (p > 0.0) adj[x].push_back(y);
  const SccResult scc = tarjan_scc(adj);
  std::vector<char> closed(scc.count, 1);
  for (int x = 0; x < n; ++x)
    for (int y : adj[x])
      if (scc.comp[y] != scc.comp[x]) closed[scc.comp[x]] = 0;
  std::vector<int> reps(scc.count, -1);
  for (int x = 0; x < n; ++x)
    if (closed[scc.comp[x]] && reps[scc.comp[x]] == -1) reps[scc.comp[x]] = x;
  std::vector<int> out;
  for (int r : reps)
    if (r != -1) out.push_back(r);
  return out;
}

StationaryDistribution stationary_distribution(const RowMatrix& chain,
                                               int start_index) {
  const int n = static_cast<int>(chain.rows());
  std::vector<SparseRow> rows(n);
  for (int x = 0; x < n; ++x)
    for (RowMatrix::InnerIterator it(chain, x); it; ++it)
      rows[x].emplace_back(static_cast<int>(it.col()), it.value());
  StationarySolution sol = solve_stationary(rows, start_index);
  return {std::move(sol.pi), sol.balance_residual};
}

double blocking_probability(const StationaryPolicy& policy,
                            const StationaryDistribution& dist,
                            const TransitionKernel& kernel) {
  const int n = kernel.space().size();
  if (static_cast<int>(dist.pi.size()) != n ||
      static_cast<int>(policy.size()) != n)
    throw std::invalid_argument("blocking_probability: size mismatch");
  double blocking = 0.0;
  for (int x = 0; x < n; ++x)
    if (dist.pi[x] != 0.0) blocking += dist.pi[x] * kernel.cost(x, policy[x]);
  return blocking;
}

CollapsedSystem collapse_policy(const StationaryPolicy& policy,
                                const TransitionKernel& kernel) {
  validate_policy(policy, kernel);
  const StateSpace& space = kernel.space();
  const int e_count = space.battery_units() + 1;
  const int c_count = space.catalog_size() + 1;
  const int nz = e_count * c_count;

  CollapsedSystem sys;
  sys.battery_levels = e_count;
  sys.push_counts = c_count;
  sys.rows.resize(nz);
  sys.expected_cost.assign(nz, 0.0);
  sys.action_prob.assign(nz, {0.0, 0.0, 0.0});

  std::vector<double> scratch(nz, 0.0);
  std::vector<int> touched;
  for (int e = 0; e < e_count; ++e) {
    for (int c = 0; c < c_count; ++c) {
      const int z = e * c_count + c;
      touched.clear();
      for (const auto& outcome : kernel.request_row(c)) {
        const SystemState x{e, outcome.request, outcome.near_flag, c};
        const Action u = policy[space.index(x)];
        sys.expected_cost[z] += outcome.prob * stage_cost(x, u);
        sys.action_prob[z][static_cast<int>(u)] += outcome.prob;
        const int remaining = e - kernel.spend(outcome.request, u);
        for (const auto& [next_c, pc] : kernel.push_row(c, u)) {
          for (const auto& [next_e, pe] : kernel.energy_row(remaining)) {
            const double add = outcome.prob * pc * pe;
            if (add == 0.0) continue;
            const int zy = next_e * c_count + next_c;
            if (scratch[zy] == 0.0) touched.push_back(zy);
            scratch[zy] += add;
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      for (int zy : touched) {
        sys.rows[z].emplace_back(zy, scratch[zy]);
        scratch[zy] = 0.0;
      }
    }
  }
  return sys;
}

PolicyAnalysis analyze_policy(const StationaryPolicy& policy,
                              const TransitionKernel& kernel) {
  const CollapsedSystem sys = collapse_policy(policy, kernel);
  const StationarySolution sol = solve_stationary(sys.rows, sys.cell(0, 0));

  PolicyAnalysis out;
  out.collapsed_pi = sol.pi;
  out.balance_residual = sol.balance_residual;
  for (int z = 0; z < static_cast<int>(sol.pi.size()); ++z) {
    const double w = sol.pi[z];
    if (w == 0.0) continue;
    out.blocking += w * sys.expected_cost[z];
    for (int a = 0; a < 3; ++a) out.action_frequency[a] += w * sys.action_prob[z][a];
    out.mean_battery += w * (z / sys.push_counts);
  }
  return out;
}

std::vector<double> expand_collapsed_pi(const std::vector<double>& collapsed_pi,
                                        const TransitionKernel& kernel) {
  const StateSpace& space = kernel.space();
  const int c_count = space.catalog_size() + 1;
  std::vector<double> pi(space.size(), 0.0);
  for (int z = 0; z < static_cast<int>(collapsed_pi.size()); ++z) {
    if (collapsed_pi[z] == 0.0) continue;
    const int e = z / c_count;
    const int c = z % c_count;
    for (const auto& outcome : kernel.request_row(c))
      pi[space.index({e, outcome.request, outcome.near_flag, c})] +=
          collapsed_pi[z] * outcome.prob;
  }
  return pi;
}

AverageCostSolution solve_average_cost(const std::vector<SparseRow>& rows,
                                       const std::vector<double>& cost,
                                       int anchor) {
  const int n = static_cast<int>(rows.size());
  if (static_cast<int>(cost.size()) != n || anchor < 0 || anchor >= n)
    throw std::invalid_argument("average-cost solve: bad inputs");

  // Unknowns (h_0 .. h_{n-1}, lambda); one extra equation pins h(anchor) = 0.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(rows.size() * 8 + 2 * n);
  for (int x = 0; x < n; ++x) {
    double diag = 1.0;
    for (const auto& [y, p] : rows[x]) {
      if (y == x)
        diag -= p;
      else
        triplets.emplace_back(x, y, -p);
    }
    triplets.emplace_back(x, x, diag);
    triplets.emplace_back(x, n, 1.0);
  }
  triplets.emplace_back(n, anchor, 1.0);

  Eigen::SparseMatrix<double> a(n + 1, n + 1);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::VectorXd rhs(n + 1);
  for (int x = 0; x < n; ++x) rhs[x] = cost[x];
  rhs[n] = 0.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(
        "average-cost solve: singular system (policy chain is reducible or "
        "ill-conditioned)");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("average-cost solve: back-substitution failed");
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Eigen::VectorXd residual = a * x - rhs;
    if (residual.cwiseAbs().maxCoeff() < 1e-13) break;
    x -= lu.solve(residual).eval();
  }

  AverageCostSolution out;
  out.average_cost = x[n];
  out.h.assign(n, 0.0);
  for (int i = 0; i < n; ++i) out.h[i] = x[i];
  for (int i = 0; i < n; ++i) {
    double lhs = out.average_cost + out.h[i] - cost[i];
    for (const auto& [y, p] : rows[i]) lhs -= p * out.h[y];
    out.max_residual = std::max(out.max_residual, std::abs(lhs));
  }
  return out;
}

}  // namespace ehpush
