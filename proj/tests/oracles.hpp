// Test-only oracles, kept independent of the library's computation paths:
// plain quadrature, joint-event enumeration, dense linear algebra, and an
// exhaustive policy search.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "ehpush/mdp.hpp"

namespace oracle {

// Trapezoid integral of exp(-t) * log2(1 + snr * t) over [0, 60].
inline double fading_rate(double snr, int nodes = 200'000) {
  const double upper = 60.0;
  const double h = upper / nodes;
  auto f = [&](double t) { return std::exp(-t) * std::log2(1.0 + snr * t); };
  double total = 0.5 * (f(0.0) + f(upper));
  for (int i = 1; i < nodes; ++i) total += f(i * h);
  return total * h;
}

inline double harmonic(int n) {
  double total = 0.0;
  for (int i = 1; i <= n; ++i) total += 1.0 / i;
  return total;
}

inline double generalized_harmonic(int n, double v) {
  double total = 0.0;
  for (int i = 1; i <= n; ++i) total += std::pow(static_cast<double>(i), -v);
  return total;
}

// Full next-state pmf for (state, action) by enumerating the joint outcomes
// (arrival amount, catalog event, request draw) directly from the primitive
// probabilities, bypassing the kernel's row assembly.
inline std::vector<double> kernel_row(const ehpush::SystemState& s,
                                      ehpush::Action u,
                                      const ehpush::ModelParams& params) {
  using ehpush::Action;
  const int e_max = params.battery_units;
  const int n = params.catalog_size();
  const int m_count = params.classes();
  ehpush::StateSpace space(e_max, m_count, n);
  std::vector<double> pmf(space.size(), 0.0);

  int spend = 0;
  if (u == Action::Unicast) spend = params.grid.multipliers[s.request - 1];
  if (u == Action::Push) spend = params.push_units;
  if (spend > s.energy) throw std::invalid_argument("oracle: infeasible action");

  // Arrival events: exact pmf entries, plus one overflow event carrying the
  // remaining tail mass.
  struct Event { int next_energy; double prob; };
  std::vector<Event> arrivals;
  const int room = e_max - (s.energy - spend);
  double cdf = 0.0;
  for (int a = 0; a < room; ++a) {
    const double p =
        a < static_cast<int>(params.arrival.pmf.size()) ? params.arrival.pmf[a] : 0.0;
    arrivals.push_back({s.energy - spend + a, p});
    cdf += p;
  }
  arrivals.push_back({e_max, 1.0 - cdf});

  // Catalog events.
  std::vector<std::pair<int, double>> catalog_events;
  const double leave = params.catalog.update_prob * s.pushed / n;
  if (u == Action::Push) {
    catalog_events.emplace_back(s.pushed, leave);
    catalog_events.emplace_back(s.pushed + 1, 1.0 - leave);
  } else {
    if (s.pushed > 0) catalog_events.emplace_back(s.pushed - 1, leave);
    catalog_events.emplace_back(s.pushed, 1.0 - (s.pushed > 0 ? leave : 0.0));
  }

  for (const Event& arrival : arrivals) {
    for (const auto& [next_c, pc] : catalog_events) {
      if (pc == 0.0) continue;
      // Request events against the new pushed count.
      double head = 0.0;
      for (int i = 0; i < next_c; ++i) head += params.catalog.popularity[i];
      const double p_u = params.request_prob;
      const double joint = arrival.prob * pc;
      if (next_c == n) {
        pmf[space.index({arrival.next_energy, 0, 0, next_c})] += joint;
        continue;
      }
      const double f_next = params.catalog.popularity[next_c];
      pmf[space.index({arrival.next_energy, 0, 0, next_c})] +=
          joint * ((1.0 - p_u) + p_u * head);
      for (int m = 1; m <= m_count; ++m) {
        const double area = params.grid.area_fraction(m);
        pmf[space.index({arrival.next_energy, m, 1, next_c})] +=
            joint * p_u * f_next * area;
        pmf[space.index({arrival.next_energy, m, 0, next_c})] +=
            joint * p_u * (1.0 - head - f_next) * area;
      }
    }
  }
  return pmf;
}

// Dense stationary distribution by Gaussian elimination on the balance
// equations; `rows` must form a closed communicating set.
inline std::vector<double> dense_stationary(const std::vector<std::vector<double>>& p) {
  const int n = static_cast<int>(p.size());
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  // Row 0: normalization; rows 1..n-1: balance pi_j = sum_i pi_i p_ij.
  for (int j = 0; j < n; ++j) a[0][j] = 1.0;
  a[0][n] = 1.0;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < n; ++i) a[j][i] = p[i][j] - (i == j ? 1.0 : 0.0);
    a[j][n] = 0.0;
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    if (std::abs(a[col][col]) < 1e-14)
      throw std::runtime_error("oracle: singular stationary system");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (int c = col; c <= n; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  std::vector<double> pi(n);
  for (int i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
  return pi;
}

// Long-run average cost of a fixed policy, computed from the start state by
// dense reachability + recurrence analysis + stationary solve. Independent of
// the library's solvers.
inline double dense_average_cost(const ehpush::TransitionKernel& kernel,
                                 const std::vector<ehpush::Action>& policy,
                                 int start = 0) {
  const int n = kernel.space().size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (int x = 0; x < n; ++x)
    for (const auto& [y, prob] : kernel.row(x, policy[x])) p[x][y] += prob;

  auto reach_set = [&](int from) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y = 0; y < n; ++y)
        if (p[x][y] > 0.0 && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
    }
    return seen;
  };

  const std::vector<char> from_start = reach_set(start);
  std::vector<std::vector<char>> reach(n);
  for (int x = 0; x < n; ++x)
    if (from_start[x]) reach[x] = reach_set(x);

  // x is recurrent iff everything it reaches reaches it back.
  std::vector<int> recurrent;
  for (int x = 0; x < n; ++x) {
    if (!from_start[x]) continue;
    bool rec = true;
    for (int y = 0; y < n && rec; ++y)
      if (reach[x][y] && !reach[y][x]) rec = false;
    if (rec) recurrent.push_back(x);
  }
  if (recurrent.empty()) throw std::runtime_error("oracle: no recurrent state");
  for (std::size_t i = 1; i < recurrent.size(); ++i)
    if (!reach[recurrent[0]][recurrent[i]])
      throw std::runtime_error("oracle: multiple recurrent classes");

  std::vector<std::vector<double>> sub(recurrent.size(),
                                       std::vector<double>(recurrent.size(), 0.0));
  for (std::size_t i = 0; i < recurrent.size(); ++i)
    for (std::size_t j = 0; j < recurrent.size(); ++j)
      sub[i][j] = p[recurrent[i]][recurrent[j]];
  const std::vector<double> pi = dense_stationary(sub);

  double cost = 0.0;
  for (std::size_t i = 0; i < recurrent.size(); ++i)
    cost += pi[i] * kernel.cost(recurrent[i], policy[recurrent[i]]);
  return cost;
}

// Exhaustive minimum over every feasible stationary policy.
struct EnumerationResult {
  double best_cost = 0.0;
  std::vector<ehpush::Action> best_policy;
  std::size_t policies = 0;
};

inline EnumerationResult enumerate_policies(const ehpush::TransitionKernel& kernel,
                                            std::size_t limit = 100'000) {
  using ehpush::Action;
  const int n = kernel.space().size();
  std::vector<std::vector<Action>> choices(n);
  std::size_t total = 1;
  for (int x = 0; x < n; ++x) {
    const auto set = kernel.feasible(x);
    for (Action a : {Action::Sleep, Action::Unicast, Action::Push})
      if (set.contains(a)) choices[x].push_back(a);
    total *= choices[x].size();
    if (total > limit) throw std::runtime_error("oracle: too many policies");
  }

  EnumerationResult result;
  result.best_cost = 2.0;
  std::vector<std::size_t> pick(n, 0);
  std::vector<Action> policy(n);
  result.policies = total;
  for (std::size_t count = 0; count < total; ++count) {
    for (int x = 0; x < n; ++x) policy[x] = choices[x][pick[x]];
    const double cost = dense_average_cost(kernel, policy);
    if (cost < result.best_cost) {
      result.best_cost = cost;
      result.best_policy = policy;
    }
    for (int x = 0; x < n; ++x) {
      if (++pick[x] < choices[x].size()) break;
      pick[x] = 0;
    }
  }
  return result;
}

// Upper regularized incomplete gamma Q(a, x), for chi-squared p-values.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x); Q = 1 - P.
    double term = 1.0 / a, sum = term;
    for (int k = 1; k < 1000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x).
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int k = 1; k < 1000; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace oracle
