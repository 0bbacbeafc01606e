#include <doctest.h>

#include <cmath>
#include <random>

#include "ehpush/mdp.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ehpush;

TEST_CASE("state space dimensions") {
  const ModelParams full = fixtures::standard_params();
  CHECK(enumerate_states(full).size() == 11781);

  const ModelParams micro = fixtures::micro6_params();
  CHECK(enumerate_states(micro).size() == 6);
}

TEST_CASE("state indexing is the documented bijection") {
  const ModelParams p = fixtures::standard_params();
  StateSpace space(p.battery_units, p.classes(), p.catalog_size());
  CHECK(space.index({0, 0, 0, 0}) == 0);
  // (0,0) first, then (m,0),(m,1) per class, pushed count minor.
  CHECK(space.index({0, 0, 0, 1}) == 1);
  CHECK(space.index({0, 1, 0, 0}) == 21);
  CHECK(space.index({0, 1, 1, 0}) == 42);
  CHECK(space.index({1, 0, 0, 0}) == 11 * 21);
  for (int i = 0; i < space.size(); ++i) CHECK(space.index(space.state(i)) == i);
  CHECK_THROWS(space.index({0, 0, 1, 0}));   // near flag without a request
  CHECK_THROWS(space.index({99, 0, 0, 0}));
}

TEST_CASE("feasible actions follow the energy and catalog constraints") {
  const ModelParams p = fixtures::standard_params();
  const auto only_sleep = feasible_actions({0, 2, 0, 5}, p);
  CHECK(only_sleep.sleep);
  CHECK_FALSE(only_sleep.unicast);
  CHECK_FALSE(only_sleep.push);

  // Full pushed list blocks pushing even with the energy for it.
  const auto full_list = feasible_actions({p.push_units, 0, 0, p.catalog_size()}, p);
  CHECK(full_list.count() == 1);

  const auto everything = feasible_actions({50, 2, 0, 5}, p);
  CHECK(everything.count() == 3);

  // Unicast needs the class energy, not just any energy.
  const auto low = feasible_actions({2, 3, 0, 5}, p);
  CHECK_FALSE(low.unicast);
  CHECK(feasible_actions({3, 3, 0, 5}, p).unicast);
}

TEST_CASE("stage cost charges exactly the unserved requests") {
  CHECK(stage_cost({5, 0, 0, 3}, Action::Sleep) == 0);
  CHECK(stage_cost({5, 0, 0, 3}, Action::Push) == 0);
  CHECK(stage_cost({5, 3, 0, 3}, Action::Push) == 1);
  CHECK(stage_cost({5, 3, 1, 3}, Action::Push) == 0);  // push serves the request
  CHECK(stage_cost({5, 3, 1, 3}, Action::Sleep) == 1);
  CHECK(stage_cost({5, 3, 0, 3}, Action::Unicast) == 0);
}

TEST_CASE("energy transition matches the arrival law") {
  ModelParams p = fixtures::standard_params();
  p.battery_units = 10;
  p.arrival = EnergyArrival::poisson(1.0, 18);
  const auto pmf = energy_transition(2, 0, Action::Sleep, p);
  CHECK(std::abs(pmf[3] - std::exp(-1.0)) < 1e-12);
  CHECK(std::abs(pmf[2] - std::exp(-1.0)) < 1e-12);
  CHECK(pmf[1] == 0.0);
  double total = 0.0;
  for (double v : pmf) total += v;
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("full battery absorbs every arrival") {
  const ModelParams p = fixtures::standard_params();
  const auto pmf = energy_transition(p.battery_units, 0, Action::Sleep, p);
  CHECK(pmf[p.battery_units] == 1.0);
}

TEST_CASE("energy transition row sums and spend guard") {
  const ModelParams p = fixtures::standard_params();
  for (int e = 0; e <= p.battery_units; e += 7) {
    for (Action u : {Action::Sleep, Action::Push}) {
      if (u == Action::Push && e < p.push_units) {
        CHECK_THROWS(energy_transition(e, 0, u, p));
        continue;
      }
      const auto pmf = energy_transition(e, 0, u, p);
      double total = 0.0;
      for (double v : pmf) total += v;
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS(energy_transition(2, 3, Action::Unicast, p));  // needs 3 units
}

TEST_CASE("pushed-count transition") {
  const ModelParams p = fixtures::standard_params();  // N=20, p_c=0.2

  const auto none = push_count_transition(0, Action::Sleep, p);
  REQUIRE(none.size() == 1);
  CHECK(none[0] == std::pair<int, double>{0, 1.0});

  const auto decay = push_count_transition(10, Action::Sleep, p);
  REQUIRE(decay.size() == 2);
  CHECK(decay[0].first == 9);
  CHECK(std::abs(decay[0].second - 0.1) < 1e-15);
  CHECK(decay[1].first == 10);
  CHECK(std::abs(decay[1].second - 0.9) < 1e-15);

  const auto push = push_count_transition(10, Action::Push, p);
  REQUIRE(push.size() == 2);
  CHECK(push[0].first == 10);
  CHECK(std::abs(push[0].second - 0.1) < 1e-15);
  CHECK(push[1].first == 11);
  CHECK(std::abs(push[1].second - 0.9) < 1e-15);

  CHECK_THROWS(push_count_transition(p.catalog_size(), Action::Push, p));
}

TEST_CASE("request transition worked example") {
  // N=4, v=1, p_u=0.5, one pushed content, equal-area grid with M=5.
  ModelParams p = fixtures::standard_params();
  p.catalog = Catalog::zipf(4, 1.0, 0.2);
  p.request_prob = 0.5;
  const auto pmf = request_transition(1, p);
  double total = 0.0;
  for (const auto& o : pmf) {
    if (o.request == 0) CHECK(std::abs(o.prob - 0.74) < 1e-12);
    else if (o.near_flag == 1) CHECK(std::abs(o.prob - 0.024) < 1e-12);
    else CHECK(std::abs(o.prob - 0.028) < 1e-12);
    total += o.prob;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  // Full pushed list and no-request cases collapse to the empty request.
  const auto full = request_transition(4, p);
  REQUIRE(full.size() == 1);
  CHECK(full[0].request == 0);
  CHECK(full[0].prob == 1.0);

  p.request_prob = 0.0;
  const auto idle = request_transition(2, p);
  REQUIRE(idle.size() == 1);
  CHECK(idle[0].prob == 1.0);
}

TEST_CASE("transition rows are stochastic with the right support") {
  const ModelParams p = fixtures::standard_params();
  StateSpace space(p.battery_units, p.classes(), p.catalog_size());
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  int checked = 0;
  while (checked < 200) {
    const SystemState s = space.state(pick(rng));
    const ActionSet actions = feasible_actions(s, p);
    for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
      if (!actions.contains(u)) continue;
      const SparseRow row = transition(s, u, p);
      double total = 0.0;
      const int spend = u == Action::Sleep ? 0
                        : u == Action::Push ? p.push_units
                                            : p.grid.multipliers[s.request - 1];
      for (const auto& [idx, prob] : row) {
        CHECK(prob >= 0.0);
        CHECK(prob <= 1.0);
        const SystemState next = space.state(idx);
        CHECK(std::abs(next.pushed - s.pushed) <= 1);
        CHECK(next.energy >= s.energy - spend);
        if (next.request == 0) CHECK(next.near_flag == 0);
        total += prob;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
      ++checked;
    }
  }
}

TEST_CASE("transition factorizes into its three components") {
  const ModelParams p = fixtures::standard_params();
  StateSpace space(p.battery_units, p.classes(), p.catalog_size());
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    const SystemState s = space.state(pick(rng));
    const ActionSet actions = feasible_actions(s, p);
    for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
      if (!actions.contains(u)) continue;
      const SparseRow row = transition(s, u, p);
      const auto energy = energy_transition(s.energy, s.request, u, p);
      const auto push = push_count_transition(s.pushed, u, p);
      for (const auto& [idx, prob] : row) {
        const SystemState next = space.state(idx);
        double pc = 0.0;
        for (const auto& [c, v] : push)
          if (c == next.pushed) pc = v;
        double pq = 0.0;
        for (const auto& o : request_transition(next.pushed, p))
          if (o.request == next.request && o.near_flag == next.near_flag) pq = o.prob;
        CHECK(std::abs(prob - energy[next.energy] * pc * pq) < 1e-15);
      }
    }
  }
}

TEST_CASE("empty-state sleep marginal equals the energy transition") {
  ModelParams p = fixtures::standard_params();
  p.arrival = EnergyArrival::poisson(1.0, p.battery_units + 7);
  StateSpace space(p.battery_units, p.classes(), p.catalog_size());
  const SparseRow row = transition({0, 0, 0, 0}, Action::Sleep, p);
  std::vector<double> marginal(p.battery_units + 1, 0.0);
  for (const auto& [idx, prob] : row) marginal[space.state(idx).energy] += prob;
  const auto energy = energy_transition(0, 0, Action::Sleep, p);
  for (int e = 0; e <= p.battery_units; ++e)
    CHECK(std::abs(marginal[e] - energy[e]) < 1e-12);
}

TEST_CASE("kernel rows equal the joint-event enumeration") {
  const ModelParams p = fixtures::tiny_params();
  const TransitionKernel kernel(p);
  const StateSpace& space = kernel.space();
  double worst = 0.0;
  for (int x = 0; x < space.size(); ++x) {
    const ActionSet actions = kernel.feasible(x);
    for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
      if (!actions.contains(u)) continue;
      const std::vector<double> want = oracle::kernel_row(space.state(x), u, p);
      std::vector<double> got(space.size(), 0.0);
      for (const auto& [idx, prob] : kernel.row(x, u)) got[idx] += prob;
      for (int y = 0; y < space.size(); ++y)
        worst = std::max(worst, std::abs(got[y] - want[y]));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("cached kernel rows match the free-function rows") {
  const ModelParams p = fixtures::standard_params();
  const TransitionKernel kernel(p);
  const StateSpace& space = kernel.space();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  for (int trial = 0; trial < 40; ++trial) {
    const int x = pick(rng);
    const SystemState s = space.state(x);
    const ActionSet actions = kernel.feasible(x);
    for (Action u : {Action::Sleep, Action::Unicast, Action::Push}) {
      if (!actions.contains(u)) continue;
      std::vector<double> dense(space.size(), 0.0);
      for (const auto& [idx, prob] : transition(s, u, p)) dense[idx] += prob;
      double total = 0.0;
      for (const auto& [idx, prob] : kernel.row(x, u)) {
        CHECK(std::abs(dense[idx] - prob) < 1e-15);
        total += prob;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("transition rejects infeasible actions") {
  const ModelParams p = fixtures::standard_params();
  CHECK_THROWS(transition({0, 1, 0, 0}, Action::Unicast, p));
  CHECK_THROWS(transition({p.push_units, 0, 0, p.catalog_size()}, Action::Push, p));
  const TransitionKernel kernel(p);
  CHECK_THROWS(kernel.row(kernel.space().index({0, 1, 0, 0}), Action::Unicast));
}

TEST_CASE("params validation") {
  ModelParams p = fixtures::standard_params();
  std::vector<std::string> warnings;
  p.validate(&warnings);
  CHECK(warnings.empty());

  p.push_units = 4;  // differs from the edge unicast cost
  warnings.clear();
  p.validate(&warnings);
  CHECK(warnings.size() == 1);

  p.push_units = p.battery_units + 1;
  CHECK_THROWS(p.validate());

  p = fixtures::standard_params();
  p.request_prob = 1.5;
  CHECK_THROWS(p.validate());

  p = fixtures::standard_params();
  p.arrival.pmf[0] += 0.1;
  CHECK_THROWS(p.validate());
}
