#include <doctest.h>

#include <cmath>

#include "ehpush/chain.hpp"
#include "ehpush/thresholds.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ehpush;

TEST_CASE("steady push probability") {
  CHECK(steady_push_probability(0, 0.2, 20) == 0.0);
  CHECK(std::abs(steady_push_probability(10, 0.2, 20) - 2.0 / 20.2) < 1e-15);
  CHECK(std::abs(steady_push_probability(10, 0.2, 20) - 0.099010) < 1e-6);
  CHECK(steady_push_probability(10, 0.0, 20) == 0.0);
  CHECK_THROWS(steady_push_probability(21, 0.2, 20));
}

TEST_CASE("blocking lower bound") {
  const ModelParams p = fixtures::standard_params(0.2, 0.9);
  CHECK(blocking_lower_bound(p, 0) == 0.0);
  CHECK(blocking_lower_bound(p, 20) == 0.0);
  const double want =
      (0.2 * 10 / 20.2) * 0.9 * (1.0 - oracle::harmonic(10) / oracle::harmonic(20));
  CHECK(std::abs(blocking_lower_bound(p, 10) - want) < 1e-15);
  CHECK(std::abs(blocking_lower_bound(p, 10) - 0.016563) < 3e-6);
}

TEST_CASE("push-only threshold") {
  CHECK(push_only_threshold(fixtures::standard_params(0.6, 0.9, 1.0)) == 6);
  CHECK(push_only_threshold(fixtures::standard_params(0.1, 0.9, 1.5)) == 20);
  CHECK(push_only_threshold(fixtures::standard_params(0.6, 0.9, 0.0)) == 0);
  CHECK(push_only_threshold(fixtures::standard_params(0.0, 0.9, 1.0)) == 20);
}

TEST_CASE("push-only blocking limit") {
  const ModelParams high = fixtures::standard_params(0.1, 0.9, 1.5);
  CHECK(push_only_blocking_limit(high) == 0.0);  // threshold reaches N

  const ModelParams p = fixtures::standard_params(0.6, 0.9, 1.0);
  const double want = 0.9 * (1.0 - 2.45 / oracle::harmonic(20));
  CHECK(std::abs(push_only_blocking_limit(p) - want) < 1e-15);
  CHECK(std::abs(push_only_blocking_limit(p) - 0.2871) < 1e-4);

  CHECK(push_only_blocking_limit(fixtures::standard_params(0.6, 0.0, 1.0)) == 0.0);
}

TEST_CASE("energy-efficient threshold and the per-rank break-even test") {
  const ModelParams p = fixtures::standard_params(0.2, 0.9);
  const int threshold = energy_efficient_threshold(p);
  const double want = std::floor(20 * 0.9 * 3.0 / (0.2 * 5 * oracle::harmonic(20)));
  CHECK(threshold == static_cast<int>(want));
  CHECK(threshold == 15);
  for (int rank = 1; rank <= threshold; ++rank) CHECK(push_worthwhile(p, rank));
  CHECK_FALSE(push_worthwhile(p, threshold + 1));

  CHECK(energy_efficient_threshold(fixtures::standard_params(0.2, 0.0)) == 0);
  CHECK(energy_efficient_threshold(fixtures::standard_params(0.0, 0.9)) == 20);
}

TEST_CASE("uniform popularity break-even is all-or-nothing") {
  ModelParams p = fixtures::standard_params(0.2, 0.9);
  p.catalog = Catalog::zipf(20, 0.0, 0.2);
  // E_p = 5 vs (N/p_c) p_u f Ebar = 100*0.9*0.05*3 = 13.5: push everything.
  CHECK(energy_efficient_threshold(p) == 20);
  p.catalog = Catalog::zipf(20, 0.0, 0.2);
  p.request_prob = 0.03;  // 100*0.03*0.05*3 = 0.45 < 5: push nothing
  CHECK(energy_efficient_threshold(p) == 0);
}

TEST_CASE("unicast cutoff on the worked example") {
  const ModelParams p = fixtures::standard_params(0.2, 0.9, 1.0);
  const UnicastCutoff cut = unicast_cutoff(p, 15);
  CHECK(cut.class_cutoff == 5);
  const double push_prob = 0.2 * 15 / 20.2;
  CHECK(std::abs(cut.push_budget - push_prob * 5) < 1e-12);
  CHECK(std::abs(cut.push_budget - 0.742574) < 1e-6);
  const double eta_want =
      (1.0 - push_prob) * 0.9 * (1.0 - oracle::harmonic(15) / oracle::harmonic(20));
  CHECK(std::abs(cut.eta - eta_want) < 1e-15);
  CHECK(std::abs(cut.eta - 0.059537) < 1e-6);
}

TEST_CASE("unicast cutoff clamps at both ends") {
  // Arrivals cannot even cover the push budget: no unicast at all.
  const ModelParams starved = fixtures::standard_params(0.6, 0.9, 0.1);
  CHECK(unicast_cutoff(starved, 10).class_cutoff == 0);
  // Plentiful arrivals serve the whole cell.
  const ModelParams rich = fixtures::standard_params(0.2, 0.9, 50.0);
  CHECK(unicast_cutoff(rich, 10).class_cutoff == 5);
  // No unicast demand beyond a full pushed list: cutoff defaults to M.
  CHECK(unicast_cutoff(rich, 20).eta == 0.0);
  CHECK(unicast_cutoff(rich, 20).class_cutoff == 5);
}

TEST_CASE("energy-efficient blocking limit") {
  const ModelParams p = fixtures::standard_params(0.2, 0.9, 1.0);
  const double limit = energy_efficient_blocking_limit(p);
  // The cutoff reaches the cell edge, so the limit collapses to the floor.
  CHECK(std::abs(limit - blocking_lower_bound(p, 15)) < 1e-15);
  CHECK(std::abs(limit - 0.010385) < 1e-6);

  const ModelParams starved = fixtures::standard_params(0.2, 0.9, 0.5);
  CHECK_THROWS_AS(static_cast<void>(energy_efficient_blocking_limit(starved)),
                  std::domain_error);

  CHECK(energy_efficient_blocking_limit(fixtures::standard_params(0.2, 0.0)) == 0.0);
}

TEST_CASE("built policies take the documented actions") {
  const ModelParams p = fixtures::standard_params(0.6, 0.9, 1.0);
  StateSpace space(p.battery_units, p.classes(), p.catalog_size());

  const ThresholdPolicySpec potb = make_threshold_spec(PolicyKind::PushOnly, p);
  REQUIRE(potb.push_threshold == 6);
  const StationaryPolicy push_only = build_policy(potb, p);
  CHECK(push_only[space.index({p.push_units, 3, 0, 5})] == Action::Push);
  CHECK(push_only[space.index({p.push_units - 1, 3, 0, 5})] == Action::Sleep);
  CHECK(push_only[space.index({50, 3, 0, 6})] == Action::Sleep);  // at threshold

  const ThresholdPolicySpec sod = make_threshold_spec(PolicyKind::ServiceOnDemand, p);
  const StationaryPolicy on_demand = build_policy(sod, p);
  CHECK(on_demand[space.index({0, 2, 0, 3})] == Action::Sleep);  // no energy
  CHECK(on_demand[space.index({2, 2, 0, 3})] == Action::Unicast);
  CHECK(on_demand[space.index({50, 0, 0, 3})] == Action::Sleep);

  ThresholdPolicySpec eetb = make_threshold_spec(PolicyKind::EnergyEfficient, p);
  eetb.unicast_cutoff_class = 3;  // force a strict interior cutoff
  const StationaryPolicy efficient = build_policy(eetb, p);
  CHECK(efficient[space.index({50, 4, 0, eetb.push_threshold})] == Action::Sleep);
  CHECK(efficient[space.index({50, 3, 0, eetb.push_threshold})] == Action::Unicast);
  CHECK(efficient[space.index({50, 3, 0, eetb.push_threshold - 1})] == Action::Push);
  CHECK(efficient[space.index({0, 3, 0, eetb.push_threshold})] == Action::Sleep);
}

TEST_CASE("every built policy is feasible") {
  for (const ModelParams& p :
       {fixtures::standard_params(0.2, 0.9, 1.0), fixtures::reduced_params(),
        fixtures::standard_params(0.6, 0.9, 1.5)}) {
    const TransitionKernel kernel(p);
    for (PolicyKind kind : {PolicyKind::PushOnly, PolicyKind::AlwaysPush,
                            PolicyKind::EnergyEfficient, PolicyKind::GreedyThreshold,
                            PolicyKind::ServiceOnDemand}) {
      CHECK_NOTHROW(
          validate_policy(build_policy(make_threshold_spec(kind, p), p), kernel));
    }
  }
}

TEST_CASE("always-push equals push-only when the threshold reaches the catalog") {
  const ModelParams p = fixtures::standard_params(0.2, 0.9, 1.5);
  REQUIRE(push_only_threshold(p) == 20);
  const StationaryPolicy potb =
      build_policy(make_threshold_spec(PolicyKind::PushOnly, p), p);
  const StationaryPolicy aptb =
      build_policy(make_threshold_spec(PolicyKind::AlwaysPush, p), p);
  CHECK(potb == aptb);
}

TEST_CASE("greedy search returns the scan minimum with first-found ties") {
  const ModelParams p = fixtures::standard_params(0.4, 0.9, 1.5);
  const ThresholdPolicySpec best = greedy_threshold_search(p);
  // Independent re-scan.
  double best_seen = 2.0;
  int best_c = -1;
  for (int c = 0; c <= push_only_threshold(p); ++c) {
    const double predicted = threshold_blocking_prediction(p, c);
    if (predicted < best_seen) {
      best_seen = predicted;
      best_c = c;
    }
  }
  CHECK(best.push_threshold == best_c);
  CHECK(std::abs(best.predicted_blocking - best_seen) < 1e-15);
  CHECK(best.predicted_blocking <= push_only_blocking_limit(p) + 1e-15);
  CHECK(best.predicted_blocking <= energy_efficient_blocking_limit(p) + 1e-15);
}

TEST_CASE("greedy search degenerates to on-demand service as requests vanish") {
  const ModelParams p = fixtures::standard_params(0.2, 1e-9, 0.75);
  const ThresholdPolicySpec best = greedy_threshold_search(p);
  CHECK(best.push_threshold == 0);
  CHECK(best.unicast_cutoff_class == 5);
}

TEST_CASE("greedy prediction dominates both named policies across the sweep") {
  for (double pc : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}) {
    const ModelParams p = fixtures::standard_params(pc, 0.9, 1.5);
    const ThresholdPolicySpec best = greedy_threshold_search(p);
    CHECK(best.predicted_blocking <= push_only_blocking_limit(p) + 1e-15);
    const ModelParams copy = p;
    const UnicastCutoff cut = unicast_cutoff(copy, energy_efficient_threshold(copy));
    if (copy.arrival.mean >= cut.push_budget)
      CHECK(best.predicted_blocking <=
            energy_efficient_blocking_limit(copy) + 1e-15);
    CHECK(blocking_lower_bound(p, best.push_threshold) <=
          best.predicted_blocking + 1e-15);
  }
}

TEST_CASE("abundant energy: exact chain matches the two-state push law") {
  for (double pc : {0.2, 0.6}) {
    for (int c_thr : {5, 10}) {
      const ModelParams p = fixtures::abundant_params(pc);
      const TransitionKernel kernel(p);
      ThresholdPolicySpec spec;
      spec.kind = PolicyKind::PushOnly;
      spec.push_threshold = c_thr;
      const PolicyAnalysis analysis = analyze_policy(build_policy(spec, p), kernel);
      const double want = steady_push_probability(c_thr, pc, p.catalog_size());
      CHECK(std::abs(analysis.action_frequency[2] - want) < 1e-6);
      CHECK(analysis.blocking >= blocking_lower_bound(p, c_thr) - 1e-9);
    }
  }
}

TEST_CASE("policy kind names round-trip") {
  for (PolicyKind kind : {PolicyKind::PushOnly, PolicyKind::AlwaysPush,
                          PolicyKind::EnergyEfficient, PolicyKind::GreedyThreshold,
                          PolicyKind::ServiceOnDemand, PolicyKind::DpOptimal}) {
    CHECK(parse_policy_kind(policy_kind_name(kind)) == kind);
  }
  CHECK_FALSE(parse_policy_kind("nope").has_value());
}
