#include "ehpush/thresholds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ehpush {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double cumulative_area(const DistanceGrid& grid, int classes) {
  double total = 0.0;
  for (int m = 1; m <= classes; ++m) total += grid.area_fraction(m);
  return total;
}

double cumulative_unicast_units(const DistanceGrid& grid, int classes) {
  double total = 0.0;
  for (int m = 1; m <= classes; ++m)
    total += grid.multipliers[m - 1] * grid.area_fraction(m);
  return total;
}

double zipf_denominator(const Catalog& catalog) {
  double total = 0.0;
  for (int j = 1; j <= catalog.size; ++j)
    total += std::pow(static_cast<double>(j), -catalog.skew);
  return total;
}

}  // namespace

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::PushOnly: return "potb";
    case PolicyKind::AlwaysPush: return "aptb";
    case PolicyKind::EnergyEfficient: return "eetb";
    case PolicyKind::GreedyThreshold: return "gotb";
    case PolicyKind::ServiceOnDemand: return "sod";
    case PolicyKind::DpOptimal: return "dp";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (PolicyKind kind :
       {PolicyKind::PushOnly, PolicyKind::AlwaysPush, PolicyKind::EnergyEfficient,
        PolicyKind::GreedyThreshold, PolicyKind::ServiceOnDemand,
        PolicyKind::DpOptimal}) {
    if (name == policy_kind_name(kind)) return kind;
  }
  return std::nullopt;
}

double steady_push_probability(int push_threshold, double update_prob,
                               int catalog_size) {
  if (push_threshold < 0 || push_threshold > catalog_size)
    throw std::invalid_argument("steady_push_probability: threshold outside [0, N]");
  return update_prob * push_threshold / (catalog_size + update_prob);
}

double blocking_lower_bound(const ModelParams& params, int push_threshold) {
  return steady_push_probability(push_threshold, params.catalog.update_prob,
                                 params.catalog_size()) *
         params.request_prob * (1.0 - head_mass(params.catalog, push_threshold));
}

int push_only_threshold(const ModelParams& params) {
  const int n = params.catalog_size();
  const double p_c = params.catalog.update_prob;
  if (p_c == 0.0) return n;  // a static catalog keeps every pushed content
  if (params.push_units <= 0)
    throw std::invalid_argument("push_only_threshold: push energy must be positive");
  const double raw =
      (n + p_c) * params.arrival.mean / (p_c * params.push_units);
  return std::min(n, static_cast<int>(std::floor(raw)));
}

double push_only_blocking_limit(const ModelParams& params) {
  return params.request_prob *
         (1.0 - head_mass(params.catalog, push_only_threshold(params)));
}

bool push_worthwhile(const ModelParams& params, int rank) {
  if (rank < 1 || rank > params.catalog_size())
    throw std::invalid_argument("push_worthwhile: rank outside 1..N");
  const double p_c = params.catalog.update_prob;
  if (p_c == 0.0) return true;  // pushed contents never leave
  const double expected_unicast_units =
      (params.catalog_size() / p_c) * params.request_prob *
      params.catalog.popularity[rank - 1] * mean_unicast_energy(params.grid);
  return params.push_units <= expected_unicast_units;
}

int energy_efficient_threshold(const ModelParams& params) {
  const int n = params.catalog_size();
  const double p_c = params.catalog.update_prob;
  const double v = params.catalog.skew;
  if (params.request_prob == 0.0) return 0;
  if (p_c == 0.0 || params.push_units == 0) return n;
  if (v == 0.0) {
    // Uniform popularity: the break-even test is rank-independent.
    return push_worthwhile(params, 1) ? n : 0;
  }
  const double raw = std::pow(
      n * params.request_prob * mean_unicast_energy(params.grid) /
          (p_c * params.push_units * zipf_denominator(params.catalog)),
      1.0 / v);
  return std::min(n, static_cast<int>(std::floor(raw)));
}

UnicastCutoff unicast_cutoff(const ModelParams& params, int push_threshold) {
  if (push_threshold < 0 || push_threshold > params.catalog_size())
    throw std::invalid_argument("unicast_cutoff: threshold outside [0, N]");
  UnicastCutoff cut;
  const double push_prob = steady_push_probability(
      push_threshold, params.catalog.update_prob, params.catalog_size());
  cut.push_budget = push_prob * params.push_units;
  cut.eta = (1.0 - push_prob) * params.request_prob *
            (1.0 - head_mass(params.catalog, push_threshold));
  const int m_count = params.classes();
  if (cut.eta == 0.0) {
    cut.class_cutoff = m_count;
    return cut;
  }
  const double spare = std::max(0.0, params.arrival.mean - cut.push_budget);
  const double cap =
      std::min(mean_unicast_energy(params.grid), spare / cut.eta);
  int cutoff = 0;
  for (int m = 1; m <= m_count; ++m) {
    if (cumulative_unicast_units(params.grid, m) <= cap) cutoff = m;
  }
  cut.class_cutoff = cutoff;
  return cut;
}

double threshold_blocking_prediction(const ModelParams& params,
                                     int push_threshold) {
  const UnicastCutoff cut = unicast_cutoff(params, push_threshold);
  const double outside = 1.0 - cumulative_area(params.grid, cut.class_cutoff);
  return blocking_lower_bound(params, push_threshold) + cut.eta * outside;
}

double energy_efficient_blocking_limit(const ModelParams& params) {
  const int threshold = energy_efficient_threshold(params);
  const UnicastCutoff cut = unicast_cutoff(params, threshold);
  if (params.arrival.mean < cut.push_budget)
    throw std::domain_error(
        "energy_efficient_blocking_limit: arrivals cannot cover the push "
        "budget; the policy behaves like always-push and has no closed form");
  return blocking_lower_bound(params, threshold) +
         cut.eta * (1.0 - cumulative_area(params.grid, cut.class_cutoff));
}

ThresholdPolicySpec make_threshold_spec(PolicyKind kind,
                                        const ModelParams& params) {
  ThresholdPolicySpec spec;
  spec.kind = kind;
  switch (kind) {
    case PolicyKind::PushOnly: {
      spec.push_threshold = push_only_threshold(params);
      spec.unicast_cutoff_class = 0;
      spec.eta = unicast_cutoff(params, spec.push_threshold).eta;
      spec.predicted_blocking = push_only_blocking_limit(params);
      return spec;
    }
    case PolicyKind::AlwaysPush: {
      spec.push_threshold = params.catalog_size();
      spec.unicast_cutoff_class = 0;
      spec.eta = unicast_cutoff(params, spec.push_threshold).eta;
      spec.predicted_blocking =
          push_only_threshold(params) == params.catalog_size()
              ? push_only_blocking_limit(params)
              : kNan;  // no closed form below the push-only threshold
      return spec;
    }
    case PolicyKind::EnergyEfficient: {
      spec.push_threshold = energy_efficient_threshold(params);
      const UnicastCutoff cut = unicast_cutoff(params, spec.push_threshold);
      spec.unicast_cutoff_class = cut.class_cutoff;
      spec.eta = cut.eta;
      spec.predicted_blocking = params.arrival.mean >= cut.push_budget
                                    ? threshold_blocking_prediction(
                                          params, spec.push_threshold)
                                    : kNan;
      return spec;
    }
    case PolicyKind::GreedyThreshold:
      return greedy_threshold_search(params);
    case PolicyKind::ServiceOnDemand: {
      spec.push_threshold = 0;
      spec.unicast_cutoff_class = params.classes();
      spec.eta = params.request_prob;
      spec.predicted_blocking = kNan;
      return spec;
    }
    case PolicyKind::DpOptimal:
      throw std::invalid_argument(
          "make_threshold_spec: the dp policy is not threshold-based");
  }
  throw std::invalid_argument("make_threshold_spec: unknown kind");
}

StationaryPolicy build_policy(const ThresholdPolicySpec& spec,
                              const ModelParams& params) {
  if (spec.push_threshold < 0 || spec.push_threshold > params.catalog_size())
    throw std::invalid_argument("build_policy: threshold outside [0, N]");
  if (spec.unicast_cutoff_class < 0 || spec.unicast_cutoff_class > params.classes())
    throw std::invalid_argument("build_policy: cutoff class outside [0, M]");
  StateSpace space(params.battery_units, params.classes(), params.catalog_size());
  StationaryPolicy policy(space.size(), Action::Sleep);
  for (int x = 0; x < space.size(); ++x) {
    const SystemState s = space.state(x);
    Action u = Action::Sleep;
    switch (spec.kind) {
      case PolicyKind::PushOnly:
      case PolicyKind::AlwaysPush:
        if (s.pushed < spec.push_threshold && s.energy >= params.push_units)
          u = Action::Push;
        break;
      case PolicyKind::EnergyEfficient:
      case PolicyKind::GreedyThreshold:
        if (s.pushed < spec.push_threshold) {
          if (s.energy >= params.push_units) u = Action::Push;
        } else if (s.request > 0 && s.request <= spec.unicast_cutoff_class &&
                   s.energy >= params.grid.multipliers[s.request - 1]) {
          u = Action::Unicast;
        }
        break;
      case PolicyKind::ServiceOnDemand:
        if (s.request > 0 && s.energy >= params.grid.multipliers[s.request - 1])
          u = Action::Unicast;
        break;
      case PolicyKind::DpOptimal:
        throw std::invalid_argument("build_policy: dp policies come from the solver");
    }
    policy[x] = u;
  }
  return policy;
}

ThresholdPolicySpec greedy_threshold_search(const ModelParams& params) {
  ThresholdPolicySpec best;
  best.kind = PolicyKind::GreedyThreshold;
  best.predicted_blocking = std::numeric_limits<double>::infinity();
  const int top = push_only_threshold(params);
  for (int c = 0; c <= top; ++c) {
    const UnicastCutoff cut = unicast_cutoff(params, c);
    const double predicted =
        blocking_lower_bound(params, c) +
        cut.eta * (1.0 - cumulative_area(params.grid, cut.class_cutoff));
    if (predicted < best.predicted_blocking) {
      best.push_threshold = c;
      best.unicast_cutoff_class = cut.class_cutoff;
      best.eta = cut.eta;
      best.predicted_blocking = predicted;
    }
  }
  return best;
}

}  // namespace ehpush
