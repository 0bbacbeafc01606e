#pragma once

#include <optional>
#include <string_view>

#include "ehpush/chain.hpp"

namespace ehpush {

enum class PolicyKind {
  PushOnly,         // potb: push while C < C_thr, never unicast
  AlwaysPush,       // aptb: push-only with threshold N
  EnergyEfficient,  // eetb: push to the break-even rank, unicast near users
  GreedyThreshold,  // gotb: scan thresholds with the closed-form predictor
  ServiceOnDemand,  // sod: unicast on request, never push
  DpOptimal,        // dp: policy-iteration optimum
};

const char* policy_kind_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

// Stationary probability that a threshold policy pushes, assuming push
// energy is always available: p_c * C_thr / (N + p_c).
double steady_push_probability(int push_threshold, double update_prob,
                               int catalog_size);

// Floor on any threshold policy's blocking: requests arriving while the
// station pushes a content the user lacks.
double blocking_lower_bound(const ModelParams& params, int push_threshold);

// Largest threshold whose average push energy the arrivals can cover.
int push_only_threshold(const ModelParams& params);

// Infinite-battery blocking of the push-only policy at its threshold.
double push_only_blocking_limit(const ModelParams& params);

// Largest rank whose push energy is no more than the unicast energy it is
// expected to save over the content's lifetime.
int energy_efficient_threshold(const ModelParams& params);

// True iff pushing rank `rank` (1-based) costs no more than the expected
// unicast energy for it.
bool push_worthwhile(const ModelParams& params, int rank);

struct UnicastCutoff {
  int class_cutoff = 0;      // m_thr: serve requests from classes 1..m_thr
  double eta = 0.0;          // rate of unicast requests beyond the threshold
  double push_budget = 0.0;  // average push energy at the threshold, in units
};

// Largest distance class whose cumulative unicast energy fits the arrival
// budget left after pushing; eta == 0 means every class fits.
UnicastCutoff unicast_cutoff(const ModelParams& params, int push_threshold);

// Predicted infinite-battery blocking of a push-threshold policy that also
// unicasts inside its cutoff class.
double threshold_blocking_prediction(const ModelParams& params,
                                     int push_threshold);

// Infinite-battery blocking of the energy-efficient policy. Throws
// std::domain_error when the arrival rate cannot even cover the push budget
// (the policy then behaves like always-push and has no closed form).
double energy_efficient_blocking_limit(const ModelParams& params);

struct ThresholdPolicySpec {
  PolicyKind kind = PolicyKind::ServiceOnDemand;
  int push_threshold = 0;        // C_thr
  int unicast_cutoff_class = 0;  // m_thr; 0 means never unicast
  double eta = 0.0;
  double predicted_blocking = 0.0;  // NaN when no closed form applies
};

ThresholdPolicySpec make_threshold_spec(PolicyKind kind, const ModelParams& params);

StationaryPolicy build_policy(const ThresholdPolicySpec& spec,
                              const ModelParams& params);

// Scans thresholds 0..push_only_threshold with the closed-form predictor and
// keeps the first-found minimum.
ThresholdPolicySpec greedy_threshold_search(const ModelParams& params);

}  // namespace ehpush
